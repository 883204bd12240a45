#pragma once

// Text formats for quads.
//
// Line quads: one `<s> <p> <o> <g> .` statement per line, UTF-8, `\n`
// terminated. This is the byte form that gets hashed and stored, so the
// serializer is canonical: IRIs are written verbatim, literals escape only
// backslash, double quote, LF, CR and TAB, xsd:string literals carry no
// datatype suffix.
//
// Grouped graphs: a TriG subset (prefixes, graph blocks, `;`/`,` lists, `a`,
// typed and language-tagged literals) for files people edit. Never hashed.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nanomesh/rdf.h"

namespace nanomesh {

enum class Format { kLineQuads, kGroupedGraphs };

// Strict: the first malformed construct throws SyntaxError (BlankNodeError,
// RelativeIriError for those specific cases).
std::vector<Quad> parseQuads(std::string_view text, Format format);

std::string serializeQuads(std::span<const Quad> quads, Format format);

// Appends one canonical line-quads statement including the trailing newline.
void appendStatement(std::string& out, const Quad& quad);
void appendTerm(std::string& out, const Term& term);

// `.trig` selects grouped graphs; everything else is line quads.
Format formatForPath(const std::filesystem::path& path);

std::string readFile(const std::filesystem::path& path);
void writeFile(const std::filesystem::path& path, std::string_view content);

}  // namespace nanomesh
