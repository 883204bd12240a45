#include "nanomesh/rdf_io.h"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "nanomesh/errors.h"

namespace nanomesh {

namespace {

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

void appendUtf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool isAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool isDigit(char c) { return c >= '0' && c <= '9'; }
bool isHex(char c) {
  return isDigit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Characters that may not appear unescaped inside <...>.
bool isForbiddenInIri(char c) {
  auto u = static_cast<unsigned char>(c);
  if (u <= 0x20) return true;
  switch (c) {
    case '<': case '>': case '"': case '{': case '}':
    case '|': case '^': case '`': case '\\':
      return true;
    default:
      return false;
  }
}

// Shared scanner state. Positions are byte offsets; line and column are
// only computed when an error is raised.
class Scanner {
 public:
  explicit Scanner(std::string_view text) : text_(text) {}

  bool atEnd() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char get() { return text_[pos_++]; }
  std::size_t pos() const { return pos_; }
  void setPos(std::size_t p) { pos_ = p; }
  std::string_view rest() const { return text_.substr(pos_); }
  bool startsWith(std::string_view s) const { return rest().starts_with(s); }
  std::string slice(std::size_t from) const {
    return std::string(text_.substr(from, pos_ - from));
  }

  template <typename E = SyntaxError>
  [[noreturn]] void fail(const std::string& message) const {
    failAt<E>(message, pos_);
  }

  template <typename E = SyntaxError>
  [[noreturn]] void failAt(const std::string& message, std::size_t at) const {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw E(message, line, column);
  }

  void expect(char c) {
    if (peek() != c || atEnd()) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::uint32_t readHex(std::size_t digits) {
    std::uint32_t cp = 0;
    for (std::size_t i = 0; i < digits; ++i) {
      char c = peek();
      if (!isHex(c)) fail("bad hex digit in escape");
      ++pos_;
      cp = cp * 16 + static_cast<std::uint32_t>(
                         isDigit(c) ? c - '0' : (c | 0x20) - 'a' + 10);
    }
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      fail("escape is not a Unicode scalar value");
    }
    return cp;
  }

  // After '<'. Reads up to and including '>'.
  std::string readIriRef() {
    std::size_t start = pos_;
    expect('<');
    std::string iri;
    for (;;) {
      if (atEnd()) failAt("unterminated IRI", start);
      char c = get();
      if (c == '>') break;
      if (c == '\\') {
        char kind = atEnd() ? '\0' : get();
        if (kind == 'u') {
          appendUtf8(iri, readHex(4));
        } else if (kind == 'U') {
          appendUtf8(iri, readHex(8));
        } else {
          fail("invalid escape in IRI");
        }
        continue;
      }
      if (isForbiddenInIri(c)) {
        failAt("invalid character in IRI", pos_ - 1);
      }
      iri.push_back(c);
    }
    if (!isAbsoluteIri(iri)) {
      failAt<RelativeIriError>("relative IRI <" + iri + ">", start);
    }
    return iri;
  }

  // Reads a quoted string body. `quote` is '"' or '\''; long strings use a
  // tripled delimiter and may span lines.
  std::string readString() {
    std::size_t start = pos_;
    char quote = peek();
    bool isLong = peek(1) == quote && peek(2) == quote;
    pos_ += isLong ? 3 : 1;
    std::string value;
    for (;;) {
      if (atEnd()) failAt("unterminated literal", start);
      char c = get();
      if (c == quote) {
        if (!isLong) break;
        if (peek() == quote && peek(1) == quote) {
          // A long string may end with up to two extra quote characters.
          while (peek(2) == quote) {
            value.push_back(quote);
            ++pos_;
          }
          pos_ += 2;
          break;
        }
        value.push_back(c);
        continue;
      }
      if (c == '\\') {
        char e = atEnd() ? '\0' : get();
        switch (e) {
          case 't': value.push_back('\t'); break;
          case 'b': value.push_back('\b'); break;
          case 'n': value.push_back('\n'); break;
          case 'r': value.push_back('\r'); break;
          case 'f': value.push_back('\f'); break;
          case '"': value.push_back('"'); break;
          case '\'': value.push_back('\''); break;
          case '\\': value.push_back('\\'); break;
          case 'u': appendUtf8(value, readHex(4)); break;
          case 'U': appendUtf8(value, readHex(8)); break;
          default: failAt("invalid escape in literal", pos_ - 2);
        }
        continue;
      }
      if (!isLong && (c == '\n' || c == '\r')) {
        failAt("line break in literal", pos_ - 1);
      }
      value.push_back(c);
    }
    return value;
  }

  std::string readLanguageTag() {
    expect('@');
    std::size_t start = pos_;
    while (isAlpha(peek())) ++pos_;
    if (pos_ == start) fail("empty language tag");
    while (peek() == '-') {
      std::size_t segment = ++pos_;
      while (isAlpha(peek()) || isDigit(peek())) ++pos_;
      if (pos_ == segment) fail("empty language subtag");
    }
    return slice(start);
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

Term makeLiteral(Scanner& s, std::size_t at, std::string value,
                 std::string datatype, std::string language) {
  try {
    if (!language.empty()) {
      return Term::langLiteral(std::move(value), std::move(language));
    }
    return Term::literal(std::move(value), std::move(datatype));
  } catch (const std::invalid_argument& e) {
    s.failAt(e.what(), at);
  }
}

// ---------------------------------------------------------------------------
// Line quads

class LineQuadsParser {
 public:
  explicit LineQuadsParser(std::string_view text) : s_(text) {}

  std::vector<Quad> parse() {
    std::vector<Quad> quads;
    for (;;) {
      skipBlanks();
      if (s_.atEnd()) break;
      if (s_.peek() == '\n' || s_.peek() == '\r' || s_.peek() == '#') {
        skipToLineEnd();
        continue;
      }
      quads.push_back(statement());
      skipBlanks();
      if (s_.peek() == '#') {
        skipToLineEnd();
      } else if (!s_.atEnd() && s_.peek() != '\n' && s_.peek() != '\r') {
        s_.fail("expected end of line after statement");
      }
    }
    return quads;
  }

 private:
  void skipBlanks() {
    while (s_.peek() == ' ' || s_.peek() == '\t') s_.get();
  }
  void skipToLineEnd() {
    while (!s_.atEnd() && s_.peek() != '\n') s_.get();
    if (!s_.atEnd()) s_.get();
  }

  void rejectBlank() {
    if (s_.peek() == '_' && s_.peek(1) == ':') {
      s_.fail<BlankNodeError>("blank nodes are not supported");
    }
  }

  Term iri() {
    skipBlanks();
    rejectBlank();
    if (s_.peek() != '<') s_.fail("expected IRI");
    return Term::iri(s_.readIriRef());
  }

  Term object() {
    skipBlanks();
    rejectBlank();
    if (s_.peek() == '<') return Term::iri(s_.readIriRef());
    if (s_.peek() != '"') s_.fail("expected IRI or literal");
    std::size_t at = s_.pos();
    if (s_.startsWith("\"\"\"")) s_.fail("long literals are not line quads");
    std::string value = s_.readString();
    std::string datatype;
    std::string language;
    if (s_.peek() == '@') {
      language = s_.readLanguageTag();
    } else if (s_.peek() == '^' && s_.peek(1) == '^') {
      s_.get();
      s_.get();
      if (s_.peek() != '<') s_.fail("expected datatype IRI");
      datatype = s_.readIriRef();
    }
    return makeLiteral(s_, at, std::move(value), std::move(datatype),
                       std::move(language));
  }

  Quad statement() {
    Quad q;
    q.subject = iri();
    q.predicate = iri();
    q.object = object();
    skipBlanks();
    if (s_.peek() == '.') s_.fail("statement without graph");
    q.graph = iri();
    skipBlanks();
    s_.expect('.');
    return q;
  }

  Scanner s_;
};

// ---------------------------------------------------------------------------
// Grouped graphs (TriG subset)

class GroupedGraphsParser {
 public:
  explicit GroupedGraphsParser(std::string_view text) : s_(text) {}

  std::vector<Quad> parse() {
    for (;;) {
      skipSpace();
      if (s_.atEnd()) break;
      if (s_.startsWith("@prefix")) {
        s_.setPos(s_.pos() + 7);
        prefixDirective(true);
      } else if (keywordAhead("PREFIX")) {
        s_.setPos(s_.pos() + 6);
        prefixDirective(false);
      } else if (s_.startsWith("@base") || keywordAhead("BASE")) {
        s_.fail("base declarations are not supported");
      } else {
        graphBlock();
      }
    }
    return std::move(quads_);
  }

 private:
  bool keywordAhead(std::string_view word) const {
    std::string_view rest = s_.rest();
    if (rest.size() < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if ((rest[i] | 0x20) != (word[i] | 0x20)) return false;
    }
    return rest.size() == word.size() || !isNameChar(rest[word.size()]);
  }

  static bool isNameStart(char c) {
    return isAlpha(c) || c == '_' || static_cast<unsigned char>(c) >= 0x80;
  }
  static bool isNameChar(char c) {
    return isNameStart(c) || isDigit(c) || c == '-' || c == '.';
  }

  void skipSpace() {
    for (;;) {
      char c = s_.peek();
      if (s_.atEnd()) return;
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        s_.get();
      } else if (c == '#') {
        while (!s_.atEnd() && s_.peek() != '\n') s_.get();
      } else {
        return;
      }
    }
  }

  void rejectBlank() {
    if ((s_.peek() == '_' && s_.peek(1) == ':') || s_.peek() == '[') {
      s_.fail<BlankNodeError>("blank nodes are not supported");
    }
  }

  // Reads "prefix:" and returns the prefix without the colon.
  std::string prefixName() {
    std::size_t start = s_.pos();
    if (isNameStart(s_.peek())) {
      while (isNameChar(s_.peek())) s_.get();
    }
    std::string name = s_.slice(start);
    if (!name.empty() && name.back() == '.') s_.failAt("bad prefix name", start);
    s_.expect(':');
    return name;
  }

  void prefixDirective(bool needsDot) {
    skipSpace();
    std::string name = prefixName();
    skipSpace();
    if (s_.peek() != '<') s_.fail("expected namespace IRI");
    prefixes_[name] = s_.readIriRef();
    if (needsDot) {
      skipSpace();
      s_.expect('.');
    }
  }

  std::string prefixedName() {
    std::size_t start = s_.pos();
    std::string prefix;
    if (s_.peek() != ':') {
      if (!isNameStart(s_.peek())) s_.fail("expected IRI");
      while (isNameChar(s_.peek())) s_.get();
      prefix = s_.slice(start);
    }
    if (s_.peek() != ':') s_.failAt("expected IRI", start);
    s_.get();
    std::string local;
    std::size_t trailingDots = 0;
    for (;;) {
      char c = s_.peek();
      if (s_.atEnd()) break;
      if (c == '\\') {
        s_.get();
        char e = s_.peek();
        if (s_.atEnd() || std::string_view("_~.-!$&'()*+,;=/?#@%").find(e) ==
                              std::string_view::npos) {
          s_.fail("invalid escape in local name");
        }
        local.push_back(s_.get());
        trailingDots = 0;
      } else if (c == '%') {
        if (!isHex(s_.peek(1)) || !isHex(s_.peek(2))) {
          s_.fail("bad percent escape");
        }
        for (int i = 0; i < 3; ++i) local.push_back(s_.get());
        trailingDots = 0;
      } else if (isNameChar(c) || c == ':' || isDigit(c)) {
        trailingDots = c == '.' ? trailingDots + 1 : 0;
        local.push_back(s_.get());
      } else {
        break;
      }
    }
    // A trailing '.' terminates the statement, it is not part of the name.
    local.resize(local.size() - trailingDots);
    s_.setPos(s_.pos() - trailingDots);
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) {
      s_.failAt("undeclared prefix '" + prefix + "'", start);
    }
    std::string iri = it->second + local;
    if (!isAbsoluteIri(iri)) {
      s_.failAt<RelativeIriError>("relative IRI " + iri, start);
    }
    return iri;
  }

  std::string iri() {
    rejectBlank();
    if (s_.peek() == '<') return s_.readIriRef();
    return prefixedName();
  }

  Term verb() {
    if (s_.peek() == 'a' && !isNameChar(s_.peek(1)) && s_.peek(1) != ':') {
      s_.get();
      return Term::iri(std::string(rdf_ns::kType));
    }
    return Term::iri(iri());
  }

  Term numericOrBoolean() {
    std::size_t start = s_.pos();
    if (keywordAhead("true") || keywordAhead("false")) {
      bool t = s_.peek() == 't';
      s_.setPos(s_.pos() + (t ? 4 : 5));
      return Term::literal(t ? "true" : "false", std::string(kXsd) + "boolean");
    }
    if (s_.peek() == '+' || s_.peek() == '-') s_.get();
    std::size_t intDigits = 0;
    while (isDigit(s_.peek())) {
      s_.get();
      ++intDigits;
    }
    std::string type = "integer";
    if (s_.peek() == '.' && isDigit(s_.peek(1))) {
      s_.get();
      while (isDigit(s_.peek())) s_.get();
      type = "decimal";
    } else if (intDigits == 0) {
      s_.failAt("expected object", start);
    }
    if (s_.peek() == 'e' || s_.peek() == 'E') {
      s_.get();
      if (s_.peek() == '+' || s_.peek() == '-') s_.get();
      if (!isDigit(s_.peek())) s_.fail("bad exponent");
      while (isDigit(s_.peek())) s_.get();
      type = "double";
    }
    std::string lexical = s_.slice(start);
    return Term::literal(std::move(lexical), std::string(kXsd) + type);
  }

  Term object() {
    rejectBlank();
    char c = s_.peek();
    if (c == '"' || c == '\'') {
      std::size_t at = s_.pos();
      std::string value = s_.readString();
      std::string datatype;
      std::string language;
      if (s_.peek() == '@') {
        language = s_.readLanguageTag();
      } else if (s_.peek() == '^' && s_.peek(1) == '^') {
        s_.get();
        s_.get();
        datatype = iri();
      }
      return makeLiteral(s_, at, std::move(value), std::move(datatype),
                         std::move(language));
    }
    if (c == '+' || c == '-' || isDigit(c) || c == '.' ||
        keywordAhead("true") || keywordAhead("false")) {
      return numericOrBoolean();
    }
    return Term::iri(iri());
  }

  void triples(const Term& graph) {
    Term subject = Term::iri(iri());
    for (;;) {
      skipSpace();
      Term predicate = verb();
      for (;;) {
        skipSpace();
        quads_.push_back(Quad{subject, predicate, object(), graph});
        skipSpace();
        if (s_.peek() != ',') break;
        s_.get();
      }
      if (s_.peek() != ';') return;
      while (s_.peek() == ';') {
        s_.get();
        skipSpace();
      }
      if (s_.peek() == '.' || s_.peek() == '}') return;
    }
  }

  void graphBlock() {
    if (keywordAhead("GRAPH")) {
      s_.setPos(s_.pos() + 5);
      skipSpace();
    }
    if (s_.peek() == '{') s_.fail("default graph blocks are not supported");
    Term graph = Term::iri(iri());
    skipSpace();
    if (s_.peek() != '{') s_.fail("expected '{' (triples outside a graph)");
    s_.get();
    for (;;) {
      skipSpace();
      if (s_.atEnd()) s_.fail("unterminated graph block");
      if (s_.peek() == '}') {
        s_.get();
        return;
      }
      triples(graph);
      skipSpace();
      if (s_.peek() == '.') {
        s_.get();
      } else if (s_.peek() != '}') {
        s_.fail("expected '.' or '}'");
      }
    }
  }

  Scanner s_;
  std::map<std::string, std::string> prefixes_;
  std::vector<Quad> quads_;
};

void appendEscaped(std::string& out, std::string_view value) {
  for (char c : value) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
}

}  // namespace

void appendTerm(std::string& out, const Term& term) {
  if (term.isIri()) {
    out.push_back('<');
    out += term.value();
    out.push_back('>');
    return;
  }
  out.push_back('"');
  appendEscaped(out, term.value());
  out.push_back('"');
  if (!term.language().empty()) {
    out.push_back('@');
    out += term.language();
  } else if (term.datatype() != rdf_ns::kXsdString) {
    out += "^^<";
    out += term.datatype();
    out.push_back('>');
  }
}

void appendStatement(std::string& out, const Quad& quad) {
  appendTerm(out, quad.subject);
  out.push_back(' ');
  appendTerm(out, quad.predicate);
  out.push_back(' ');
  appendTerm(out, quad.object);
  out.push_back(' ');
  appendTerm(out, quad.graph);
  out += " .\n";
}

std::vector<Quad> parseQuads(std::string_view text, Format format) {
  if (format == Format::kLineQuads) return LineQuadsParser(text).parse();
  return GroupedGraphsParser(text).parse();
}

std::string serializeQuads(std::span<const Quad> quads, Format format) {
  std::string out;
  if (format == Format::kLineQuads) {
    for (const Quad& q : quads) appendStatement(out, q);
    return out;
  }
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const Quad*>> byGraph;
  for (const Quad& q : quads) {
    auto [it, inserted] = byGraph.try_emplace(q.graph.value());
    if (inserted) order.push_back(q.graph.value());
    it->second.push_back(&q);
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += '<' + order[i] + "> {\n";
    for (const Quad* q : byGraph[order[i]]) {
      out += "  ";
      appendTerm(out, q->subject);
      out.push_back(' ');
      appendTerm(out, q->predicate);
      out.push_back(' ');
      appendTerm(out, q->object);
      out += " .\n";
    }
    out += "}\n";
  }
  return out;
}

Format formatForPath(const std::filesystem::path& path) {
  return path.extension() == ".trig" ? Format::kGroupedGraphs
                                     : Format::kLineQuads;
}

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void writeFile(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace nanomesh
