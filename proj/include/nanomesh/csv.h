#pragma once

// Minimal CSV and timestamp helpers for the monitor and harness logs.
// Fields are quoted only when they contain a comma, a quote or a line break.

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nanomesh::csv {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

std::string field(std::string_view value);
std::string row(const std::vector<std::string>& fields);

// One logical line without its terminator. Throws Error on an
// unterminated quote.
std::vector<std::string> splitRow(std::string_view line);

// "2026-10-16T09:30:00.125Z"
std::string formatTimestamp(Timestamp t);
// Throws Error.
Timestamp parseTimestamp(std::string_view text);

// Durations are written as milliseconds with three decimals, so whole
// microseconds survive a round trip. Empty text means absent.
std::string formatMillis(std::optional<std::chrono::microseconds> d);
std::optional<std::chrono::microseconds> parseMillis(std::string_view text);

}  // namespace nanomesh::csv
