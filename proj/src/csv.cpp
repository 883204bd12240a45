#include "nanomesh/csv.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <ctime>

#include "nanomesh/errors.h"

namespace nanomesh::csv {

std::string field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += field(fields[i]);
  }
  return out;
}

std::vector<std::string> splitRow(std::string_view line) {
  std::vector<std::string> out;
  std::string current;
  bool quoted = false;
  bool wasQuoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c != '"') {
        current += c;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (c == ',') {
      out.push_back(std::move(current));
      current.clear();
      wasQuoted = false;
    } else if (c == '"' && current.empty() && !wasQuoted) {
      quoted = true;
      wasQuoted = true;
    } else {
      current += c;
    }
  }
  if (quoted) throw Error("unterminated quote in CSV row");
  out.push_back(std::move(current));
  return out;
}

std::string formatTimestamp(Timestamp t) {
  auto seconds = std::chrono::floor<std::chrono::seconds>(t);
  auto millis = (t - seconds).count();
  std::time_t tt = seconds.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(millis));
  return buf;
}

Timestamp parseTimestamp(std::string_view text) {
  std::tm tm{};
  int millis = 0;
  int consumed = 0;
  std::string s(text);
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ%n", &tm.tm_year, &tm.tm_mon,
                      &tm.tm_mday, &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &millis, &consumed);
  if (n != 7 || consumed != static_cast<int>(s.size())) {
    throw Error("bad timestamp '" + s + "'");
  }
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  std::time_t tt = timegm(&tm);
  return Timestamp(std::chrono::seconds(tt)) + std::chrono::milliseconds(millis);
}

std::string formatMillis(std::optional<std::chrono::microseconds> d) {
  if (!d) return "";
  auto us = d->count();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", us < 0 ? "-" : "",
                static_cast<long long>(std::abs(us) / 1000),
                static_cast<long long>(std::abs(us) % 1000));
  return buf;
}

std::optional<std::chrono::microseconds> parseMillis(std::string_view text) {
  if (text.empty()) return std::nullopt;
  bool negative = text.front() == '-';
  if (negative) text.remove_prefix(1);
  std::size_t dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string frac = dot == std::string_view::npos ? "" : std::string(text.substr(dot + 1));
  if (frac.size() > 3) throw Error("more than microsecond precision in '" + std::string(text) + "'");
  frac.resize(3, '0');
  long long ms = 0;
  long long us = 0;
  auto r1 = std::from_chars(whole.data(), whole.data() + whole.size(), ms);
  auto r2 = std::from_chars(frac.data(), frac.data() + frac.size(), us);
  if (whole.empty() || r1.ec != std::errc() || r1.ptr != whole.data() + whole.size() ||
      r2.ec != std::errc() || r2.ptr != frac.data() + frac.size()) {
    throw Error("bad millisecond value '" + std::string(text) + "'");
  }
  long long total = ms * 1000 + us;
  return std::chrono::microseconds(negative ? -total : total);
}

}  // namespace nanomesh::csv
