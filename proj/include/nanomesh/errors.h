#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nanomesh {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. Line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error(message + " at line " + std::to_string(line) + ", column " +
              std::to_string(column)),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class BlankNodeError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

class RelativeIriError : public SyntaxError {
 public:
  using SyntaxError::SyntaxError;
};

// A quad set that does not form a valid nanopublication.
class StructureError : public Error {
 public:
  using Error::Error;
};

class TrustyError : public Error {
 public:
  using Error::Error;
};

// Wrong length, prefix or alphabet in an artifact code.
class MalformedCodeError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

// Unknown journal page, or a package requested for an incomplete page.
class NotFoundError : public StoreError {
 public:
  using StoreError::StoreError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class FetchError : public Error {
 public:
  FetchError(const std::string& uri, const std::string& reason)
      : Error("cannot fetch " + uri + ": " + reason), uri_(uri) {}
  const std::string& uri() const { return uri_; }

 private:
  std::string uri_;
};

// Content arrived but does not match its artifact code.
class VerificationError : public FetchError {
 public:
  using FetchError::FetchError;
};

}  // namespace nanomesh
