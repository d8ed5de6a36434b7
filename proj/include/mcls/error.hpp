#pragma once

#include <stdexcept>
#include <string>

namespace mcls {

enum class ErrorCode {
  Usage,
  Io,
  Parse,
  Dimension,
  InvalidArgument,
  Divergence,
  Collapse,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Raised by the file readers; carries the byte offset where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(ErrorCode::Parse,
              what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Process exit status for a failure category: 2 usage, 3 I/O, 4 dimension,
/// 5 numerical divergence, 6 contour collapse.
inline int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
    case ErrorCode::InvalidArgument:
      return 2;
    case ErrorCode::Io:
    case ErrorCode::Parse:
      return 3;
    case ErrorCode::Dimension:
      return 4;
    case ErrorCode::Divergence:
      return 5;
    case ErrorCode::Collapse:
      return 6;
  }
  return 1;
}

}  // namespace mcls
