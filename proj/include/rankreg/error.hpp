#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rankreg {

enum class ErrorKind {
  InvalidPrice,
  Parse,
  DuplicateKey,
  Schema,
  DegenerateBatch,
  InvalidWindow,
  Dimension,
  Divergence,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries an ErrorKind so callers
/// (the CLI in particular) can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(long long iteration, double learning_rate);
  long long iteration() const noexcept { return iteration_; }
  double learning_rate() const noexcept { return learning_rate_; }

 private:
  long long iteration_;
  double learning_rate_;
};

}  // namespace rankreg
