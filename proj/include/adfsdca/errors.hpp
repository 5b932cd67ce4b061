#ifndef ADFSDCA_ERRORS_HPP
#define ADFSDCA_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adfsdca {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string &what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  explicit ParseError(const std::string &what) : ParseError(0, what) {}

  /// 1-based line number, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IndexError : public Error {
 public:
  IndexError(std::size_t line, const std::string &what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

class InvalidMarginal : public Error {
 public:
  using Error::Error;
};

class InfeasibleMarginal : public Error {
 public:
  using Error::Error;
};

class NonTermination : public Error {
 public:
  using Error::Error;
};

/// Raised when the dual residue vanishes: the iterate is optimal and no
/// coherent sampling distribution exists.
class Converged : public Error {
 public:
  Converged() : Error("dual residue is zero") {}
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace adfsdca

#endif  // ADFSDCA_ERRORS_HPP
