#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace iroa {

// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix sizes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite entries, bad parameters, violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

// Factorization breakdown. Carries the offending pivot when there is one.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what,
                        std::size_t pivot = static_cast<std::size_t>(-1))
      : Error(what), pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

// Solver state that cannot be continued (e.g. empty active set mid-step).
class DegenerateStateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class FileError : public Error {
 public:
  FileError(const std::string& what, std::string path)
      : Error(what + ": " + path), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace iroa
