#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bilevel {

/// Base class of every error raised by the library. `exit_code()` is the
/// process exit status the command-line runner maps the error to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 2; }
};

class UnsupportedProxCombination : public Error {
 public:
  using Error::Error;
};

class MissingOracle : public Error {
 public:
  using Error::Error;
};

class NonPositiveValues : public Error {
 public:
  using Error::Error;
};

class NonSmoothProblem : public Error {
 public:
  using Error::Error;
};

class DimensionOverflow : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class StorageUnavailable : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or configuration. `path()` names the offending field
/// (dot-separated for config trees, a parameter name otherwise).
class ValidationError : public Error {
 public:
  ValidationError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }
  int exit_code() const noexcept override { return 1; }

 private:
  std::string path_;
};

class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

class ParseError : public IoError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : IoError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class NonBinaryLabel : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace bilevel
