#pragma once

#include <stdexcept>
#include <string>

namespace urlnet {

// Exit codes used by the command-line tool.
enum class ExitCode : int { ok = 0, usage = 1, data = 2, numeric = 3 };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::data; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::usage; }
};

// Malformed input files, invalid arguments to data operations, bad archives.
class DataError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf in a forward or backward pass, divergent training.
class NumericError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::numeric; }
};

}  // namespace urlnet
