#pragma once

#include <stdexcept>
#include <string>

namespace trajpred {

// Base of every error raised by the toolkit. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Recording file does not match the expected column layout or contains bad values.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class NumericalDivergence : public Error {
 public:
  NumericalDivergence(const std::string& what, int step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

class TrainingFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateNormalization : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace trajpred
