#pragma once

#include <stdexcept>
#include <string>

namespace propnet {

// Root of every error raised by the library. Subclasses name the failure
// category so callers (and the CLI) can react without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: bad hyper-parameters, inconsistent specs, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or missing input data.
class InputError : public Error {
 public:
  using Error::Error;
};

// Misuse of the differentiation tape.
class TapeError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class EvaluationError : public Error {
 public:
  using Error::Error;
};

class ExplanationError : public Error {
 public:
  using Error::Error;
};

}  // namespace propnet
