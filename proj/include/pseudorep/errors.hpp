#pragma once

#include <stdexcept>
#include <string>

namespace pseudorep {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad magic, ragged rows, unparsable fields).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Two inputs that must agree do not (image/label counts, id order, pool
/// membership).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or configuration values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Arguments with the wrong shape or violating a value contract.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The request is well-formed but has nothing to learn from: a single
/// class, a zero-width embedding, a batch of one.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public FormatError {
 public:
  using FormatError::FormatError;
};

class NonFiniteError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace pseudorep
