#pragma once

#include <stdexcept>
#include <string>

namespace docmt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data, bad configuration, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Translation endpoint failures (exhausted retries, auth, malformed payloads).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Quality scorer / language identifier failures.
class ScorerError : public Error {
 public:
  using Error::Error;
};

}  // namespace docmt
