// Copyright 2026 The ctftnet Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace ctft {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or rank contract violated by an operation's inputs.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf, singular statistics, unstable filters.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class StaleCacheError : public IoError {
 public:
  using IoError::IoError;
};

// Filter design or synthesis preconditions (unstable cascade, COLA).
class DspError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DeterminismError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctft
