#pragma once

#include <stdexcept>
#include <string>

namespace igb {

// Root of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes or vector lengths.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A value outside the mathematical domain of an operation (e.g. log of 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// An operation called in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment, suite, or strategy configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace igb
