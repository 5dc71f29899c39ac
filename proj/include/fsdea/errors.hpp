#pragma once

#include <stdexcept>
#include <string>

namespace fsdea {

// Base class for everything this library throws on bad input.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct DuplicateKeyError : Error {
  using Error::Error;
};
struct DegenerateColumnError : Error {
  using Error::Error;
};
struct PositivityError : Error {
  using Error::Error;
};
struct SpecError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct ConsistencyError : Error {
  using Error::Error;
};
struct EstimationError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace fsdea
