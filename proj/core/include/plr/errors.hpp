#pragma once

#include <stdexcept>

namespace plr {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid argument or configuration value. The CLI maps this to exit code 2.
struct ParameterError : Error {
  using Error::Error;
};

// Malformed or inconsistent data: corpus files, channel mismatches, bad
// report schemas. The CLI maps this to exit code 1.
struct DataError : Error {
  using Error::Error;
};

// Infeasible experimental protocol, e.g. a required class is empty in a
// split. The CLI maps this to exit code 1.
struct ProtocolError : Error {
  using Error::Error;
};

}  // namespace plr
