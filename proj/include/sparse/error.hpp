#pragma once

#include <stdexcept>
#include <string>

namespace sparse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct SingularSystem : Error {
  using Error::Error;
};

struct ConstraintMismatch : Error {
  using Error::Error;
};

// malformed or inconsistent input files
struct DataError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace sparse
