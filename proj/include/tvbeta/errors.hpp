#pragma once

#include <stdexcept>

namespace tvbeta {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad argument or option value: non-positive bandwidth, mismatched sizes,
// evaluation point outside the window, and the like.
struct ConfigError : Error {
  using Error::Error;
};

// Input data that cannot be used: malformed event rows, empty networks,
// every bandwidth candidate failing.
struct DataError : Error {
  using Error::Error;
};

// No observation carries kernel weight at the requested evaluation point.
struct NoDataError : DataError {
  using DataError::DataError;
};

// A structured system matrix violates one of its defining conditions.
struct StructureError : Error {
  using Error::Error;
};

// A factorization or closed-form inverse hit a zero or indefinite pivot.
struct SingularError : Error {
  using Error::Error;
};

}  // namespace tvbeta
