#pragma once

#include <stdexcept>
#include <string>

namespace gcmc {

// Base for all library errors so callers (and the C shim) can catch
// everything from this library in one place.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

// Derivative order beyond the configured cap.
struct OrderCapError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

// Malformed SOS certificate (negative coefficient, odd remainder
// exponent, wrong weight).
struct CertificateError : Error {
  using Error::Error;
};

// Grid/kernel support problems (kernel wider than the grid, mass lost
// over the boundary).
struct SupportError : Error {
  using Error::Error;
};

}  // namespace gcmc
