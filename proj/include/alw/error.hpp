#pragma once

#include <stdexcept>
#include <string>

namespace alw {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or empty input data (rasters, masks, files).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Parameter combination outside the supported range.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// Long-axis seed that cannot define an ROI or an initial contour.
class InvalidSeed : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (e.g. unnormalized histogram).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// The zero level set vanished: phi is single-signed over the grid.
class ContourCollapse : public Error {
 public:
  using Error::Error;
};

}  // namespace alw
