#pragma once

#include <stdexcept>
#include <string>

namespace impartial {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition (dimension mismatch, empty design, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Numeric input is unusable (non-finite values, singular sensitive block).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Reading or parsing a data file failed. Messages carry row/column locations.
class IngestionError : public Error {
 public:
  using Error::Error;
};

/// Schema file is malformed or inconsistent with the data.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Estimator variant or decomposition mode is incompatible with the design.
class VariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace impartial
