#pragma once

#include <stdexcept>
#include <string>

namespace rgqr {

// Failure taxonomy. Each class maps onto one CLI exit code family:
// ConfigError/OrderingError/ParseError -> validation (1),
// OptimError/SingularDesignError -> estimation (2), IoError -> I/O (3).

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OrderingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AlignmentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularDesignError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OptimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace rgqr
