#pragma once

#include <stdexcept>
#include <string>

namespace seqfeat {

/// Invalid configuration or arguments supplied by the caller.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent, or out-of-contract input data.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, non-finite intermediate values, singularities.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace seqfeat
