#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace toprank {

using FeatureVector = std::vector<double>;

/// Malformed or inconsistent input data (CSV parse errors, bad labels, ...).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure: diverged training, non-finite values where finite
/// ones are required.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class LossVariant { Top, TopRej, TopLOF, TopRejLOF };

constexpr bool uses_rejection(LossVariant v) {
  return v == LossVariant::TopRej || v == LossVariant::TopRejLOF;
}

constexpr bool uses_lof(LossVariant v) {
  return v == LossVariant::TopLOF || v == LossVariant::TopRejLOF;
}

std::string variant_name(LossVariant v);
LossVariant parse_variant(const std::string& name);

}  // namespace toprank
