#pragma once

#include <cmath>
#include <complex>

#include "mde/algebra.hpp"

namespace testing {

// Semicircle Cauchy transform on the upper half-plane, lower-half-plane branch.
inline mde::Complex semicircle(mde::Complex z) {
  return (z - std::sqrt(z - 2.0) * std::sqrt(z + 2.0)) / 2.0;
}

inline double dist(const mde::Matrix& a, const mde::Matrix& b) { return mde::op_norm(a - b); }

}  // namespace testing
