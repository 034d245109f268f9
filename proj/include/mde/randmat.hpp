#pragma once

// Monte Carlo comparison of Kronecker random matrices b0 (x) 1_N + sum_j b_j (x) X_j with the
// density of states of (b0, eta), eta(b) = sum_j b_j b b_j, for independent GUE X_j.

#include <cstdint>
#include <vector>

#include "mde/algebra.hpp"
#include "mde/covariance.hpp"
#include "mde/dyson.hpp"
#include "mde/measures.hpp"
#include "mde/verify.hpp"

namespace mde {

/// GUE with E|x_ij|^2 = 1/N, so the spectrum concentrates on [-2, 2].
Hermitian sample_gue(std::size_t n, std::uint64_t seed);

struct KroneckerModel {
  Hermitian b0;
  std::vector<Hermitian> bs;
  std::size_t n = 1;  // GUE size N
  int trials = 1;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t dim() const noexcept { return b0.dim(); }
  /// b -> sum_j b_j b b_j; the zero map when there are no b_j.
  CovarianceMap covariance() const;
  /// The matrix of one trial, indexed (i N + a, k N + c). X_j of trial t uses the stream
  /// split(t).split(j) of the model seed.
  Hermitian sample(int trial) const;
};

/// Pooled eigenvalues of all trials as a uniform measure on m N trials atoms (sorted, so the
/// pooling order does not matter).
DiscreteMeasure empirical_spectrum(const KroneckerModel& model, int threads = 1);

struct MonteCarloReport {
  double levy = 0.0;
  std::size_t n = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  double epsilon = 0.0;
  std::size_t grid_points = 0;
  Window window{0.0, 0.0};
  /// Levy-sense discrepancy between the quantized and the exact smoothed measures.
  SlackBudget slack;
};

/// Smooths both the empirical spectrum and the density of states of (b0, eta, tr_m) at the
/// same epsilon on a common grid and returns the Levy distance of the quantized measures.
MonteCarloReport validate_against_dos(const KroneckerModel& model, double epsilon, const SolverConfig& cfg = {},
                                      std::size_t grid_points = 2001, int threads = 1);

}  // namespace mde
