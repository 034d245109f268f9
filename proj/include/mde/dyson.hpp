#pragma once

// Solver for the matrix Dyson equation b G = 1 + eta(G) G on the upper half-plane,
// via the fixed-point iteration w -> (b - eta(w))^{-1}, with a-posteriori certification
// from the residual b - w^{-1} - eta(w).

#include <optional>
#include <string>
#include <vector>

#include "mde/algebra.hpp"
#include "mde/covariance.hpp"

namespace mde {

struct SolverConfig {
  double tol_residual = 1e-12;  // stop once ||residual|| <= tol_residual * gamma
  int max_iter = 10000;
  std::optional<Matrix> initial_point;  // default -i 1; must satisfy Im < 0
  /// Start far from the real axis and march Im(b) down, reusing solutions.
  bool continuation = true;
  /// After reaching the tolerance, keep iterating while the residual still decreases.
  bool polish = false;
  bool record_history = false;

  void validate() const;
};

struct DysonSolution {
  Matrix w;
  double residual_norm = 0.0;
  /// ||Im(b)^{-1}||^2 ||res|| / (1 - sigma), sigma = ||res|| ||Im(b)^{-1}||; absent if sigma >= 1.
  std::optional<double> error_bound;
  int iterations = 0;
  double gamma = 0.0;  // smallest eigenvalue of Im(b)
  double inverse_condition = 0.0;
  std::vector<double> residual_history;
  std::vector<std::string> warnings;
};

/// b - w^{-1} - eta(w).
Matrix residual(const Matrix& b, const CovarianceMap& eta, const Matrix& w);

/// Certified error bound for an approximate solution w with the given residual norm.
std::optional<double> certified_error(double residual_norm, double inv_norm);

DysonSolution solve(const Matrix& b, const CovarianceMap& eta, const SolverConfig& cfg = {});

/// Solves at level k for amplify(eta, k); b lives in M_{km}(C). k = 2 needs a 2-positive
/// eta; k > 2 with a non-CP eta proceeds with a warning.
DysonSolution solve_amplified(const Matrix& b, const CovarianceMap& eta, std::size_t k,
                              const SolverConfig& cfg = {});

struct DerivativeResult {
  Matrix value;
  std::optional<double> error_bound;
  int iterations = 0;
};

/// (DG)(b) h read off the (1,2) block of G^{(2)}([[b, r h], [0, b]]) divided by r, with
/// r = gamma / ||h|| so that ||r h|| is half the largest admissible size 2 gamma.
DerivativeResult frechet_derivative(const Matrix& b, const CovarianceMap& eta, const Matrix& h,
                                    const SolverConfig& cfg = {});

/// (DG)(b) h from the linear system (b - eta(G)) X - eta(X) G = -h G, solved by LU on the
/// m^2 x m^2 vectorization. `g` may supply a precomputed G(b).
Matrix frechet_derivative_linear(const Matrix& b, const CovarianceMap& eta, const Matrix& h,
                                 const SolverConfig& cfg = {},
                                 const std::optional<Matrix>& g = std::nullopt);

/// m^2 x m^2 matrix of h -> (DG)(b) h in row-major vectorization.
Matrix derivative_matrix(const Matrix& b, const CovarianceMap& eta, const SolverConfig& cfg = {},
                         const std::optional<Matrix>& g = std::nullopt);

/// G(b1) - G(b0) from the (1,2) block of G^{(2)}([[b0, r (b1 - b0)], [0, b1]]) divided by r,
/// r = sqrt(gamma0 gamma1) / ||b1 - b0||.
DerivativeResult difference_via_amplification(const Matrix& b0, const Matrix& b1,
                                              const CovarianceMap& eta,
                                              const SolverConfig& cfg = {});

}  // namespace mde
