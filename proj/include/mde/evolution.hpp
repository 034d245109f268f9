#pragma once

// Dependence of Dyson solutions on the covariance: Psi_eta, subordination between two
// covariances, local comparison estimates and the operator-valued Burgers equation along
// a path of covariances.

#include <optional>
#include <string>
#include <vector>

#include "mde/algebra.hpp"
#include "mde/covariance.hpp"
#include "mde/dyson.hpp"

namespace mde {

/// Psi_eta(w) = w^{-1} + eta(w); left inverse of G_eta near solutions.
Matrix psi(const CovarianceMap& eta, const Matrix& w);

struct SubordinationConfig {
  double sigma_prime = 0.25;
  double sigma = 0.5;
};

struct SubordinationResult {
  Matrix omega;              // Psi_{eta0}(G_{eta1}(b))
  double deviation = 0.0;    // ||omega - b||
  /// ||G_{eta0}(omega) - G_{eta1}(b)||; NaN when omega left the upper half-plane.
  double consistency = 0.0;
  /// Certified solver errors propagated to the consistency gap.
  double consistency_budget = 0.0;
  /// ||eta1 - eta0|| / ((1 - sigma') gamma) with the upper norm estimate.
  double deviation_bound = 0.0;
  bool in_domain = true;
  std::vector<std::string> warnings;
};

/// omega^{b0}_{eta0 -> eta1}(b). Outside the admissible region (||b - b0|| <= sigma' gamma(b0)
/// and ||eta1 - eta0|| <= (1 - sigma')(sigma - sigma') gamma^2) the result carries a warning
/// and the identity G_{eta0}(omega) = G_{eta1}(b) is still checked.
SubordinationResult subordinate(const HalfPlanePoint& b0, const Matrix& b, const CovarianceMap& eta0,
                                const CovarianceMap& eta1, const SolverConfig& cfg = {},
                                const SubordinationConfig& sc = {});

/// Central difference (omega(b + d h) - omega(b - d h)) / (2 d).
Matrix subordination_derivative_fd(const Matrix& b, const Matrix& h,
                                   const CovarianceMap& eta0, const CovarianceMap& eta1, double d,
                                   const SolverConfig& cfg = {});

/// min over 0 < s' < s < 1 with sigma0 = (1 - s')(s - s') of
/// (1 - s + c s') / (s' (1 - s') (1 - s)^3).
double local_comparison_constant(double sigma0, double c = 27.0 / 4.0);

struct LocalComparison {
  double gamma = 0.0;
  double sigma0 = 0.125;
  NormBounds delta_eta{0.0, 0.0};
  double gap_g = 0.0;
  double gap_g_bound = 0.0;   // ||deta|| / ((1 - sigma0) gamma^3), lower norm estimate
  double gap_dg = 0.0;        // lower estimate of ||DG_{eta1}(b) - DG_{eta0}(b)||
  double gap_dg_bound = 0.0;  // K(sigma0) ||deta|| / gamma^4
  double solver_slack = 0.0;  // certified errors of the two solves
};

/// Throws PreconditionError when the upper estimate of ||eta1 - eta0|| exceeds sigma0 gamma^2.
LocalComparison local_comparison(const HalfPlanePoint& b, const CovarianceMap& eta0,
                                 const CovarianceMap& eta1, const SolverConfig& cfg = {},
                                 double sigma0 = 0.125, std::uint64_t seed = 1);

/// -(DG_t)(b)(eta_dot_t(G_t(b))).
Matrix burgers_rhs(const CovariancePath& path, double t, const Matrix& b, const SolverConfig& cfg = {});

struct BurgersSample {
  double t = 0.0;
  Matrix b;
  Matrix g;
  Matrix g_dot;
  double fd_check = 0.0;       // ||g_dot - central difference at delta||
  double fd_check_half = 0.0;  // same at delta / 2
};

struct BurgersReport {
  std::vector<BurgersSample> samples;
  double delta = 0.0;
  double max_fd_check = 0.0;
  double max_fd_check_half = 0.0;
  double halving_ratio = 0.0;  // max_fd_check / max_fd_check_half
};

/// Default step delta = 1e-5 max(1, t_end). Solves run in polish mode so that solver noise
/// stays below the truncation error of the central differences.
BurgersReport burgers_sweep(const CovariancePath& path, const std::vector<Matrix>& b_grid,
                            const std::vector<double>& t_grid, const SolverConfig& cfg = {},
                            std::optional<double> delta = std::nullopt);

}  // namespace mde
