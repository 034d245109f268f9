#include "mde/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace mde {

void SolverConfig::validate() const {
  if (!(tol_residual > 0.0)) throw std::invalid_argument("SolverConfig: tol_residual must be positive");
  if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter must be >= 1");
  if (initial_point) {
    const double hi = max_eigenvalue(Hermitian::imag_part(*initial_point));
    if (!(hi < 0.0))
      throw std::invalid_argument("SolverConfig: initial point must have negative definite imaginary part");
  }
}

Matrix residual(const Matrix& b, const CovarianceMap& eta, const Matrix& w) {
  require_same_dim(b, w, "residual");
  return b - inverse(w) - eta.apply(w);
}

std::optional<double> certified_error(double residual_norm, double inv_norm) {
  const double sigma = residual_norm * inv_norm;
  if (!(sigma < 1.0)) return std::nullopt;
  return inv_norm * inv_norm * residual_norm / (1.0 - sigma);
}

namespace {

std::string format_sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

struct Direct {
  double norm;
  double condition;
};

Direct direct_residual(const Matrix& b, const CovarianceMap& eta, const Matrix& w) {
  const InverseResult inv = invert(w);
  return {op_norm(b - inv.inverse - eta.apply(w)), inv.condition};
}

// Picard iteration from w until the residual is at most target. Returns false when the
// iteration budget runs out; `used` counts iterations against the shared budget.
struct StageOutcome {
  bool converged;
  double residual;
  double condition;
  bool floor_limited = false;  // converged at the rounding floor, above the target
};

StageOutcome iterate(const Matrix& b, const CovarianceMap& eta, Matrix& w, double target,
                     int budget, int& used, bool polish, std::vector<double>* history) {
  double last = std::numeric_limits<double>::infinity();
  double condition = 0.0;
  int stalls = 0;
  double best = std::numeric_limits<double>::infinity();
  while (used < budget) {
    const Matrix m = b - eta.apply(w);
    Matrix next = inverse(m);
    ++used;
    if (!next.is_finite()) throw NumericFailure("solve: iterate became non-finite");
    // At w' = (b - eta(w))^{-1} the residual equals eta(w - w') up to rounding.
    const double cheap = frobenius_norm(eta.apply(w - next));
    w = std::move(next);
    if (history != nullptr) history->push_back(cheap);
    last = cheap;
    // The cheap value gates the direct check; near the rounding floor (relative to the matrix
    // just inverted) and every 256 steps the direct residual decides.
    const bool floor = cheap <= 1e3 * std::numeric_limits<double>::epsilon() * frobenius_norm(m);
    if (cheap > 0.5 * target && !floor && used % 256 != 0) continue;
    const Direct d = direct_residual(b, eta, w);
    condition = d.condition;
    if (d.norm <= target) {
      if (!polish) return {true, d.norm, condition};
      // Continue while the residual keeps improving.
      Matrix best_w = w;
      double best_r = d.norm;
      for (int extra = 0; extra < 100 && used < budget; ++extra) {
        Matrix cand = inverse(b - eta.apply(w));
        ++used;
        const Direct dc = direct_residual(b, eta, cand);
        w = std::move(cand);
        if (dc.norm < best_r) {
          best_r = dc.norm;
          best_w = w;
          condition = dc.condition;
          extra = std::max(0, extra - 5);
        } else if (extra > 10) {
          break;
        }
      }
      w = std::move(best_w);
      return {true, best_r, condition};
    }
    // Residual stuck above the target at the rounding floor.
    if (d.norm < best * 0.999) {
      best = d.norm;
      stalls = 0;
    } else if (++stalls > 200) {
      // Accept a stall only at the rounding floor of b - w^{-1} - eta(w).
      const double scale = frobenius_norm(b) + frobenius_norm(m) + frobenius_norm(eta.apply(w));
      const bool at_floor = d.norm <= 1e3 * std::numeric_limits<double>::epsilon() * scale;
      return {at_floor, d.norm, condition, at_floor};
    }
    last = d.norm;
  }
  return {false, last, condition};
}

}  // namespace

DysonSolution solve(const Matrix& b, const CovarianceMap& eta, const SolverConfig& cfg) {
  cfg.validate();
  if (b.dim() != eta.domain_dim())
    throw DimensionError("solve: b has dimension " + std::to_string(b.dim()) + ", eta acts on " +
                         std::to_string(eta.domain_dim()));
  if (!b.is_finite()) throw std::invalid_argument("solve: b is not finite");
  if (eta.positivity() == PositivityClass::Indefinite)
    throw PreconditionError("solve: covariance map must be positive");
  const double gamma = min_eigenvalue(Hermitian::imag_part(b));
  if (!(gamma > 0.0)) throw DomainError("not in upper half-plane");
  const double inv_norm = 1.0 / gamma;
  const std::size_t n = b.dim();

  DysonSolution sol;
  sol.gamma = gamma;
  Matrix w = cfg.initial_point ? *cfg.initial_point : Matrix::scalar(n, Complex(0.0, -1.0));
  if (w.dim() != n) throw DimensionError("solve: initial point has wrong dimension");
  int used = 0;
  std::vector<double>* hist = cfg.record_history ? &sol.residual_history : nullptr;

  if (cfg.continuation && !cfg.initial_point && gamma < 0.25) {
    // Coarse solves at b + i s 1 for s = 1, 1/4, ... > gamma supply the starting point.
    for (double s = 1.0; s > gamma; s *= 0.25) {
      const Matrix bs = b + Matrix::scalar(n, Complex(0.0, s));
      const StageOutcome st = iterate(bs, eta, w, 1e-6 * (gamma + s), cfg.max_iter, used, false, hist);
      if (!st.converged) break;
    }
  }

  const double target = cfg.tol_residual * gamma;
  const StageOutcome fin = iterate(b, eta, w, target, cfg.max_iter, used, cfg.polish, hist);
  sol.iterations = used;
  if (!fin.converged)
    throw NonConvergence("solve: residual " + format_sci(fin.residual) + " above target " +
                             format_sci(target) + " after " + std::to_string(used) + " iterations",
                         fin.residual, used);
  sol.w = std::move(w);
  sol.residual_norm = fin.residual;
  sol.inverse_condition = fin.condition;
  sol.error_bound = certified_error(fin.residual, inv_norm);
  if (!sol.error_bound) sol.warnings.push_back("certification failed: sigma >= 1");
  if (fin.floor_limited) sol.warnings.push_back("residual limited by rounding, above tol_residual * gamma");
  if (sol.inverse_condition > 1e12) sol.warnings.push_back("ill-conditioned iterate");
  return sol;
}

DysonSolution solve_amplified(const Matrix& b, const CovarianceMap& eta, std::size_t k,
                              const SolverConfig& cfg) {
  if (k == 0) throw std::invalid_argument("solve_amplified: k must be positive");
  std::vector<std::string> warnings;
  if (k == 2 && !is_two_positive(eta.positivity()))
    throw PreconditionError("solve_amplified: level 2 requires a 2-positive covariance map");
  if (k > 2 && eta.positivity() != PositivityClass::CompletelyPositive) {
    if (!is_two_positive(eta.positivity()))
      throw PreconditionError("solve_amplified: covariance map is not 2-positive");
    warnings.push_back("level " + std::to_string(k) + " used with a map only declared 2-positive");
  }
  DysonSolution sol = solve(b, eta.amplify(k), cfg);
  sol.warnings.insert(sol.warnings.begin(), warnings.begin(), warnings.end());
  return sol;
}

DerivativeResult frechet_derivative(const Matrix& b, const CovarianceMap& eta, const Matrix& h,
                                    const SolverConfig& cfg) {
  require_same_dim(b, h, "frechet_derivative");
  const double gamma = 1.0 / im_inv_norm(b);
  const double hn = op_norm(h);
  const std::size_t m = b.dim();
  if (hn == 0.0) return {Matrix(m), 0.0, 0};
  const double r = gamma / hn;
  const Matrix big = block2(b, r * h, Matrix(m), b);
  SolverConfig c2 = cfg;
  c2.initial_point.reset();
  const DysonSolution s = solve_amplified(big, eta, 2, c2);
  DerivativeResult out{block(s.w, 0, 1, m) / r, std::nullopt, s.iterations};
  if (s.error_bound) out.error_bound = *s.error_bound / r;
  return out;
}

namespace {

// Row-major vectorization of X -> (b - eta(G)) X - eta(X) G.
LuFactorization linearized_operator(const Matrix& b, const CovarianceMap& eta, const Matrix& g) {
  const std::size_t m = b.dim();
  const Matrix left = b - eta.apply(g);
  Matrix op(m * m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      Matrix e(m);
      e(k, l) = 1.0;
      const Matrix col = left * e - eta.apply(e) * g;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) op(i * m + j, k * m + l) = col(i, j);
    }
  return lu_factor(op);
}

Matrix solved_g(const Matrix& b, const CovarianceMap& eta, const SolverConfig& cfg,
                const std::optional<Matrix>& g) {
  if (g) {
    require_same_dim(b, *g, "derivative");
    return *g;
  }
  return solve(b, eta, cfg).w;
}

}  // namespace

Matrix frechet_derivative_linear(const Matrix& b, const CovarianceMap& eta, const Matrix& h,
                                 const SolverConfig& cfg, const std::optional<Matrix>& g) {
  require_same_dim(b, h, "frechet_derivative_linear");
  const Matrix gv = solved_g(b, eta, cfg, g);
  const std::size_t m = b.dim();
  const LuFactorization f = linearized_operator(b, eta, gv);
  const Matrix rhs = -(h * gv);
  const auto x = lu_solve(f, rhs.data());
  Matrix out(m);
  std::copy(x.begin(), x.end(), out.data().begin());
  if (!out.is_finite()) throw SingularMatrixError("frechet_derivative_linear: singular system");
  return out;
}

Matrix derivative_matrix(const Matrix& b, const CovarianceMap& eta, const SolverConfig& cfg,
                         const std::optional<Matrix>& g) {
  const Matrix gv = solved_g(b, eta, cfg, g);
  const std::size_t m = b.dim();
  const LuFactorization f = linearized_operator(b, eta, gv);
  Matrix d(m * m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      Matrix e(m);
      e(k, l) = 1.0;
      const Matrix rhs = -(e * gv);
      const auto x = lu_solve(f, rhs.data());
      for (std::size_t i = 0; i < m * m; ++i) d(i, k * m + l) = x[i];
    }
  return d;
}

DerivativeResult difference_via_amplification(const Matrix& b0, const Matrix& b1,
                                              const CovarianceMap& eta, const SolverConfig& cfg) {
  require_same_dim(b0, b1, "difference_via_amplification");
  const double g0 = 1.0 / im_inv_norm(b0);
  const double g1 = 1.0 / im_inv_norm(b1);
  const Matrix delta = b1 - b0;
  const double dn = op_norm(delta);
  const std::size_t m = b0.dim();
  if (dn == 0.0) return {Matrix(m), 0.0, 0};
  const double r = std::sqrt(g0 * g1) / dn;
  const Matrix big = block2(b0, r * delta, Matrix(m), b1);
  SolverConfig c2 = cfg;
  c2.initial_point.reset();
  const DysonSolution s = solve_amplified(big, eta, 2, c2);
  DerivativeResult out{block(s.w, 0, 1, m) / r, std::nullopt, s.iterations};
  if (s.error_bound) out.error_bound = *s.error_bound / r;
  return out;
}

}  // namespace mde
