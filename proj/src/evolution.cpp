#include "mde/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mde {

Matrix psi(const CovarianceMap& eta, const Matrix& w) {
  if (w.dim() != eta.domain_dim()) throw DimensionError("psi: dimension mismatch");
  return inverse(w) + eta.apply(w);
}

SubordinationResult subordinate(const HalfPlanePoint& b0, const Matrix& b, const CovarianceMap& eta0,
                                const CovarianceMap& eta1, const SolverConfig& cfg,
                                const SubordinationConfig& sc) {
  if (!(0.0 < sc.sigma_prime && sc.sigma_prime < sc.sigma && sc.sigma < 1.0))
    throw std::invalid_argument("subordinate: need 0 < sigma' < sigma < 1");
  require_same_dim(b0.matrix, b, "subordinate");
  SubordinationResult r;
  const double gamma = b0.gamma;
  const double dn = norm_bounds(CovarianceMap::difference(eta1, eta0)).upper;
  r.deviation_bound = dn / ((1.0 - sc.sigma_prime) * gamma);
  const double reach = op_norm(b - b0.matrix) * im_inv_norm(b0.matrix);
  if (reach > sc.sigma_prime) {
    r.in_domain = false;
    r.warnings.push_back("b lies outside the closed disc D(b0, sigma')");
  }
  if (dn > (1.0 - sc.sigma_prime) * (sc.sigma - sc.sigma_prime) * gamma * gamma) {
    r.in_domain = false;
    r.warnings.push_back("||eta1 - eta0|| exceeds (1 - sigma')(sigma - sigma') gamma^2");
  }
  const DysonSolution s1 = solve(b, eta1, cfg);
  r.omega = psi(eta0, s1.w);
  r.deviation = op_norm(r.omega - b);
  const double e1 = s1.error_bound.value_or(std::numeric_limits<double>::infinity());
  try {
    const double inv_om = im_inv_norm(r.omega);
    const DysonSolution s0 = solve(r.omega, eta0, cfg);
    r.consistency = op_norm(s0.w - s1.w);
    // omega moves by at most ||DPsi|| e1 <= (||w^{-1}||^2 + ||eta0||) e1 under the error of w.
    const double winv = op_norm(inverse(s1.w));
    const double dpsi = winv * winv + eta0.operator_norm();
    r.consistency_budget = s0.error_bound.value_or(std::numeric_limits<double>::infinity()) + e1 +
                           inv_om * inv_om * dpsi * e1;
  } catch (const DomainError&) {
    r.consistency = std::numeric_limits<double>::quiet_NaN();
    r.consistency_budget = std::numeric_limits<double>::infinity();
    r.warnings.push_back("omega is not in the upper half-plane");
  }
  return r;
}

Matrix subordination_derivative_fd(const Matrix& b, const Matrix& h,
                                   const CovarianceMap& eta0, const CovarianceMap& eta1, double d,
                                   const SolverConfig& cfg) {
  if (!(d > 0.0)) throw std::invalid_argument("subordination_derivative_fd: step must be positive");
  SolverConfig c = cfg;
  c.polish = true;
  const Matrix plus = psi(eta0, solve(b + d * h, eta1, c).w);
  const Matrix minus = psi(eta0, solve(b - d * h, eta1, c).w);
  return (plus - minus) / (2.0 * d);
}

double local_comparison_constant(double sigma0, double c) {
  if (!(sigma0 > 0.0 && sigma0 < 1.0)) throw std::invalid_argument("local_comparison_constant: sigma0 in (0, 1)");
  const double upper = 1.0 - std::sqrt(sigma0);
  auto f = [&](double sp) {
    const double s = sp + sigma0 / (1.0 - sp);
    if (!(s < 1.0) || !(sp > 0.0)) return std::numeric_limits<double>::infinity();
    return (1.0 - s + c * sp) / (sp * (1.0 - sp) * std::pow(1.0 - s, 3));
  };
  // Dense scan, then golden-section refinement around the best sample.
  const int n = 4000;
  int best = 1;
  double best_v = std::numeric_limits<double>::infinity();
  for (int i = 1; i < n; ++i) {
    const double v = f(upper * i / n);
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double a = upper * (best - 1) / n, b = upper * (best + 1) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double x1 = b - g * (b - a), x2 = a + g * (b - a);
    if (f(x1) < f(x2)) b = x2;
    else a = x1;
  }
  return std::min(best_v, f(0.5 * (a + b)));
}

LocalComparison local_comparison(const HalfPlanePoint& b, const CovarianceMap& eta0,
                                 const CovarianceMap& eta1, const SolverConfig& cfg, double sigma0,
                                 std::uint64_t seed) {
  LocalComparison lc;
  lc.gamma = b.gamma;
  lc.sigma0 = sigma0;
  lc.delta_eta = norm_bounds(CovarianceMap::difference(eta1, eta0), seed);
  const double g2 = b.gamma * b.gamma;
  if (lc.delta_eta.upper > sigma0 * g2)
    throw PreconditionError("local_comparison: ||eta1 - eta0|| (<= " + std::to_string(lc.delta_eta.upper) +
                            ") must not exceed sigma0 gamma^2 = " + std::to_string(sigma0 * g2));
  const DysonSolution s0 = solve(b.matrix, eta0, cfg);
  const DysonSolution s1 = solve(b.matrix, eta1, cfg);
  lc.gap_g = op_norm(s1.w - s0.w);
  lc.solver_slack = s0.error_bound.value_or(std::numeric_limits<double>::infinity()) +
                    s1.error_bound.value_or(std::numeric_limits<double>::infinity());
  lc.gap_g_bound = lc.delta_eta.lower / ((1.0 - sigma0) * g2 * b.gamma);
  const Matrix d0 = derivative_matrix(b.matrix, eta0, cfg, s0.w);
  const Matrix d1 = derivative_matrix(b.matrix, eta1, cfg, s1.w);
  const Matrix diff = d1 - d0;
  const std::size_t m = b.matrix.dim();
  lc.gap_dg = linear_map_norm_lower_bound(
      [&](const Matrix& x) {
        Matrix y(m);
        for (std::size_t i = 0; i < m * m; ++i) {
          Complex s = 0.0;
          for (std::size_t j = 0; j < m * m; ++j) s += diff(i, j) * x.data()[j];
          y.data()[i] = s;
        }
        return y;
      },
      m, 6, 20, seed);
  lc.gap_dg_bound = local_comparison_constant(sigma0) * lc.delta_eta.lower / (g2 * g2);
  return lc;
}

Matrix burgers_rhs(const CovariancePath& path, double t, const Matrix& b, const SolverConfig& cfg) {
  const CovariancePath::Point p = path(t);
  const DysonSolution s = solve(b, p.eta, cfg);
  const Matrix h = p.eta_dot.apply(s.w);
  return -frechet_derivative(b, p.eta, h, cfg).value;
}

BurgersReport burgers_sweep(const CovariancePath& path, const std::vector<Matrix>& b_grid,
                            const std::vector<double>& t_grid, const SolverConfig& cfg,
                            std::optional<double> delta) {
  BurgersReport rep;
  rep.delta = delta ? *delta : 1e-5 * std::max(1.0, path.t_end);
  if (!(rep.delta > 0.0)) throw std::invalid_argument("burgers_sweep: delta must be positive");
  SolverConfig c = cfg;
  c.polish = true;
  for (const double t : t_grid) {
    if (t - rep.delta < path.t_start || t + rep.delta > path.t_end)
      throw std::invalid_argument("burgers_sweep: t +- delta must stay inside the path interval");
    const CovariancePath::Point p = path(t);
    const auto plus = path(t + rep.delta).eta, minus = path(t - rep.delta).eta;
    const auto plus2 = path(t + 0.5 * rep.delta).eta, minus2 = path(t - 0.5 * rep.delta).eta;
    for (const Matrix& b : b_grid) {
      BurgersSample s;
      s.t = t;
      s.b = b;
      SolverConfig cw = c;
      const DysonSolution st = solve(b, p.eta, c);
      s.g = st.w;
      s.g_dot = -frechet_derivative(b, p.eta, p.eta_dot.apply(st.w), c).value;
      cw.initial_point = st.w;
      const Matrix fd = (solve(b, plus, cw).w - solve(b, minus, cw).w) / (2.0 * rep.delta);
      const Matrix fd2 = (solve(b, plus2, cw).w - solve(b, minus2, cw).w) / rep.delta;
      s.fd_check = op_norm(s.g_dot - fd);
      s.fd_check_half = op_norm(s.g_dot - fd2);
      rep.max_fd_check = std::max(rep.max_fd_check, s.fd_check);
      rep.max_fd_check_half = std::max(rep.max_fd_check_half, s.fd_check_half);
      rep.samples.push_back(std::move(s));
    }
  }
  rep.halving_ratio = rep.max_fd_check_half > 0.0 ? rep.max_fd_check / rep.max_fd_check_half
                                                  : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace mde
