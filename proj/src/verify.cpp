#include "mde/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "mde/evolution.hpp"
#include "mde/random.hpp"

namespace mde {

namespace constants {

double c_k(int k) {
  if (k < 1) throw std::invalid_argument("c_k: k must be positive");
  const double kk = k;
  return (2.0 * kk + 1.0) * std::pow(1.0 / (kk * kk * std::numbers::pi), kk / (2.0 * kk + 1.0));
}

double c1() { return c_k(1); }
double c2() { return c_k(2); }

}  // namespace constants

void BoundReport::add(double bound, double observed, const SlackBudget& s, int instance) {
  double margin = bound - observed;
  if (std::isnan(margin)) margin = -std::numeric_limits<double>::infinity();
  ++instances;
  min_margin = std::min(min_margin, margin);
  if (instances == 1 || margin + s.total() < worst_margin + slack.total()) {
    worst_margin = margin;
    slack = s;
    worst_bound = bound;
    worst_observed = observed;
    worst_instance = instance;
  }
}

void BoundReport::merge(const BoundReport& o) {
  if (name.empty()) name = o.name;
  skipped += o.skipped;
  includes_fixture = includes_fixture || o.includes_fixture;
  notes.insert(notes.end(), o.notes.begin(), o.notes.end());
  if (o.instances == 0) return;
  min_margin = std::min(min_margin, o.min_margin);
  if (instances == 0 || o.worst_margin + o.slack.total() < worst_margin + slack.total()) {
    worst_margin = o.worst_margin;
    slack = o.slack;
    worst_bound = o.worst_bound;
    worst_observed = o.worst_observed;
    worst_instance = o.worst_instance;
  }
  instances += o.instances;
}

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Floating-point allowance for bounds that are attained (e.g. eta = 0, scalar b).
constexpr double kRounding = 1e-8;

double err(const DysonSolution& s) { return s.error_bound.value_or(kInf); }

BoundReport named(const std::string& name) {
  BoundReport r;
  r.name = name;
  return r;
}

// h -> D vec(h) for an m^2 x m^2 matrix in row-major vectorization.
std::function<Matrix(const Matrix&)> as_map(const Matrix& d, std::size_t m) {
  return [&d, m](const Matrix& x) {
    Matrix y(m);
    const std::size_t n = m * m;
    for (std::size_t i = 0; i < n; ++i) {
      Complex s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += d(i, j) * x.data()[j];
      y.data()[i] = s;
    }
    return y;
  };
}

double map_norm_lower(const Matrix& d, std::size_t m, std::uint64_t seed) {
  return linear_map_norm_lower_bound(as_map(d, m), m, 8, 30, seed);
}

double trace_norm(const Matrix& c) {
  double s = 0.0;
  for (double v : herm_eigenvalues(Hermitian::from_upper(c.adjoint() * c))) s += std::sqrt(std::max(0.0, v));
  return s;
}

Matrix unit(std::size_t m, std::size_t k, std::size_t l) {
  Matrix e(m);
  e(k, l) = 1.0;
  return e;
}

bool same_matrix(const Matrix& a, const Matrix& b) { return a.dim() == b.dim() && a == b; }

// Largest deviation of the cumulative trapezoid sums on the grid and on every other point.
double cumulative_quadrature_error(const SpectralDensity& sd) {
  const auto& x = sd.grid;
  const auto& v = sd.values;
  double fine = 0.0, coarse = 0.0, worst = 0.0;
  for (std::size_t i = 0; i + 2 < x.size(); i += 2) {
    fine += 0.5 * (x[i + 1] - x[i]) * (v[i] + v[i + 1]) + 0.5 * (x[i + 2] - x[i + 1]) * (v[i + 1] + v[i + 2]);
    coarse += 0.5 * (x[i + 2] - x[i]) * (v[i] + v[i + 2]);
    worst = std::max(worst, std::abs(fine - coarse));
  }
  return worst;
}

struct SmoothedLevy {
  double levy = 0.0;
  SlackBudget slack;
};

// L between the quantized eps-smoothed densities of states on a common window. Atoms sit at
// cell midpoints, so each quantized measure is within (h / 2, tail + quadrature + solver) of
// its smoothed measure in the Levy sense.
SmoothedLevy smoothed_levy(const DataPair& r0, const DataPair& r1, double eps, std::size_t k,
                           const SolverConfig& cfg) {
  const Window w0 = default_window(r0, eps), w1 = default_window(r1, eps);
  // 40 eps beyond the default windows keeps the Cauchy tails near 1 / (50 pi) per side.
  const Window w{std::min(w0.lo, w1.lo) - 40.0 * eps, std::max(w0.hi, w1.hi) + 40.0 * eps};
  const SpectralDensity s0 = density_of_states(r0, eps, w, k, cfg);
  const SpectralDensity s1 = density_of_states(r1, eps, w, k, cfg);
  SmoothedLevy out;
  out.levy = levy_distance(to_measure(s0), to_measure(s1));
  const double h = (w.hi - w.lo) / static_cast<double>(k - 1);
  out.slack.quantization = h + cumulative_quadrature_error(s0) + cumulative_quadrature_error(s1) +
                           std::abs(1.0 - s0.mass) + std::abs(1.0 - s1.mass);
  out.slack.tail = s0.tail_mass + s1.tail_mass;
  out.slack.solver = (s0.max_error + s1.max_error) * (w.hi - w.lo) / kPi;
  return out;
}

BoundReport levy_holder(const std::string& name, const DataPair& r0, const DataPair& r1, double bound,
                        const HarnessOptions& opt) {
  if (opt.eps_grid.empty()) throw std::invalid_argument(name + ": empty epsilon grid");
  BoundReport rep = named(name);
  double best_obs = 0.0;
  SlackBudget best_slack;
  bool first = true;
  for (double eps : opt.eps_grid) {
    const SmoothedLevy sl = smoothed_levy(r0, r1, eps, opt.grid_points, opt.solver);
    // Keep the epsilon with the strongest evidence against the bound.
    if (first || sl.levy - sl.slack.total() > best_obs - best_slack.total()) {
      best_obs = sl.levy;
      best_slack = sl.slack;
      first = false;
    }
  }
  rep.add(bound, best_obs, best_slack);
  return rep;
}

// Exact Cauchy-smoothed CDF of an atomic measure.
double smoothed_cdf(const DiscreteMeasure& mu, double x, double eps) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) s += mu.weights()[j] * (0.5 + std::atan((x - mu.atoms()[j]) / eps) / kPi);
  return s;
}

double smoothed_density(const DiscreteMeasure& mu, double x, double eps) {
  double s = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    const double d = x - mu.atoms()[j];
    s += mu.weights()[j] * eps / (kPi * (d * d + eps * eps));
  }
  return s;
}

struct SampleGrid {
  double lo, hi, step;
  std::size_t points;
};

SampleGrid sample_grid(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps, double margin,
                       double target_step) {
  const double lo = std::min(mu.atoms().front(), nu.atoms().front()) - margin;
  const double hi = std::max(mu.atoms().back(), nu.atoms().back()) + margin;
  const std::size_t cap = 200000;
  std::size_t n = static_cast<std::size_t>(std::ceil((hi - lo) / target_step)) + 1;
  n = std::clamp<std::size_t>(n, 3, cap);
  (void)eps;
  return {lo, hi, (hi - lo) / static_cast<double>(n - 1), n};
}

// (1/pi) int |Im G_mu - Im G_nu| = int |p_mu - p_nu| from the exact smoothed CDFs between the
// sign changes of p_mu - p_nu. Missed sign changes can only lower the value.
double smoothed_l1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
  const SampleGrid g = sample_grid(mu, nu, eps, 50.0 * eps, eps / 16.0);
  auto f = [&](double x) { return smoothed_density(mu, x, eps) - smoothed_density(nu, x, eps); };
  auto d = [&](double x) { return smoothed_cdf(mu, x, eps) - smoothed_cdf(nu, x, eps); };
  double total = 0.0, prev_d = 0.0;  // D(-inf) = 0
  double x0 = g.lo, f0 = f(x0);
  for (std::size_t i = 1; i < g.points; ++i) {
    const double x1 = g.lo + g.step * static_cast<double>(i);
    const double f1 = f(x1);
    if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
      double a = x0, b = x1, fa = f0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if ((fm < 0.0) == (fa < 0.0)) {
          a = mid;
          fa = fm;
        } else {
          b = mid;
        }
      }
      const double dr = d(0.5 * (a + b));
      total += std::abs(dr - prev_d);
      prev_d = dr;
    }
    x0 = x1;
    f0 = f1;
  }
  return total + std::abs(prev_d);  // D(+inf) = 0
}

struct ContinuousLevy {
  double levy;
  SlackBudget slack;
};

// Levy distance of the exact smoothed CDFs, with the sandwich tested on a sample grid. The
// result is a lower estimate; the slack covers the variation between samples and the tails.
ContinuousLevy smoothed_levy_exact(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double eps) {
  const double margin = std::max(1.0, 100.0 * eps);
  const SampleGrid g = sample_grid(mu, nu, eps, margin, eps / 250.0);
  std::vector<double> fm(g.points), fn(g.points);
  for (std::size_t i = 0; i < g.points; ++i) {
    const double x = g.lo + g.step * static_cast<double>(i);
    fm[i] = smoothed_cdf(mu, x, eps);
    fn[i] = smoothed_cdf(nu, x, eps);
  }
  // Linear interpolation inside the grid; outside it the exact CDF.
  auto interp = [&](const std::vector<double>& f, const DiscreteMeasure& m, double x) {
    const double t = (x - g.lo) / g.step;
    if (t < 0.0 || t >= static_cast<double>(g.points - 1)) return smoothed_cdf(m, x, eps);
    const auto i = static_cast<std::size_t>(t);
    const double u = t - static_cast<double>(i);
    return (1.0 - u) * f[i] + u * f[i + 1];
  };
  auto holds = [&](double e) {
    for (std::size_t i = 0; i < g.points; ++i) {
      const double x = g.lo + g.step * static_cast<double>(i);
      if (fn[i] > interp(fm, mu, x + e) + e) return false;
      if (fm[i] > interp(fn, nu, x + e) + e) return false;
    }
    return true;
  };
  double lo = 0.0, hi = 1.0;
  if (holds(0.0)) hi = 0.0;
  for (int it = 0; it < 40 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid)) hi = mid;
    else lo = mid;
  }
  ContinuousLevy out{hi, {}};
  const double max_density = 1.0 / (kPi * eps);
  out.slack.quantization = 2.0 * g.step * max_density + g.step * g.step * max_density / eps + 1e-12;
  out.slack.tail = 2.0 * eps / (kPi * margin);
  return out;
}

}  // namespace

BoundReport check_levy_holder_b0(const CovarianceMap& eta, const Hermitian& b00, const Hermitian& b01,
                                 const StateFunctional& phi, const HarnessOptions& opt) {
  const DataPair r0(b00, eta, phi), r1(b01, eta, phi);
  const double bound = constants::c1() * std::cbrt(op_norm(b01.matrix() - b00.matrix()));
  return levy_holder("levy_holder_b0", r0, r1, bound, opt);
}

BoundReport check_levy_holder_eta(const Hermitian& b0, const CovarianceMap& eta0, const CovarianceMap& eta1,
                                  const StateFunctional& phi, const HarnessOptions& opt) {
  const DataPair r0(b0, eta0, phi), r1(b0, eta1, phi);
  const double dn = norm_bounds(CovarianceMap::difference(eta1, eta0)).lower;
  const double bound = constants::c2() * std::pow(dn, 0.2);
  return levy_holder("levy_holder_eta", r0, r1, bound, opt);
}

BoundReport check_integral_bounds(const DataPair& rho0, const DataPair& rho1, double epsilon,
                                  const HarnessOptions& opt) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("check_integral_bounds: epsilon must be positive");
  if (rho0.dim() != rho1.dim()) throw DimensionError("check_integral_bounds: dimension mismatch");
  if (!same_matrix(rho0.phi.density().matrix(), rho1.phi.density().matrix()))
    throw PreconditionError("check_integral_bounds: the pairs must share the state");
  const bool same_b0 = same_matrix(rho0.b0.matrix(), rho1.b0.matrix());
  const bool same_eta = same_matrix(rho0.eta.choi_matrix(), rho1.eta.choi_matrix());
  if (!same_b0 && !same_eta)
    throw PreconditionError("check_integral_bounds: the pairs must share b0 or eta");
  const bool vary_b0 = !same_b0;
  BoundReport rep = named(vary_b0 ? "integral_bound_b0" : "integral_bound_eta");
  const double bound =
      vary_b0 ? op_norm(rho1.b0.matrix() - rho0.b0.matrix()) / epsilon
              : norm_bounds(CovarianceMap::difference(rho1.eta, rho0.eta)).lower / (epsilon * epsilon);

  // Core: common window. Tails: geometric steps out to |t| = W, then the moment bound.
  const Window w0 = default_window(rho0, epsilon), w1 = default_window(rho1, epsilon);
  const Window w{std::min(w0.lo, w1.lo), std::max(w0.hi, w1.hi)};
  const SpectralDensity s0 = density_of_states(rho0, epsilon, w, opt.grid_points, opt.solver);
  const SpectralDensity s1 = density_of_states(rho1, epsilon, w, opt.grid_points, opt.solver);
  const double r = std::max({std::abs(w.lo), std::abs(w.hi), 1.0});
  const double big_w = 100.0 * r;
  const double h = (w.hi - w.lo) / static_cast<double>(opt.grid_points - 1);

  std::vector<double> offsets;
  for (double d = h; d < big_w - std::min(std::abs(w.lo), std::abs(w.hi)); d *= 1.15) offsets.push_back(d);

  std::vector<double> ts(s0.grid);
  std::vector<double> vals(s0.grid.size());
  for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = std::abs(s1.cauchy[i] - s0.cauchy[i]);
  double max_err = s0.max_error + s1.max_error;
  auto tail_side = [&](double edge, double sign, const Matrix& warm0, const Matrix& warm1) {
    std::vector<double> t, v;
    SolverConfig c0 = opt.solver, c1 = opt.solver;
    c0.initial_point = warm0;
    c1.initial_point = warm1;
    std::vector<double> pts;
    for (double d : offsets)
      if (std::abs(edge + sign * d) < big_w) pts.push_back(edge + sign * d);
    pts.push_back(sign * big_w);
    for (double x : pts) {
      const CauchyValue a = scalar_cauchy_certified(rho0, Complex(x, epsilon), c0);
      const CauchyValue b = scalar_cauchy_certified(rho1, Complex(x, epsilon), c1);
      c0.initial_point = a.w;
      c1.initial_point = b.w;
      max_err = std::max(max_err, a.error_bound.value_or(kInf) + b.error_bound.value_or(kInf));
      t.push_back(x);
      v.push_back(std::abs(b.value - a.value));
    }
    return std::make_pair(t, v);
  };
  const std::size_t m = rho0.dim();
  auto warm = [&](const DataPair& rho, double x) {
    return solve(Matrix::scalar(m, Complex(x, epsilon)) - rho.b0.matrix(), rho.eta, opt.solver).w;
  };
  auto [tr, vr] = tail_side(w.hi, 1.0, warm(rho0, w.hi), warm(rho1, w.hi));
  auto [tl, vl] = tail_side(w.lo, -1.0, warm(rho0, w.lo), warm(rho1, w.lo));
  std::vector<double> t_all, v_all;
  for (std::size_t i = tl.size(); i-- > 0;) {
    t_all.push_back(tl[i]);
    v_all.push_back(vl[i]);
  }
  t_all.insert(t_all.end(), ts.begin(), ts.end());
  v_all.insert(v_all.end(), vals.begin(), vals.end());
  t_all.insert(t_all.end(), tr.begin(), tr.end());
  v_all.insert(v_all.end(), vr.begin(), vr.end());

  const double fine = trapezoid(t_all, v_all) / kPi;
  std::vector<double> tc, vc;
  for (std::size_t i = 0; i < t_all.size(); i += 2) {
    tc.push_back(t_all[i]);
    vc.push_back(v_all[i]);
  }
  if ((t_all.size() - 1) % 2 != 0) {
    tc.push_back(t_all.back());
    vc.push_back(v_all.back());
  }
  const double coarse = trapezoid(tc, vc) / kPi;

  const double dm1 = std::abs((rho1.phi(rho1.b0.matrix()) - rho0.phi(rho0.b0.matrix())).real());
  SlackBudget s;
  s.quantization = std::abs(fine - coarse);
  s.tail = (2.0 / kPi) * (dm1 / big_w + 2.0 * r * r / (big_w * (big_w - r)));
  s.solver = max_err * 2.0 * big_w / kPi;
  rep.add(bound, fine, s);
  return rep;
}

BoundReport check_levy_from_cauchy(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw std::invalid_argument("check_levy_from_cauchy: empty epsilon grid");
  BoundReport rep = named("levy_from_cauchy");
  const double l = levy_distance(mu, nu);
  double worst_margin = kInf, worst_bound = 0.0, best_rhs = kInf, best_eps = 0.0;
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("check_levy_from_cauchy: epsilon must be positive");
    const double rhs = 2.0 * std::sqrt(eps / kPi) + smoothed_l1(mu, nu, eps);
    if (rhs - l < worst_margin) {
      worst_margin = rhs - l;
      worst_bound = rhs;
    }
    if (rhs < best_rhs) {
      best_rhs = rhs;
      best_eps = eps;
    }
  }
  SlackBudget s;
  s.quantization = 1e-12;  // bisection tolerance of the Levy distance
  rep.add(worst_bound, l, s);
  rep.notes.push_back("smallest right-hand side " + std::to_string(best_rhs) + " at eps = " +
                      std::to_string(best_eps));
  return rep;
}

BoundReport check_smoothing_inequality(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                       const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw std::invalid_argument("check_smoothing_inequality: empty epsilon grid");
  BoundReport rep = named("smoothing_inequality");
  const double l = levy_distance(mu, nu);
  BoundReport per_eps = named("smoothing_inequality");
  for (double eps : eps_grid) {
    if (!(eps > 0.0)) throw std::invalid_argument("check_smoothing_inequality: epsilon must be positive");
    const double delta = std::sqrt(eps / kPi);
    const double tails = 1.0 - 2.0 * std::atan(delta / eps) / kPi;
    const ContinuousLevy cl = smoothed_levy_exact(mu, nu, eps);
    SlackBudget s = cl.slack;
    s.quantization += 1e-12;
    per_eps.add(cl.levy + std::max(2.0 * delta, tails), l, s);
  }
  // One instance per pair of measures: keep the critical epsilon.
  rep.add(per_eps.worst_bound, per_eps.worst_observed, per_eps.slack);
  return rep;
}

BoundReport check_state_derivative_bound(const Matrix& b, const CovarianceMap& eta, const StateFunctional& phi,
                                         int trials, std::uint64_t seed, const SolverConfig& cfg) {
  if (!is_two_positive(eta.positivity()))
    throw PreconditionError("check_state_derivative_bound: covariance map must be 2-positive");
  if (phi.dim() != b.dim()) throw DimensionError("check_state_derivative_bound: state dimension mismatch");
  BoundReport rep = named("state_derivative");
  const std::size_t m = b.dim();
  const DysonSolution s = solve(b, eta, cfg);
  const Matrix d = derivative_matrix(b, eta, cfg, s.w);
  const Matrix& rho = phi.density().matrix();
  // c_kl = phi(DG(b) E_kl); the supremum over the unit ball is the trace norm of c.
  Matrix c(m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      Complex v = 0.0;
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) v += rho(j, i) * d(i * m + j, k * m + l);
      c(k, l) = v;
    }
  double observed = trace_norm(c);
  CounterRng rng(seed);
  const auto dg = as_map(d, m);
  for (int t = 0; t < trials; ++t) {
    Matrix h = (t % 2 == 0) ? random_unitary(m, rng) : ginibre(m, rng);
    h = h / op_norm(h);
    observed = std::max(observed, std::abs(phi(dg(h))));
  }
  const double inv = im_inv_norm(b);
  const double bound = -phi(s.w).imag() * inv;
  SlackBudget sl;
  sl.solver = kRounding * bound + err(s) * inv + 4.0 * err(s) * inv;
  rep.add(bound, observed, sl);
  return rep;
}

BoundReport check_derivative_norm(const Matrix& b, const CovarianceMap& eta, std::uint64_t seed,
                                  const SolverConfig& cfg) {
  BoundReport rep = named("derivative_norm");
  const DysonSolution s = solve(b, eta, cfg);
  const Matrix d = derivative_matrix(b, eta, cfg, s.w);
  const double inv = im_inv_norm(b);
  const double bound = inv * inv;
  SlackBudget sl;
  sl.solver = kRounding * bound + 4.0 * err(s) * inv;
  rep.add(bound, map_norm_lower(d, b.dim(), seed), sl);
  return rep;
}

BoundReport check_lipschitz(const Matrix& b0, const Matrix& b1, const CovarianceMap& eta, const SolverConfig& cfg) {
  require_same_dim(b0, b1, "check_lipschitz");
  BoundReport rep = named("lipschitz");
  const DysonSolution s0 = solve(b0, eta, cfg), s1 = solve(b1, eta, cfg);
  const double bound = im_inv_norm(b0) * im_inv_norm(b1) * op_norm(b1 - b0);
  SlackBudget sl;
  sl.solver = kRounding * bound + err(s0) + err(s1);
  rep.add(bound, op_norm(s1.w - s0.w), sl);
  return rep;
}

BoundReport check_derivative_lipschitz(const Matrix& b0, const Matrix& b1, const CovarianceMap& eta,
                                       std::uint64_t seed, const SolverConfig& cfg) {
  require_same_dim(b0, b1, "check_derivative_lipschitz");
  BoundReport rep = named("derivative_lipschitz");
  const DysonSolution s0 = solve(b0, eta, cfg), s1 = solve(b1, eta, cfg);
  const Matrix d0 = derivative_matrix(b0, eta, cfg, s0.w);
  const Matrix d1 = derivative_matrix(b1, eta, cfg, s1.w);
  const double gamma = std::min(s0.gamma, s1.gamma);
  const double bound = constants::kDerivativeLipschitz * op_norm(b1 - b0) / (gamma * gamma * gamma);
  SlackBudget sl;
  sl.solver = kRounding * bound + 4.0 * (err(s0) + err(s1)) / gamma;
  rep.add(bound, map_norm_lower(d1 - d0, b0.dim(), seed), sl);
  return rep;
}

BoundReport check_approximate_solution(const Matrix& b, const CovarianceMap& eta, const Matrix& w,
                                       const SolverConfig& cfg) {
  require_same_dim(b, w, "check_approximate_solution");
  if (!(max_eigenvalue(Hermitian::imag_part(w)) < 0.0))
    throw PreconditionError("check_approximate_solution: w must lie in the lower half-plane");
  BoundReport rep = named("approximate_solution");
  const double inv = im_inv_norm(b);
  const double res = op_norm(residual(b, eta, w));
  const double sigma = res * inv;
  if (!(sigma < 1.0)) throw PreconditionError("check_approximate_solution: need ||Delta(w)|| ||Im(b)^{-1}|| < 1");
  const DysonSolution s = solve(b, eta, cfg);
  const double bound = inv * inv * res / (1.0 - sigma);
  SlackBudget sl;
  sl.solver = kRounding * bound + err(s);
  rep.add(bound, op_norm(w - s.w), sl);
  return rep;
}

SubordinationChecks check_subordination(const HalfPlanePoint& b0, const Matrix& b, const CovarianceMap& eta0,
                                        const CovarianceMap& eta1, std::uint64_t seed, const SolverConfig& cfg,
                                        double sigma_prime, double sigma) {
  const double gamma = b0.gamma;
  const NormBounds dn = norm_bounds(CovarianceMap::difference(eta1, eta0), seed);
  if (dn.upper > (1.0 - sigma_prime) * (sigma - sigma_prime) * gamma * gamma)
    throw PreconditionError("check_subordination: ||eta1 - eta0|| too large for the disc");
  if (op_norm(b - b0.matrix) > sigma_prime * gamma)
    throw PreconditionError("check_subordination: b outside the disc of radius sigma' gamma");
  SubordinationChecks out{named("subordination_deviation"), named("subordination_derivative")};

  const SubordinationResult r = subordinate(b0, b, eta0, eta1, cfg, {sigma_prime, sigma});
  {
    const double bound = dn.lower / ((1.0 - sigma_prime) * gamma);
    SlackBudget sl;
    sl.solver = kRounding * bound + r.consistency_budget;
    out.deviation.add(bound, r.deviation, sl);
  }

  // D omega(b) - id from central differences on the basis E_kl at steps d and d / 2.
  const std::size_t m = b.dim();
  const double d = 1e-4 * gamma;
  Matrix fd(m * m), fd_half(m * m);
  double spread = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      const Matrix e = unit(m, k, l);
      const Matrix a = subordination_derivative_fd(b, e, eta0, eta1, d, cfg) - e;
      const Matrix a2 = subordination_derivative_fd(b, e, eta0, eta1, 0.5 * d, cfg) - e;
      spread += op_norm(a - a2);
      for (std::size_t i = 0; i < m * m; ++i) {
        fd(i, k * m + l) = a.data()[i];
        fd_half(i, k * m + l) = a2.data()[i];
      }
    }
  const double bound = dn.lower / (sigma_prime * (1.0 - sigma_prime) * gamma * gamma);
  SlackBudget sl;
  sl.quantization = spread;
  sl.solver = kRounding * bound;
  out.derivative.add(bound, map_norm_lower(fd_half, m, seed), sl);
  return out;
}

LocalComparisonChecks check_local_comparison(const HalfPlanePoint& b, const CovarianceMap& eta0,
                                             const CovarianceMap& eta1, std::uint64_t seed,
                                             const SolverConfig& cfg, double sigma0) {
  const LocalComparison lc = local_comparison(b, eta0, eta1, cfg, sigma0, seed);
  LocalComparisonChecks out{named("local_comparison_g"), named("local_comparison_dg")};
  SlackBudget sg;
  sg.solver = kRounding * lc.gap_g_bound + lc.solver_slack;
  out.gap_g.add(lc.gap_g_bound, lc.gap_g, sg);
  SlackBudget sd;
  sd.solver = kRounding * lc.gap_dg_bound + 4.0 * lc.solver_slack / lc.gamma;
  out.gap_dg.add(lc.gap_dg_bound, lc.gap_dg, sd);
  return out;
}

// Seeded families.

namespace {

struct Family {
  bool fixture = false;
  std::size_t m = 2;
  CovarianceMap eta;
  CounterRng rng{0};
};

// Ginibre Kraus map of rank 1..3 with E eta(1) = scale 1.
CovarianceMap random_kraus(std::size_t m, CounterRng& rng, double scale = 1.0) {
  const std::size_t rank = 1 + rng.next_u64() % 3;
  std::vector<Matrix> ops;
  const double s = std::sqrt(scale / static_cast<double>(m * rank));
  for (std::size_t j = 0; j < rank; ++j) ops.push_back(ginibre(m, rng, s));
  return CovarianceMap::kraus(std::move(ops));
}

// CP map with ||kappa|| = 1 exactly.
CovarianceMap unit_cp(std::size_t m, CounterRng& rng) {
  const CovarianceMap k = random_kraus(m, rng);
  return CovarianceMap::combination({1.0 / k.operator_norm()}, {k});
}

Family family(std::uint64_t seed, int i) {
  Family f;
  f.rng = CounterRng(seed).split(static_cast<std::uint64_t>(i));
  if (i % 10 == 0) {
    f.fixture = true;
    f.m = 3;
    f.eta = CovarianceMap::combination({0.2}, {CovarianceMap::choi_example()});
  } else {
    f.eta = random_kraus(2, f.rng);
  }
  return f;
}

double log_uniform(CounterRng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

Matrix random_direction(std::size_t m, CounterRng& rng) {
  const Matrix g = ginibre(m, rng);
  return g / op_norm(g);
}

Hermitian random_hermitian_direction(std::size_t m, CounterRng& rng) {
  const Hermitian g = gue(m, rng);
  const double n = op_norm(g.matrix());
  return Hermitian::real_part(g.matrix() / n);
}

// eta1 = (1 - s) eta0 + s kappa with kappa CP; 2-positive whenever eta0 is.
CovarianceMap convex_perturbation(const CovarianceMap& eta0, const CovarianceMap& kappa, double s) {
  return CovarianceMap::combination({1.0 - s, s}, {eta0, kappa});
}

// Largest s for which the upper norm estimate of s (kappa - eta0) stays below `budget`.
double admissible_step(const CovarianceMap& eta0, const CovarianceMap& kappa, double budget) {
  const double full = norm_bounds(CovarianceMap::difference(kappa, eta0)).upper;
  return full > 0.0 ? std::min(1.0, budget / full) : 1.0;
}

using InstanceFn = std::function<std::vector<BoundReport>(std::uint64_t seed, int i)>;

std::vector<std::vector<BoundReport>> run_instances(const InstanceFn& fn, const SuiteOptions& opt) {
  const int n = opt.instances;
  std::vector<std::vector<BoundReport>> out(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        out[static_cast<std::size_t>(i)] = fn(opt.seed, i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min(opt.threads, n));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void fold(std::vector<BoundReport>& acc, const std::vector<std::vector<BoundReport>>& per_instance) {
  for (std::size_t i = 0; i < per_instance.size(); ++i)
    for (BoundReport r : per_instance[i]) {
      if (r.worst_instance < 0) r.worst_instance = static_cast<int>(i);
      auto it = std::find_if(acc.begin(), acc.end(), [&](const BoundReport& a) { return a.name == r.name; });
      if (it == acc.end()) acc.push_back(r);
      else it->merge(r);
    }
}

std::vector<BoundReport> mark(std::vector<BoundReport> reps, bool fixture) {
  for (auto& r : reps) r.includes_fixture = fixture;
  return reps;
}

std::vector<BoundReport> holder_instance(std::uint64_t seed, int i, const HarnessOptions& h) {
  Family f = family(seed, i);
  const std::size_t m = f.m;
  const StateFunctional phi(random_density(m, f.rng));
  const Hermitian b00 = gue(m, f.rng);
  const double t = log_uniform(f.rng, 1e-3, 1.0);
  const Hermitian b01 = Hermitian::real_part(b00.matrix() + t * random_hermitian_direction(m, f.rng).matrix());
  BoundReport r0 = check_levy_holder_b0(f.eta, b00, b01, phi, h);

  CovarianceMap eta1;
  if (f.fixture || i % 2 == 0) {
    eta1 = convex_perturbation(f.eta, unit_cp(m, f.rng), log_uniform(f.rng, 1e-3, 1.0));
  } else {
    eta1 = random_kraus(m, f.rng);
  }
  BoundReport r1 = check_levy_holder_eta(b00, f.eta, eta1, phi, h);
  return mark({r0, r1}, f.fixture);
}

std::vector<BoundReport> lemma_instance(std::uint64_t seed, int i, const HarnessOptions& h) {
  Family f = family(seed, i);
  const std::size_t m = f.m;
  const SolverConfig& cfg = h.solver;
  std::vector<BoundReport> out;
  const std::uint64_t sub = f.rng.next_u64();

  const double gamma = log_uniform(f.rng, 0.1, 2.0);
  const Matrix b = random_half_plane_point(m, gamma, f.rng);
  const StateFunctional phi(random_density(m, f.rng));
  out.push_back(check_derivative_norm(b, f.eta, sub, cfg));
  out.push_back(check_state_derivative_bound(b, f.eta, phi, 8, sub, cfg));

  // Second point at distance 10^{-3..0} gamma.
  const double dist = gamma * log_uniform(f.rng, 1e-3, 0.9);
  const Matrix b1 = b + dist * random_direction(m, f.rng);
  out.push_back(check_lipschitz(b, b1, f.eta, cfg));
  out.push_back(check_derivative_lipschitz(b, b1, f.eta, sub, cfg));

  // Perturbed solution: shrink until it is admissible.
  {
    const Matrix g = solve(b, f.eta, cfg).w;
    const Matrix dir = random_direction(m, f.rng);
    double size = op_norm(g) * log_uniform(f.rng, 1e-4, 0.3);
    BoundReport r = named("approximate_solution");
    for (int k = 0; k < 40; ++k, size *= 0.5) {
      try {
        r = check_approximate_solution(b, f.eta, g + size * dir, cfg);
        break;
      } catch (const PreconditionError&) {
      }
    }
    if (r.instances == 0) r.skipped = 1;
    out.push_back(r);
  }

  // Perturbed covariance inside the admissible region around b0 = b.
  const HalfPlanePoint b0 = HalfPlanePoint::certify(b);
  const CovarianceMap kappa = unit_cp(m, f.rng);
  {
    const double sp = 0.25, sg = 0.5;
    const double budget = (1.0 - sp) * (sg - sp) * b0.gamma * b0.gamma;
    const double s = admissible_step(f.eta, kappa, budget) * f.rng.uniform(0.05, 0.999);
    const CovarianceMap eta1 = convex_perturbation(f.eta, kappa, s);
    const Matrix bb = b + sp * b0.gamma * f.rng.uniform(0.0, 0.999) * random_direction(m, f.rng);
    const SubordinationChecks sc = check_subordination(b0, bb, f.eta, eta1, sub, cfg, sp, sg);
    out.push_back(sc.deviation);
    out.push_back(sc.derivative);
  }
  {
    const double sigma0 = 0.125;
    const double budget = sigma0 * b0.gamma * b0.gamma;
    const double s = admissible_step(f.eta, kappa, budget) * f.rng.uniform(0.05, 0.999);
    const CovarianceMap eta1 = convex_perturbation(f.eta, kappa, s);
    const LocalComparisonChecks lc = check_local_comparison(b0, f.eta, eta1, sub, cfg, sigma0);
    out.push_back(lc.gap_g);
    out.push_back(lc.gap_dg);
  }
  return mark(std::move(out), f.fixture);
}

DiscreteMeasure random_atomic(CounterRng& rng) {
  const std::size_t n = 1 + rng.next_u64() % 8;
  const double scale = log_uniform(rng, 0.05, 3.0);
  std::vector<double> atoms(n), weights(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    atoms[j] = scale * rng.uniform(-1.0, 1.0);
    weights[j] = -std::log(rng.uniform());
    total += weights[j];
  }
  double run = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) run += (weights[j] /= total);
  weights[n - 1] = 1.0 - run;
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

std::vector<BoundReport> levy_instance(std::uint64_t seed, int i, const HarnessOptions& h) {
  Family f = family(seed, i);
  const std::size_t m = f.m;
  std::vector<BoundReport> out;
  const std::vector<double> sweep{0.01, 0.03, 0.1, 0.3, 1.0};

  DiscreteMeasure mu, nu;
  const StateFunctional phi(random_density(m, f.rng));
  const Hermitian b00 = gue(m, f.rng);
  const Hermitian b01 =
      Hermitian::real_part(b00.matrix() + log_uniform(f.rng, 1e-2, 1.0) * random_hermitian_direction(m, f.rng).matrix());
  if (f.fixture) {
    // Quantized densities of states of the non-CP map: atomic measures with many atoms.
    const DataPair r0(b00, f.eta, phi), r1(b01, f.eta, phi);
    mu = to_measure(density_of_states(r0, 0.1, std::nullopt, 101, h.solver));
    nu = to_measure(density_of_states(r1, 0.1, std::nullopt, 101, h.solver));
  } else {
    mu = random_atomic(f.rng);
    nu = random_atomic(f.rng);
  }
  out.push_back(check_levy_from_cauchy(mu, nu, sweep));
  out.push_back(check_smoothing_inequality(mu, nu, sweep));

  const double eps = std::vector<double>{0.1, 0.3, 1.0}[static_cast<std::size_t>(i) % 3];
  HarnessOptions ho = h;
  out.push_back(check_integral_bounds(DataPair(b00, f.eta, phi), DataPair(b01, f.eta, phi), eps, ho));
  CovarianceMap eta1 = f.fixture || i % 2 == 0
                           ? convex_perturbation(f.eta, unit_cp(m, f.rng), log_uniform(f.rng, 1e-3, 1.0))
                           : random_kraus(m, f.rng);
  out.push_back(check_integral_bounds(DataPair(b00, f.eta, phi), DataPair(b00, eta1, phi), eps, ho));
  return mark(std::move(out), f.fixture);
}

}  // namespace

std::vector<BoundReport> run_suite(const std::string& suite, const SuiteOptions& opt) {
  if (opt.instances < 1) throw std::invalid_argument("run_suite: need at least one instance");
  const bool all = suite == "all";
  if (!all && suite != "holder" && suite != "lemmas" && suite != "levy")
    throw std::invalid_argument("run_suite: unknown suite '" + suite + "'");
  std::vector<BoundReport> reports;
  const HarnessOptions& h = opt.harness;
  if (all || suite == "lemmas")
    fold(reports, run_instances([&](std::uint64_t s, int i) { return lemma_instance(s, i, h); }, opt));
  if (all || suite == "levy")
    fold(reports, run_instances([&](std::uint64_t s, int i) { return levy_instance(s, i, h); }, opt));
  if (all || suite == "holder")
    fold(reports, run_instances([&](std::uint64_t s, int i) { return holder_instance(s, i, h); }, opt));
  return reports;
}

}  // namespace mde
