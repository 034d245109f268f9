#include "mde/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace mde {

StateFunctional::StateFunctional(Hermitian density) : density_(std::move(density)) {
  if (density_.dim() == 0) throw std::invalid_argument("state: empty density matrix");
  const double tr = density_.matrix().trace().real();
  if (std::abs(tr - 1.0) > 1e-12) throw std::invalid_argument("state: density matrix must have trace 1");
  if (min_eigenvalue(density_) < -1e-12)
    throw std::invalid_argument("state: density matrix must be positive semidefinite");
}

StateFunctional StateFunctional::normalized_trace(std::size_t dim) {
  std::vector<double> d(dim, 1.0 / static_cast<double>(dim));
  return StateFunctional(Hermitian::diagonal(d));
}

Complex StateFunctional::operator()(const Matrix& b) const {
  require_same_dim(density_.matrix(), b, "state");
  Complex s = 0.0;
  const std::size_t m = b.dim();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) s += density_(i, j) * b(j, i);
  return s;
}

DataPair::DataPair(Hermitian b0_, CovarianceMap eta_, std::optional<StateFunctional> phi_)
    : b0(std::move(b0_)), eta(std::move(eta_)),
      phi(phi_ ? std::move(*phi_) : StateFunctional::normalized_trace(b0.dim())) {
  if (eta.domain_dim() != b0.dim() || phi.dim() != b0.dim())
    throw DimensionError("data pair: b0, eta and phi must share the dimension");
  if (!is_two_positive(eta.positivity()))
    throw PreconditionError("data pair: covariance map must be declared 2-positive");
}

CauchyValue scalar_cauchy_certified(const DataPair& rho, Complex z, const SolverConfig& cfg) {
  if (!(z.imag() > 0.0)) throw DomainError("not in upper half-plane");
  const std::size_t m = rho.dim();
  const Matrix b = Matrix::scalar(m, z) - rho.b0.matrix();
  DysonSolution s = solve(b, rho.eta, cfg);
  return {rho.phi(s.w), s.error_bound, std::move(s.w), s.iterations};
}

Complex scalar_cauchy(const DataPair& rho, Complex z, const SolverConfig& cfg) {
  return scalar_cauchy_certified(rho, z, cfg).value;
}

namespace {

double support_radius(const DataPair& rho, double centre) {
  const Matrix shifted = rho.b0.matrix() - Matrix::scalar(rho.dim(), centre);
  return op_norm(shifted) + 2.0 * std::sqrt(rho.eta.operator_norm());
}

// P(C > x) for a Cauchy(epsilon) variable.
double cauchy_upper_tail(double x, double epsilon) {
  return 0.5 - std::atan(x / epsilon) / std::numbers::pi;
}

}  // namespace

Window default_window(const DataPair& rho, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("default_window: epsilon must be positive");
  const double c = rho.phi(rho.b0.matrix()).real();
  const double r = support_radius(rho, c) + 10.0 * epsilon;
  return {c - r, c + r};
}

std::vector<double> uniform_grid(Window w, std::size_t points) {
  if (points < 2) throw std::invalid_argument("grid: need at least 2 points");
  if (!(w.hi > w.lo)) throw std::invalid_argument("grid: window must satisfy lo < hi");
  std::vector<double> g(points);
  const double h = (w.hi - w.lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = w.lo + h * static_cast<double>(i);
  g.back() = w.hi;
  return g;
}

double trapezoid(const std::vector<double>& grid, const std::vector<double>& values) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    s += 0.5 * (grid[i + 1] - grid[i]) * (values[i] + values[i + 1]);
  return s;
}

SpectralDensity density_of_states(const DataPair& rho, double epsilon, std::optional<Window> window,
                                  std::size_t grid_points, const SolverConfig& cfg) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("density_of_states: epsilon must be positive");
  SpectralDensity sd;
  sd.epsilon = epsilon;
  sd.window = window ? *window : default_window(rho, epsilon);
  sd.grid = uniform_grid(sd.window, grid_points);
  sd.values.resize(grid_points);
  sd.cauchy.resize(grid_points);
  SolverConfig c = cfg;
  std::optional<Matrix> warm = cfg.initial_point;
  for (std::size_t i = 0; i < grid_points; ++i) {
    c.initial_point = warm;
    const CauchyValue v = scalar_cauchy_certified(rho, Complex(sd.grid[i], epsilon), c);
    sd.cauchy[i] = v.value;
    sd.values[i] = -v.value.imag() / std::numbers::pi;
    sd.max_error = std::max(sd.max_error, v.error_bound.value_or(std::numeric_limits<double>::infinity()));
    warm = v.w;
  }
  sd.mass = trapezoid(sd.grid, sd.values);
  const double c0 = rho.phi(rho.b0.matrix()).real();
  const double s = support_radius(rho, c0);
  auto outside = [&](double atom) {
    return cauchy_upper_tail(atom - sd.window.lo, epsilon) + cauchy_upper_tail(sd.window.hi - atom, epsilon);
  };
  sd.tail_mass = std::max(outside(c0 - s), outside(c0 + s));
  return sd;
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size() || atoms.empty())
    throw std::invalid_argument("measure: atoms and weights must be nonempty and of equal length");
  std::vector<std::size_t> order(atoms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
  atoms_.reserve(atoms.size());
  weights_.reserve(atoms.size());
  for (std::size_t k : order) {
    if (!std::isfinite(atoms[k])) throw std::invalid_argument("measure: non-finite atom");
    if (!(weights[k] >= 0.0)) throw std::invalid_argument("measure: negative weight");
    atoms_.push_back(atoms[k]);
    weights_.push_back(weights[k]);
  }
  cdf_.resize(weights_.size());
  double run = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) cdf_[k] = (run += weights_[k]);
  if (std::abs(run - 1.0) > 1e-12) throw std::invalid_argument("measure: weights must sum to 1");
}

DiscreteMeasure DiscreteMeasure::uniform(std::vector<double> atoms) {
  if (atoms.empty()) throw std::invalid_argument("measure: no atoms");
  for (double a : atoms)
    if (!std::isfinite(a)) throw std::invalid_argument("measure: non-finite atom");
  const double w = 1.0 / static_cast<double>(atoms.size());
  std::vector<double> weights(atoms.size(), w);
  std::sort(atoms.begin(), atoms.end());
  // cdf from k / n rather than running sums, so it ends at exactly 1.
  DiscreteMeasure m;
  m.atoms_ = std::move(atoms);
  m.weights_ = std::move(weights);
  m.cdf_.resize(m.weights_.size());
  const double n = static_cast<double>(m.weights_.size());
  for (std::size_t k = 0; k < m.weights_.size(); ++k) m.cdf_[k] = static_cast<double>(k + 1) / n;
  return m;
}

double DiscreteMeasure::cdf(double x) const {
  const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
  if (it == atoms_.begin()) return 0.0;
  return cdf_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
}

double DiscreteMeasure::mean() const {
  double s = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) s += atoms_[k] * weights_[k];
  return s;
}

Complex DiscreteMeasure::cauchy(Complex z) const {
  Complex s = 0.0;
  for (std::size_t k = 0; k < atoms_.size(); ++k) s += weights_[k] / (z - atoms_[k]);
  return s;
}

DiscreteMeasure to_measure(const SpectralDensity& sd) {
  const std::size_t n = sd.grid.size();
  if (n < 2) throw std::invalid_argument("to_measure: need at least 2 grid points");
  std::vector<double> atoms(n - 1), weights(n - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    atoms[i] = 0.5 * (sd.grid[i] + sd.grid[i + 1]);
    weights[i] = std::max(0.0, 0.5 * (sd.grid[i + 1] - sd.grid[i]) * (sd.values[i] + sd.values[i + 1]));
    total += weights[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("to_measure: density has zero mass");
  for (auto& w : weights) w /= total;
  // Absorb the renormalization rounding into the largest weight.
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  auto big = std::max_element(weights.begin(), weights.end());
  *big += 1.0 - sum;
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

namespace {

// For all x: F_a(x) <= F_b(x + e) + e. Both sides are right-continuous step functions,
// so the supremum of the difference sits at an atom of a or at (atom of b) - e.
bool one_sided(const DiscreteMeasure& a, const DiscreteMeasure& b, double e) {
  for (double x : a.atoms())
    if (a.cdf(x) > b.cdf(x + e) + e) return false;
  for (double y : b.atoms())
    if (a.cdf(y - e) > b.cdf(y) + e) return false;
  return true;
}

}  // namespace

bool levy_sandwich_holds(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double e) {
  return one_sided(nu, mu, e) && one_sided(mu, nu, e);
}

double levy_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (levy_sandwich_holds(mu, nu, 0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (levy_sandwich_holds(mu, nu, mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

double kolmogorov_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  double best = 0.0;
  for (double x : mu.atoms()) best = std::max(best, std::abs(mu.cdf(x) - nu.cdf(x)));
  for (double x : nu.atoms()) best = std::max(best, std::abs(mu.cdf(x) - nu.cdf(x)));
  return std::min(best, 1.0);
}

SpectralDensity cauchy_smooth(const DiscreteMeasure& mu, double epsilon, const std::vector<double>& grid) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("cauchy_smooth: epsilon must be positive");
  if (grid.size() < 2) throw std::invalid_argument("cauchy_smooth: need at least 2 grid points");
  SpectralDensity sd;
  sd.epsilon = epsilon;
  sd.grid = grid;
  sd.window = {grid.front(), grid.back()};
  sd.values.resize(grid.size());
  sd.cauchy.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex g = mu.cauchy(Complex(grid[i], epsilon));
    sd.cauchy[i] = g;
    sd.values[i] = -g.imag() / std::numbers::pi;
  }
  sd.mass = trapezoid(sd.grid, sd.values);
  const double lo = mu.atoms().front(), hi = mu.atoms().back();
  auto outside = [&](double atom) {
    return cauchy_upper_tail(atom - sd.window.lo, epsilon) + cauchy_upper_tail(sd.window.hi - atom, epsilon);
  };
  sd.tail_mass = std::max(outside(lo), outside(hi));
  return sd;
}

SpectralDensity cauchy_smooth(const DiscreteMeasure& mu, double epsilon, Window window,
                              std::size_t grid_points) {
  return cauchy_smooth(mu, epsilon, uniform_grid(window, grid_points));
}

}  // namespace mde
