#pragma once

// Scalar Cauchy transforms of data pairs, densities of states by Stieltjes inversion at
// height epsilon, discrete measures and the Levy and Kolmogorov distances.

#include <optional>
#include <utility>
#include <vector>

#include "mde/algebra.hpp"
#include "mde/covariance.hpp"
#include "mde/dyson.hpp"

namespace mde {

/// State phi(b) = Tr(rho b) for a density matrix rho.
class StateFunctional {
 public:
  StateFunctional() = default;
  /// Validates rho >= 0 (eigenvalues >= -1e-12) and Tr(rho) = 1 within 1e-12.
  explicit StateFunctional(Hermitian density);
  static StateFunctional normalized_trace(std::size_t dim);

  std::size_t dim() const noexcept { return density_.dim(); }
  const Hermitian& density() const noexcept { return density_; }
  Complex operator()(const Matrix& b) const;

 private:
  Hermitian density_;
};

struct DataPair {
  Hermitian b0;
  CovarianceMap eta;
  StateFunctional phi;

  DataPair(Hermitian b0, CovarianceMap eta, std::optional<StateFunctional> phi = std::nullopt);
  std::size_t dim() const noexcept { return b0.dim(); }
};

struct CauchyValue {
  Complex value;
  /// |phi(w) - phi(G)| <= ||w - G|| for a state phi, so the solver bound carries over.
  std::optional<double> error_bound;
  Matrix w;  // operator-valued solution at z 1 - b0
  int iterations = 0;
};

/// phi(G_eta(z 1 - b0)) together with its certified error.
CauchyValue scalar_cauchy_certified(const DataPair& rho, Complex z, const SolverConfig& cfg = {});
Complex scalar_cauchy(const DataPair& rho, Complex z, const SolverConfig& cfg = {});

struct Window {
  double lo;
  double hi;
};

/// Centre c = Re phi(b0), radius ||b0 - c 1|| + 2 sqrt(||eta(1)||) + 10 epsilon.
Window default_window(const DataPair& rho, double epsilon);

struct SpectralDensity {
  double epsilon = 0.0;
  std::vector<double> grid;
  std::vector<double> values;          // -(1/pi) Im G(t + i epsilon)
  std::vector<Complex> cauchy;         // G(t + i epsilon)
  Window window{0.0, 0.0};
  double mass = 0.0;                   // trapezoid integral of values
  /// Upper estimate of the smoothed mass outside the window, from the Cauchy tails of a
  /// measure supported at distance >= d from both edges: (1/pi)(atan(eps/d_lo) + atan(eps/d_hi)).
  double tail_mass = 0.0;
  double max_error = 0.0;  // largest certified |G - G_computed| over the grid
};

SpectralDensity density_of_states(const DataPair& rho, double epsilon,
                                  std::optional<Window> window = std::nullopt,
                                  std::size_t grid_points = 2001, const SolverConfig& cfg = {});

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  /// Sorts atoms; weights must be nonnegative and sum to 1 within 1e-12.
  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights);
  static DiscreteMeasure uniform(std::vector<double> atoms);
  static DiscreteMeasure dirac(double a) { return DiscreteMeasure({a}, {1.0}); }

  const std::vector<double>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  const std::vector<double>& cdf_values() const noexcept { return cdf_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  /// F(x) = mu((-inf, x]).
  double cdf(double x) const;
  double mean() const;
  /// Cauchy transform sum_j w_j / (z - a_j).
  Complex cauchy(Complex z) const;

 private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

/// Atoms at cell midpoints with trapezoid cell masses, renormalized to 1.
DiscreteMeasure to_measure(const SpectralDensity& sd);

/// Levy distance by bisection on epsilon in [0, 1] (absolute tolerance 1e-12, at most 60
/// steps). The sandwich test is evaluated at every breakpoint of both CDFs.
double levy_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
/// Whether F_mu(x - e) - e <= F_nu(x) <= F_mu(x + e) + e holds for all x.
bool levy_sandwich_holds(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double e);
double kolmogorov_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// mu * Cauchy(epsilon) on a grid.
SpectralDensity cauchy_smooth(const DiscreteMeasure& mu, double epsilon, const std::vector<double>& grid);
SpectralDensity cauchy_smooth(const DiscreteMeasure& mu, double epsilon, Window window,
                              std::size_t grid_points);

std::vector<double> uniform_grid(Window w, std::size_t points);
double trapezoid(const std::vector<double>& grid, const std::vector<double>& values);

}  // namespace mde
