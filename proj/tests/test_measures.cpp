#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "mde/measures.hpp"
#include "mde/random.hpp"

using namespace mde;
using testing::semicircle;

namespace {

DataPair semicircle_pair(double shift = 0.0, double variance = 1.0) {
  return DataPair(Hermitian::diagonal(std::vector<double>{shift}),
                  CovarianceMap::sandwich({Hermitian::diagonal(std::vector<double>{std::sqrt(variance)})}));
}

DiscreteMeasure random_atomic(CounterRng& rng) {
  const std::size_t n = 1 + rng.next_u64() % 6;
  std::vector<double> a, w;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a.push_back(rng.uniform(-2.0, 2.0));
    w.push_back(rng.uniform(0.1, 1.0));
    total += w.back();
  }
  for (auto& x : w) x /= total;
  // Renormalize exactly enough for the 1e-12 check.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) s += w[i];
  w.back() = 1.0 - s;
  return DiscreteMeasure(a, w);
}

}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("state functional") {
    const StateFunctional tr = StateFunctional::normalized_trace(3);
    CHECK(tr(Matrix::identity(3)).real() == doctest::Approx(1.0).epsilon(1e-14));
    CounterRng rng(1);
    const StateFunctional phi(random_density(3, rng));
    CHECK(std::abs(phi(Matrix::identity(3)) - 1.0) < 1e-14);
    for (int i = 0; i < 10; ++i) {
      const Matrix b = ginibre(3, rng);
      CHECK(phi(b.adjoint() * b).real() >= -1e-12);
    }
    CHECK_THROWS(StateFunctional(Hermitian::diagonal(std::vector<double>{0.5, 0.6})));
    CHECK_THROWS(StateFunctional(Hermitian::diagonal(std::vector<double>{1.5, -0.5})));
  }

  TEST_CASE("scalar Cauchy transform") {
    const DataPair delta0(Hermitian(2), CovarianceMap::zero(2));
    const Complex z(0.3, 0.7);
    CHECK(std::abs(scalar_cauchy(delta0, z) - 1.0 / z) < 1e-15);
    CHECK(std::abs(scalar_cauchy(semicircle_pair(), kI) - Complex(0.0, -0.61803398874989485)) < 1e-12);
    CHECK_THROWS_AS(scalar_cauchy(delta0, Complex(1.0, 0.0)), DomainError);
    const CauchyValue cv = scalar_cauchy_certified(semicircle_pair(), Complex(0.2, 0.05));
    REQUIRE(cv.error_bound.has_value());
    CHECK(std::abs(cv.value - semicircle(Complex(0.2, 0.05))) <= *cv.error_bound + 1e-15);
  }

  TEST_CASE("Herglotz range and normalization at infinity") {
    CounterRng rng(2);
    for (int p = 0; p < 5; ++p) {
      const std::size_t m = 2 + p % 2;
      const DataPair rho(gue(m, rng), CovarianceMap::kraus({ginibre(m, rng, 0.5), ginibre(m, rng, 0.5)}),
                         StateFunctional(random_density(m, rng)));
      double prev = 1e300;
      for (double y : {10.0, 100.0, 1000.0}) {
        const Complex g = scalar_cauchy(rho, Complex(0.0, y));
        CHECK(g.imag() < 0.0);
        const double dev = std::abs(Complex(0.0, y) * g - 1.0);
        CHECK(dev < prev);
        prev = dev;
      }
      for (int k = 0; k < 10; ++k) CHECK(scalar_cauchy(rho, Complex(rng.uniform(-4, 4), rng.uniform(0.01, 1))).imag() < 0);
    }
  }

  TEST_CASE("density of states of the semicircle") {
    for (double eps : {0.3, 0.1, 0.03}) {
      const SpectralDensity sd = density_of_states(semicircle_pair(), eps, Window{-3.0, 3.0}, 301);
      double worst = 0.0;
      for (std::size_t i = 0; i < sd.grid.size(); ++i) {
        const double want = -semicircle(Complex(sd.grid[i], eps)).imag() / std::numbers::pi;
        worst = std::max(worst, std::abs(sd.values[i] - want));
        CHECK(sd.values[i] >= -1e-12);
      }
      CHECK(worst < 1e-9);
    }
    // Smoothed density at 0 increases towards 1/pi as eps decreases.
    double prev = 0.0;
    for (double eps : {1.0, 0.3, 0.1, 0.01}) {
      const double v = -semicircle(Complex(0.0, eps)).imag() / std::numbers::pi;
      const SpectralDensity sd = density_of_states(semicircle_pair(), eps, Window{-0.1, 0.1}, 3);
      CHECK(sd.values[1] == doctest::Approx(v).epsilon(1e-9));
      CHECK(v > prev);
      prev = v;
    }
    CHECK(prev < 1.0 / std::numbers::pi);
  }

  TEST_CASE("mass on the default window") {
    const double eps = 1e-2;
    const SpectralDensity sd = density_of_states(semicircle_pair(), eps);
    CHECK(sd.window.lo < -2.0);
    CHECK(sd.window.hi > 2.0);
    CHECK(sd.mass <= 1.0 + 1e-6);
    CHECK(sd.mass >= 1.0 - sd.tail_mass - 1e-3);
    CHECK(sd.tail_mass > 0.0);
    CHECK(sd.tail_mass < 0.05);
  }

  TEST_CASE("discrete measures") {
    const DiscreteMeasure mu({2.0, -1.0, 0.5}, {0.25, 0.5, 0.25});
    CHECK(mu.atoms() == std::vector<double>{-1.0, 0.5, 2.0});
    CHECK(mu.weights() == std::vector<double>{0.5, 0.25, 0.25});
    CHECK(mu.cdf(-1.0) == 0.5);
    CHECK(mu.cdf(-1.0 - 1e-15) == 0.0);
    CHECK(mu.cdf(10.0) == doctest::Approx(1.0));
    CHECK(mu.mean() == doctest::Approx(0.125));
    const Complex z(0.1, 0.2);
    CHECK(std::abs(mu.cauchy(z) - (0.5 / (z + 1.0) + 0.25 / (z - 0.5) + 0.25 / (z - 2.0))) < 1e-15);
    CHECK_THROWS(DiscreteMeasure({0.0, 1.0}, {0.5, 0.6}));
    CHECK_THROWS(DiscreteMeasure({0.0, 1.0}, {1.5, -0.5}));
    CHECK_THROWS(DiscreteMeasure({0.0}, {1.0, 0.0}));
  }

  TEST_CASE("Cauchy smoothing of atomic measures") {
    const double eps = 0.2;
    const SpectralDensity d0 = cauchy_smooth(DiscreteMeasure::dirac(0.0), eps, Window{-5.0, 5.0}, 101);
    for (std::size_t i = 0; i < d0.grid.size(); ++i) {
      const double t = d0.grid[i];
      CHECK(d0.values[i] == doctest::Approx(eps / (std::numbers::pi * (t * t + eps * eps))).epsilon(1e-13));
    }
    const DiscreteMeasure mu({-1.0, 0.4}, {0.3, 0.7});
    const SpectralDensity sd = cauchy_smooth(mu, 0.05, Window{-3.0, 3.0}, 201);
    for (std::size_t i = 0; i < sd.grid.size(); ++i)
      CHECK(sd.values[i] == doctest::Approx(-mu.cauchy(Complex(sd.grid[i], 0.05)).imag() / std::numbers::pi).epsilon(1e-13));
    const SpectralDensity wide = cauchy_smooth(DiscreteMeasure::dirac(0.0), 0.01, Window{-50.0, 50.0}, 200001);
    CHECK(wide.mass == doctest::Approx(1.0).epsilon(1e-3));
  }

  TEST_CASE("quantization to a discrete measure") {
    SpectralDensity flat;
    flat.grid = uniform_grid(Window{0.0, 1.0}, 11);
    flat.values.assign(11, 1.0);
    const DiscreteMeasure q = to_measure(flat);
    REQUIRE(q.size() == 10);
    for (double w : q.weights()) CHECK(w == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(q.atoms().front() == doctest::Approx(0.05));

    SpectralDensity spike = flat;
    spike.values.assign(11, 0.0);
    spike.values[4] = spike.values[5] = 1.0;
    const DiscreteMeasure s = to_measure(spike);
    const auto it = std::max_element(s.weights().begin(), s.weights().end());
    CHECK(*it > 0.49);
    CHECK(s.atoms()[it - s.weights().begin()] == doctest::Approx(0.45));
  }

  TEST_CASE("Levy distance fixtures") {
    const DiscreteMeasure d0 = DiscreteMeasure::dirac(0.0);
    CHECK(levy_distance(d0, d0) == 0.0);
    for (double a : {1e-3, 0.1, 0.37, 0.9, 1.0}) CHECK(std::abs(levy_distance(d0, DiscreteMeasure::dirac(a)) - a) <= 1e-12);
    CHECK(std::abs(levy_distance(d0, DiscreteMeasure::dirac(10.0)) - 1.0) <= 1e-12);
    CHECK(kolmogorov_distance(d0, d0) == 0.0);
    CHECK(kolmogorov_distance(d0, DiscreteMeasure::dirac(0.2)) == 1.0);
    // Mass split: half the mass moved by 0.5 gives L = 0.5 on two atoms (sandwich needs e >= 0.5 or mass 0.5).
    const DiscreteMeasure a({0.0, 1.0}, {0.5, 0.5}), b({0.0, 1.5}, {0.5, 0.5});
    CHECK(std::abs(levy_distance(a, b) - 0.5) <= 1e-12);
    CHECK(levy_sandwich_holds(a, b, 0.5 + 1e-9));
    CHECK_FALSE(levy_sandwich_holds(a, b, 0.4));
  }

  TEST_CASE("Levy distance is a metric below Kolmogorov") {
    CounterRng rng(3);
    for (int i = 0; i < 200; ++i) {
      const DiscreteMeasure x = random_atomic(rng), y = random_atomic(rng), z = random_atomic(rng);
      const double xy = levy_distance(x, y), yx = levy_distance(y, x);
      CHECK(xy == yx);
      CHECK(xy <= levy_distance(x, z) + levy_distance(z, y) + 1e-12);
      CHECK(xy <= kolmogorov_distance(x, y) + 1e-12);
      CHECK(xy >= 0.0);
      CHECK(xy <= 1.0);
    }
  }

  TEST_CASE("helpers") {
    const auto g = uniform_grid(Window{-1.0, 1.0}, 5);
    CHECK(g == std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0});
    CHECK(trapezoid(g, {1.0, 1.0, 1.0, 1.0, 1.0}) == doctest::Approx(2.0));
    const Window w = default_window(semicircle_pair(0.5), 0.1);
    CHECK(w.lo == doctest::Approx(0.5 - 3.0));
    CHECK(w.hi == doctest::Approx(0.5 + 3.0));
  }
}
