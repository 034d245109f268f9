#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mde/dyson.hpp"
#include "mde/errors.hpp"
#include "mde/random.hpp"

using namespace mde;
using testing::dist;
using testing::semicircle;

namespace {

CovarianceMap random_kraus(std::size_t m, std::size_t rank, CounterRng& rng) {
  std::vector<Matrix> ops;
  for (std::size_t j = 0; j < rank; ++j) ops.push_back(ginibre(m, rng, 1.0 / std::sqrt(double(m * rank))));
  return CovarianceMap::kraus(std::move(ops));
}

Matrix scalar(Complex z) { return Matrix::scalar(1, z); }

}  // namespace

TEST_SUITE("dyson") {
  TEST_CASE("residual") {
    CHECK(dist(residual(Matrix::scalar(2, kI), CovarianceMap::zero(2), Matrix::scalar(2, -kI)), Matrix(2)) == 0.0);
    const Complex w = kI * (1.0 - std::sqrt(5.0)) / 2.0;
    CHECK(std::abs(residual(scalar(kI), CovarianceMap::identity(1), scalar(w))(0, 0)) < 1e-14);
    // Linear growth away from the solution.
    const double r1 = op_norm(residual(scalar(kI), CovarianceMap::identity(1), scalar(w + 1e-4)));
    const double r2 = op_norm(residual(scalar(kI), CovarianceMap::identity(1), scalar(w + 2e-4)));
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(1e-3));
  }

  TEST_CASE("solve: closed forms") {
    CounterRng rng(1);
    const Matrix b = random_half_plane_point(3, 0.7, rng);
    const DysonSolution s0 = solve(b, CovarianceMap::zero(3));
    CHECK(dist(s0.w, inverse(b)) <= 1e-15 * op_norm(inverse(b)));
    CHECK(s0.iterations <= 2);

    const DysonSolution s1 = solve(scalar(kI), CovarianceMap::identity(1));
    CHECK(std::abs(s1.w(0, 0) - Complex(0.0, -0.61803398874989485)) < 1e-12);
    REQUIRE(s1.error_bound.has_value());
    CHECK(*s1.error_bound < 1e-12);

    const Complex z(0.5, 0.01);
    const DysonSolution s2 = solve(scalar(z), CovarianceMap::identity(1));
    CHECK(std::abs(s2.w(0, 0)) <= 1.0 / 0.01);
    CHECK(s2.w(0, 0).imag() < 0.0);
    CHECK(std::abs(s2.w(0, 0) - semicircle(z)) < 1e-9);
  }

  TEST_CASE("solve: range, a-priori bound, uniqueness") {
    CounterRng rng(2);
    for (int i = 0; i < 20; ++i) {
      const std::size_t m = 2 + i % 2;
      const CovarianceMap eta = random_kraus(m, 1 + i % 3, rng);
      const double g = std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
      const Matrix b = random_half_plane_point(m, g, rng);
      const DysonSolution s = solve(b, eta);
      REQUIRE(s.error_bound.has_value());
      CHECK(s.residual_norm <= 1e-12 * s.gamma);
      CHECK(max_eigenvalue(Hermitian::imag_part(s.w)) < 0.0);
      CHECK(op_norm(s.w) <= im_inv_norm(b) + *s.error_bound);
      for (int k = 0; k < 5; ++k) {
        SolverConfig cfg;
        cfg.continuation = false;
        cfg.initial_point = -kI * Matrix::scalar(m, 0.2 + k) + 0.3 * k * Hermitian::real_part(ginibre(m, rng)).matrix();
        const DysonSolution t = solve(b, eta, cfg);
        CHECK(op_norm(t.w - s.w) <= *s.error_bound + *t.error_bound);
      }
    }
  }

  TEST_CASE("solve: configuration and failures") {
    SolverConfig bad;
    bad.initial_point = Matrix::scalar(1, kI);
    CHECK_THROWS_AS(solve(scalar(kI), CovarianceMap::identity(1), bad), std::invalid_argument);
    CHECK_THROWS_AS(solve(scalar(1.0), CovarianceMap::identity(1)), DomainError);
    SolverConfig tight;
    tight.max_iter = 3;
    tight.continuation = false;
    try {
      solve(scalar(Complex(0.1, 1e-3)), CovarianceMap::identity(1), tight);
      FAIL("expected NonConvergence");
    } catch (const NonConvergence& e) {
      CHECK(e.last_residual() > 0.0);
      CHECK(e.iterations() >= 3);
    }
  }

  TEST_CASE("amplified solve respects direct sums and similarities") {
    CounterRng rng(3);
    const CovarianceMap eta = random_kraus(2, 2, rng);
    const Matrix b1 = random_half_plane_point(2, 0.5, rng), b2 = random_half_plane_point(2, 0.8, rng);
    const DysonSolution g1 = solve(b1, eta), g2 = solve(b2, eta);
    const DysonSolution big = solve_amplified(direct_sum(b1, b2), eta, 2);
    CHECK(dist(big.w, direct_sum(g1.w, g2.w)) <= *g1.error_bound + *g2.error_bound + *big.error_bound);

    // S = [[1, s], [0, 1]] (x) 1 acting on block-diag(b1, b1).
    const Matrix bb = direct_sum(b1, b1);
    const Matrix s = kron(Matrix::from_rows({{1.0, 0.3}, {0.0, 1.0}}), Matrix::identity(2));
    const Matrix conj = s * bb * inverse(s);
    const DysonSolution gs = solve_amplified(conj, eta, 2);
    CHECK(dist(gs.w, s * direct_sum(g1.w, g1.w) * inverse(s)) < 1e-10);

    const DysonSolution one = solve_amplified(b1, eta, 1);
    CHECK(dist(one.w, g1.w) == 0.0);
    CHECK_THROWS(solve_amplified(direct_sum(b1, b1), CovarianceMap::transpose_map(2), 2));
  }

  TEST_CASE("Frechet derivative: inversion case and route agreement") {
    CounterRng rng(4);
    const Matrix b = random_half_plane_point(3, 0.6, rng);
    const Matrix h = ginibre(3, rng);
    const Matrix want = -1.0 * inverse(b) * h * inverse(b);
    CHECK(dist(frechet_derivative(b, CovarianceMap::zero(3), h).value, want) < 1e-12 * op_norm(want));
    CHECK(dist(frechet_derivative_linear(b, CovarianceMap::zero(3), h), want) < 1e-12 * op_norm(want));

    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const std::size_t m = 2 + i % 2;
      const CovarianceMap eta = i % 5 == 0 ? CovarianceMap::choi_example() : random_kraus(m, 1 + i % 3, rng);
      const std::size_t d = eta.dim();
      const Matrix bi = random_half_plane_point(d, rng.uniform(0.2, 1.5), rng);
      const Matrix hi = ginibre(d, rng);
      const Matrix a = frechet_derivative(bi, eta, hi).value;
      const Matrix l = frechet_derivative_linear(bi, eta, hi);
      worst = std::max(worst, op_norm(a - l) / op_norm(l));
      // Derivative bound ||DG(b) h|| <= ||Im(b)^{-1}||^2 ||h||.
      const double inv = im_inv_norm(bi);
      CHECK(op_norm(l) <= (1 + 1e-8) * inv * inv * op_norm(hi));
    }
    CHECK(worst <= 1e-9);
  }

  TEST_CASE("Taylor remainder is second order") {
    CounterRng rng(5);
    const CovarianceMap eta = random_kraus(2, 2, rng);
    const Matrix b = random_half_plane_point(2, 0.5, rng);
    const Matrix h = ginibre(2, rng);
    SolverConfig cfg;
    cfg.polish = true;
    const Matrix g = solve(b, eta, cfg).w;
    const Matrix dg = frechet_derivative_linear(b, eta, h, cfg, g);
    auto rem = [&](double t) { return op_norm(solve(b + t * h, eta, cfg).w - g - t * dg); };
    const double r1 = rem(1e-2), r2 = rem(5e-3);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.05));
  }

  TEST_CASE("difference via amplification") {
    const CovarianceMap id = CovarianceMap::identity(1);
    CHECK(op_norm(difference_via_amplification(scalar(kI), scalar(kI), id).value) == 0.0);
    const Complex want = semicircle(2.0 * kI) - semicircle(kI);
    CHECK(std::abs(difference_via_amplification(scalar(kI), scalar(2.0 * kI), id).value(0, 0) - want) < 1e-12);
    CHECK(std::abs(want) <= 1.0 * 0.5 * 1.0);

    CounterRng rng(6);
    const CovarianceMap eta = random_kraus(3, 2, rng);
    const Matrix b0 = random_half_plane_point(3, 0.4, rng), b1 = random_half_plane_point(3, 0.9, rng);
    const DysonSolution s0 = solve(b0, eta), s1 = solve(b1, eta);
    const DerivativeResult d = difference_via_amplification(b0, b1, eta);
    CHECK(dist(d.value, s1.w - s0.w) <= *s0.error_bound + *s1.error_bound + d.error_bound.value_or(0.0) + 1e-13);
    CHECK(op_norm(d.value) <= im_inv_norm(b0) * im_inv_norm(b1) * op_norm(b1 - b0) * (1 + 1e-8));
  }

  TEST_CASE("certified error") {
    CHECK_FALSE(certified_error(1.0, 1.0).has_value());
    CHECK(*certified_error(0.5, 1.0) == doctest::Approx(1.0));
  }
}
