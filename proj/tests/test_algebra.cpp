#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "mde/algebra.hpp"
#include "mde/random.hpp"

using namespace mde;
using testing::dist;

namespace {

// det(x 1 - a) by Gaussian elimination with partial pivoting; real for Hermitian a.
double char_poly(const Hermitian& a, double x) {
  const std::size_t n = a.dim();
  Matrix m = Matrix::scalar(n, x) - a.matrix();
  Complex det = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(m(i, k)) > std::abs(m(p, k))) p = i;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      det = -det;
    }
    det *= m(k, k);
    if (m(k, k) == 0.0) return 0.0;
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex f = m(i, k) / m(k, k);
      for (std::size_t j = k; j < n; ++j) m(i, j) -= f * m(k, j);
    }
  }
  return det.real();
}

// Roots of the characteristic polynomial by sign changes on a fine grid plus bisection.
std::vector<double> char_poly_roots(const Hermitian& a) {
  const double r = frobenius_norm(a.matrix()) + 1.0;
  std::vector<double> roots;
  const int n = 20000;
  double x0 = -r, f0 = char_poly(a, x0);
  for (int i = 1; i <= n; ++i) {
    const double x1 = -r + 2.0 * r * i / n;
    const double f1 = char_poly(a, x1);
    if ((f0 < 0) != (f1 < 0)) {
      double lo = x0, hi = x1, flo = f0;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = char_poly(a, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

}  // namespace

TEST_SUITE("algebra") {
  TEST_CASE("operator norm") {
    CHECK(op_norm(Matrix::identity(3)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(op_norm(Matrix::diagonal({3.0, -4.0})) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(op_norm(Matrix::from_rows({{0.0, 2.0}, {0.0, 0.0}})) == doctest::Approx(2.0).epsilon(1e-14));
    // Hermitian: spectral radius.
    CounterRng rng(3);
    const Hermitian h = gue(6, rng);
    const auto ev = herm_eigenvalues(h);
    CHECK(op_norm(h.matrix()) == doctest::Approx(std::max(std::abs(ev.front()), std::abs(ev.back()))).epsilon(1e-12));
  }

  TEST_CASE("Hermitian parts and structural symmetry") {
    const Matrix a = Matrix::from_rows({{Complex(1, 2), Complex(3, -1)}, {Complex(0, 4), Complex(-2, 1)}});
    const Hermitian re = Hermitian::real_part(a), im = Hermitian::imag_part(a);
    CHECK(dist(re.matrix() + kI * im.matrix(), a) < 1e-15);
    CHECK(re.matrix() == re.matrix().adjoint());
    CHECK(im.matrix() == im.matrix().adjoint());
    const Hermitian u = Hermitian::from_upper(a);
    CHECK(u(1, 0) == std::conj(u(0, 1)));
    CHECK(u(0, 0).imag() == 0.0);
  }

  TEST_CASE("LU inverse and singular input") {
    CounterRng rng(11);
    const Matrix a = ginibre(5, rng);
    const InverseResult r = invert(a);
    CHECK(dist(a * r.inverse, Matrix::identity(5)) < 1e-12);
    CHECK(r.condition >= 1.0);
    CHECK_THROWS_AS(inverse(Matrix(3)), SingularMatrixError);
  }

  TEST_CASE("eigensolver small fixtures") {
    const std::vector<double> d{1.0, 2.0, 3.0};
    const EigenSystem es = herm_eigen(Hermitian::diagonal(d));
    CHECK(es.values == std::vector<double>{1.0, 2.0, 3.0});
    CHECK(dist(es.vectors.adjoint() * es.vectors, Matrix::identity(3)) < 1e-15);
    const auto px = herm_eigenvalues(Hermitian::from_upper(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})));
    CHECK(px[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(px[1] == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("eigensolver against characteristic polynomial roots") {
    CounterRng rng(2024);
    const Hermitian a = gue(5, rng);
    const auto ev = herm_eigenvalues(a);
    const auto roots = char_poly_roots(a);
    REQUIRE(roots.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(std::abs(ev[i] - roots[i]) < 1e-10);
  }

  TEST_CASE("eigensolver reconstruction, orthogonality and unitary invariance") {
    CounterRng rng(7);
    for (std::size_t n : {1u, 2u, 3u, 8u, 40u, 121u}) {
      const Hermitian a = gue(n, rng);
      const EigenSystem es = herm_eigen(a);
      Matrix d(n);
      for (std::size_t i = 0; i < n; ++i) d(i, i) = es.values[i];
      const double na = op_norm(a.matrix());
      CHECK(dist(es.vectors * d * es.vectors.adjoint(), a.matrix()) <= 1e-12 * na);
      CHECK(dist(es.vectors.adjoint() * es.vectors, Matrix::identity(n)) < 1e-12);
      CHECK(std::is_sorted(es.values.begin(), es.values.end()));
      const Matrix u = random_unitary(n, rng);
      const auto ev2 = herm_eigenvalues(Hermitian::real_part(u * a.matrix() * u.adjoint()));
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ev2[i] - es.values[i]) < 1e-10 * std::max(1.0, na));
    }
  }

  TEST_CASE("eigensolver degenerate spectrum") {
    CounterRng rng(8);
    const Matrix u = random_unitary(6, rng);
    const std::vector<double> d{1, 1, 1, -2, -2, 5};
    const Hermitian a = Hermitian::real_part(u * Matrix::diagonal(std::vector<Complex>(d.begin(), d.end())) * u.adjoint());
    const auto ev = herm_eigenvalues(a);
    const std::vector<double> want{-2, -2, 1, 1, 1, 5};
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(ev[i] - want[i]) < 1e-12);
  }

  TEST_CASE("im_inv_norm") {
    CHECK(im_inv_norm(Matrix::scalar(2, kI)) == doctest::Approx(1.0));
    CHECK(im_inv_norm(Matrix::diagonal({kI, 2.0 * kI})) == doctest::Approx(1.0));
    const Matrix b = Matrix::from_rows({{kI, 0.5}, {0.5, kI}}) + Matrix::diagonal({1.0, -1.0});
    CHECK(im_inv_norm(b) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(im_inv_norm(Matrix::identity(2)), DomainError);
    CHECK_THROWS_WITH(im_inv_norm(Matrix::diagonal({kI, -kI})), "not in upper half-plane");
    CounterRng rng(5);
    for (int i = 0; i < 20; ++i) {
      const double g = rng.uniform(0.01, 2.0);
      const Matrix p = random_half_plane_point(4, g, rng);
      CHECK(im_inv_norm(p) <= (1.0 / g) * (1.0 + 1e-12));
      const HalfPlanePoint hp = HalfPlanePoint::certify(p);
      CHECK(hp.gamma == doctest::Approx(g).epsilon(1e-10));
    }
  }

  TEST_CASE("upper half-plane criterion for 2x2 blocks") {
    const Matrix i1 = Matrix::scalar(1, kI);
    CHECK(in_upper_half_plane2(i1, i1, Matrix(1)));
    CHECK(in_upper_half_plane2(i1, i1, Matrix::scalar(1, 1.99)));
    CHECK_FALSE(in_upper_half_plane2(i1, i1, Matrix::scalar(1, 2.0)));
    CHECK(in_upper_half_plane2(Matrix::scalar(3, kI), Matrix::scalar(3, kI), 1.9 * Matrix::identity(3)));
  }

  TEST_CASE("upper half-plane criterion agrees with the block eigenvalue test") {
    CounterRng rng(99);
    int disagreements = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t m = 1 + t % 3;
      const Matrix b1 = random_half_plane_point(m, rng.uniform(0.1, 1.0), rng);
      const Matrix b2 = random_half_plane_point(m, rng.uniform(0.1, 1.0), rng);
      const Matrix w = rng.uniform(0.0, 3.0) * ginibre(m, rng);
      const Matrix big = block2(b1, w, Matrix(m), b2);
      const double lmin = min_eigenvalue(Hermitian::imag_part(big));
      if (std::abs(lmin) < 1e-9) continue;  // too close to the boundary to decide
      if (in_upper_half_plane2(b1, b2, w) != (lmin > 0.0)) ++disagreements;
    }
    CHECK(disagreements == 0);
  }

  TEST_CASE("block helpers") {
    const Matrix a = Matrix::diagonal({1.0, 2.0});
    const Matrix b = Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}});
    const Matrix k = kron(a, b);
    CHECK(k(0, 1) == Complex(1.0));
    CHECK(k(2, 3) == Complex(2.0));
    CHECK(k(0, 3) == Complex(0.0));
    const Matrix big = block2(a, b, Matrix(2), a);
    CHECK(block(big, 0, 1, 2) == b);
    CHECK(direct_sum(a, b) == block2(a, Matrix(2), Matrix(2), b));
  }

  TEST_CASE("norm of a linear map by unitary ascent") {
    // x -> x^T has norm 1; x -> a x b has norm ||a|| ||b||.
    const double t = linear_map_norm_lower_bound([](const Matrix& x) { return x.transpose(); }, 3, 4, 20, 1);
    CHECK(t == doctest::Approx(1.0).epsilon(1e-12));
    CounterRng rng(4);
    const Matrix a = ginibre(3, rng), b = ginibre(3, rng);
    const double s = linear_map_norm_lower_bound([&](const Matrix& x) { return a * x * b; }, 3, 8, 40, 2);
    CHECK(s <= op_norm(a) * op_norm(b) * (1 + 1e-12));
    CHECK(s >= 0.999 * op_norm(a) * op_norm(b));
  }
}
