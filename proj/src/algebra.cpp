#include "mde/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mde/random.hpp"

namespace mde {

Matrix Matrix::identity(std::size_t dim) { return scalar(dim, 1.0); }

Matrix Matrix::scalar(std::size_t dim, Complex value) {
  Matrix a(dim);
  for (std::size_t i = 0; i < dim; ++i) a(i, i) = value;
  return a;
}

Matrix Matrix::diagonal(std::span<const Complex> diag) {
  Matrix a(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) a(i, i) = diag[i];
  return a;
}

Matrix Matrix::diagonal(std::initializer_list<Complex> diag) {
  return diagonal(std::span<const Complex>(diag.begin(), diag.size()));
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<Complex>> rows) {
  Matrix a(rows.size());
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != rows.size()) throw DimensionError("from_rows: matrix must be square");
    std::size_t j = 0;
    for (const auto& v : row) a(i, j++) = v;
    ++i;
  }
  return a;
}

Matrix Matrix::adjoint() const {
  Matrix r(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) r(j, i) = std::conj((*this)(i, j));
  return r;
}

Matrix Matrix::transpose() const {
  Matrix r(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

Complex Matrix::trace() const {
  Complex t = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

bool Matrix::is_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](const Complex& z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* where) {
  if (a.dim() != b.dim())
    throw DimensionError(std::string(where) + ": dimension mismatch (" +
                         std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_dim(*this, other, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_dim(*this, other, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(Complex s) {
  for (auto& z : data_) z *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Complex s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, Complex s) { return a *= s; }
Matrix operator/(Matrix a, Complex s) { return a *= 1.0 / s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  require_same_dim(a, b, "operator*");
  const std::size_t n = a.dim();
  Matrix c(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex(0.0)) continue;
      for (std::size_t j = 0; j < n; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Hermitian Hermitian::from_upper(const Matrix& a) {
  Hermitian h(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    h.m_(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.dim(); ++j) {
      h.m_(i, j) = a(i, j);
      h.m_(j, i) = std::conj(a(i, j));
    }
  }
  return h;
}

Hermitian Hermitian::real_part(const Matrix& a) {
  Hermitian h(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    h.m_(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < a.dim(); ++j) {
      const Complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
      h.m_(i, j) = v;
      h.m_(j, i) = std::conj(v);
    }
  }
  return h;
}

Hermitian Hermitian::imag_part(const Matrix& a) {
  Hermitian h(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) {
    h.m_(i, i) = a(i, i).imag();
    for (std::size_t j = i + 1; j < a.dim(); ++j) {
      const Complex v = (a(i, j) - std::conj(a(j, i))) / Complex(0.0, 2.0);
      h.m_(i, j) = v;
      h.m_(j, i) = std::conj(v);
    }
  }
  return h;
}

Hermitian Hermitian::diagonal(std::span<const double> diag) {
  Hermitian h(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) h.m_(i, i) = diag[i];
  return h;
}

Hermitian Hermitian::identity(std::size_t dim) {
  Hermitian h(dim);
  for (std::size_t i = 0; i < dim; ++i) h.m_(i, i) = 1.0;
  return h;
}

Matrix block(const Matrix& a, std::size_t bi, std::size_t bj, std::size_t size) {
  if ((bi + 1) * size > a.dim() || (bj + 1) * size > a.dim())
    throw DimensionError("block: index out of range");
  Matrix r(size);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) r(i, j) = a(bi * size + i, bj * size + j);
  return r;
}

void set_block(Matrix& a, std::size_t bi, std::size_t bj, const Matrix& value) {
  const std::size_t size = value.dim();
  if ((bi + 1) * size > a.dim() || (bj + 1) * size > a.dim())
    throw DimensionError("set_block: index out of range");
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j) a(bi * size + i, bj * size + j) = value(i, j);
}

Matrix block2(const Matrix& a11, const Matrix& a12, const Matrix& a21, const Matrix& a22) {
  require_same_dim(a11, a12, "block2");
  require_same_dim(a11, a21, "block2");
  require_same_dim(a11, a22, "block2");
  Matrix r(2 * a11.dim());
  set_block(r, 0, 0, a11);
  set_block(r, 0, 1, a12);
  set_block(r, 1, 0, a21);
  set_block(r, 1, 1, a22);
  return r;
}

Matrix direct_sum(const Matrix& a, const Matrix& b) {
  Matrix r(a.dim() + b.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) r(i, j) = a(i, j);
  const std::size_t o = a.dim();
  for (std::size_t i = 0; i < b.dim(); ++i)
    for (std::size_t j = 0; j < b.dim(); ++j) r(o + i, o + j) = b(i, j);
  return r;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  const std::size_t n = a.dim(), m = b.dim();
  Matrix r(n * m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Complex aij = a(i, j);
      if (aij == Complex(0.0)) continue;
      for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l) r(i * m + k, j * m + l) = aij * b(k, l);
    }
  return r;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (const auto& z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

double op_norm(const Matrix& a) {
  if (a.empty()) return 0.0;
  if (a.dim() == 1) return std::abs(a(0, 0));
  const Hermitian gram = Hermitian::from_upper(a.adjoint() * a);
  return std::sqrt(std::max(0.0, max_eigenvalue(gram)));
}

LuFactorization lu_factor(const Matrix& a) {
  const std::size_t n = a.dim();
  LuFactorization f{a, std::vector<std::size_t>(n)};
  Matrix& lu = f.lu;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(lu(k, k));
    for (std::size_t i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (!(best > 0.0) || !std::isfinite(best))
      throw SingularMatrixError("lu_factor: matrix is singular to working precision");
    f.pivots[k] = p;
    if (p != k)
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
    const Complex inv_pivot = 1.0 / lu(k, k);
    for (std::size_t i = k + 1; i < n; ++i) {
      const Complex l = lu(i, k) * inv_pivot;
      lu(i, k) = l;
      if (l == Complex(0.0)) continue;
      for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= l * lu(k, j);
    }
  }
  return f;
}

std::vector<Complex> lu_solve(const LuFactorization& f, std::span<const Complex> rhs) {
  const std::size_t n = f.lu.dim();
  if (rhs.size() != n) throw DimensionError("lu_solve: right-hand side has wrong length");
  std::vector<Complex> x(rhs.begin(), rhs.end());
  for (std::size_t k = 0; k < n; ++k) std::swap(x[k], x[f.pivots[k]]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

namespace {

double one_norm(const Matrix& a) {
  double best = 0.0;
  for (std::size_t j = 0; j < a.dim(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) s += std::abs(a(i, j));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

InverseResult invert(const Matrix& a) {
  const std::size_t n = a.dim();
  if (n == 1) {
    if (a(0, 0) == Complex(0.0)) throw SingularMatrixError("invert: zero scalar");
    Matrix r(1);
    r(0, 0) = 1.0 / a(0, 0);
    return {r, 1.0};
  }
  const LuFactorization f = lu_factor(a);
  Matrix inv(n);
  std::vector<Complex> e(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(e.begin(), e.end(), Complex(0.0));
    e[j] = 1.0;
    const auto col = lu_solve(f, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  if (!inv.is_finite()) throw SingularMatrixError("invert: inverse is not finite");
  return {inv, one_norm(a) * one_norm(inv)};
}

Matrix inverse(const Matrix& a) { return invert(a).inverse; }

Hermitian herm_function(const Hermitian& a, const std::function<double(double)>& f) {
  const EigenSystem es = herm_eigen(a);
  const std::size_t n = a.dim();
  Matrix r(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = f(es.values[k]);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex u = es.vectors(i, k) * fk;
      for (std::size_t j = i; j < n; ++j) r(i, j) += u * std::conj(es.vectors(j, k));
    }
  }
  return Hermitian::from_upper(r);
}

double min_eigenvalue(const Hermitian& a) { return herm_eigenvalues(a).front(); }
double max_eigenvalue(const Hermitian& a) { return herm_eigenvalues(a).back(); }

double im_inv_norm(const Matrix& b) {
  const double lo = min_eigenvalue(Hermitian::imag_part(b));
  if (!(lo > 0.0)) throw DomainError("not in upper half-plane");
  return 1.0 / lo;
}

HalfPlanePoint HalfPlanePoint::certify(const Matrix& b) {
  const double lo = min_eigenvalue(Hermitian::imag_part(b));
  if (!(lo > 0.0)) throw DomainError("not in upper half-plane");
  return {b, lo};
}

bool in_upper_half_plane2(const Matrix& b1, const Matrix& b2, const Matrix& w) {
  require_same_dim(b1, b2, "in_upper_half_plane2");
  require_same_dim(b1, w, "in_upper_half_plane2");
  im_inv_norm(b1);
  im_inv_norm(b2);
  const Hermitian im1 = Hermitian::imag_part(b1);
  const Hermitian im2 = Hermitian::imag_part(b2);
  const Matrix inv1 = herm_function(im1, [](double x) { return 1.0 / x; });
  const Matrix s2 = herm_function(im2, [](double x) { return 1.0 / std::sqrt(x); });
  const Matrix q = s2 * w.adjoint() * inv1 * w * s2;
  const double v = max_eigenvalue(Hermitian::real_part(q));
  return v < 4.0 * (1.0 - 1e-12);
}

namespace {

// Left and right top singular vectors of a.
void top_singular_pair(const Matrix& a, std::vector<Complex>& left, std::vector<Complex>& right) {
  const std::size_t n = a.dim();
  const EigenSystem es = herm_eigen(Hermitian::from_upper(a.adjoint() * a));
  right.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) right[i] = es.vectors(i, n - 1);
  left.assign(n, 0.0);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) left[i] += a(i, j) * right[j];
    s += std::norm(left[i]);
  }
  s = std::sqrt(s);
  if (s > 0.0)
    for (auto& z : left) z /= s;
}

// Unitary factor of the polar decomposition; singular directions are regularized.
Matrix polar_unitary(const Matrix& a) {
  const Hermitian gram = Hermitian::from_upper(a.adjoint() * a);
  const double top = std::max(max_eigenvalue(gram), 1e-300);
  const Matrix s = herm_function(gram, [top](double x) { return 1.0 / std::sqrt(std::max(x, 1e-28 * top)); });
  return a * s;
}

}  // namespace

double linear_map_norm_lower_bound(const std::function<Matrix(const Matrix&)>& map,
                                   std::size_t dim, int restarts, int iterations,
                                   std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Matrix> images;
  images.reserve(dim * dim);
  for (std::size_t k = 0; k < dim; ++k)
    for (std::size_t l = 0; l < dim; ++l) {
      Matrix e(dim);
      e(k, l) = 1.0;
      images.push_back(map(e));
    }
  auto evaluate = [&](const Matrix& x) {
    Matrix y(dim);
    for (std::size_t k = 0; k < dim; ++k)
      for (std::size_t l = 0; l < dim; ++l) {
        const Complex c = x(k, l);
        if (c == Complex(0.0)) continue;
        y += c * images[k * dim + l];
      }
    return y;
  };
  double best = 0.0;
  std::vector<Complex> left, right;
  for (int r = 0; r <= restarts; ++r) {
    Matrix u = r == 0 ? Matrix::identity(dim) : random_unitary(dim, rng);
    for (int it = 0; it <= iterations; ++it) {
      const Matrix y = evaluate(u);
      const double nx = op_norm(u);
      if (nx > 0.0) best = std::max(best, op_norm(y) / nx);
      if (it == iterations) break;
      top_singular_pair(y, left, right);
      // Linear functional x -> left* T(x) right, written as Tr(N^T x).
      Matrix nt(dim);
      for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t l = 0; l < dim; ++l) {
          Complex s = 0.0;
          const Matrix& t = images[k * dim + l];
          for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) s += std::conj(left[i]) * t(i, j) * right[j];
          nt(l, k) = s;
        }
      u = polar_unitary(nt).adjoint();
    }
  }
  return best;
}

}  // namespace mde
