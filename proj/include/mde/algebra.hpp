#pragma once

// Dense complex matrices over M_m(C): arithmetic, Hermitian parts, LU inverses,
// operator norms, a Hermitian eigensolver and upper half-plane geometry.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include "mde/errors.hpp"

namespace mde {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

/// Square m x m complex matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

  static Matrix identity(std::size_t dim);
  static Matrix scalar(std::size_t dim, Complex value);
  static Matrix diagonal(std::span<const Complex> diag);
  static Matrix diagonal(std::initializer_list<Complex> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<Complex>> rows);

  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return dim_ == 0; }

  Complex& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * dim_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * dim_ + j];
  }

  std::span<Complex> data() noexcept { return data_; }
  std::span<const Complex> data() const noexcept { return data_; }

  Matrix adjoint() const;
  Matrix transpose() const;
  Complex trace() const;
  bool is_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(Complex s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<Complex> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(Complex s, Matrix a);
Matrix operator*(Matrix a, Complex s);
Matrix operator/(Matrix a, Complex s);

void require_same_dim(const Matrix& a, const Matrix& b, const char* where);

/// Matrix with exact conjugate symmetry; every constructor enforces it structurally.
class Hermitian {
 public:
  Hermitian() = default;
  explicit Hermitian(std::size_t dim) : m_(dim) {}

  /// Mirrors the upper triangle; the diagonal keeps its real part.
  static Hermitian from_upper(const Matrix& a);
  /// Re(a) = (a + a*) / 2.
  static Hermitian real_part(const Matrix& a);
  /// Im(a) = (a - a*) / (2i).
  static Hermitian imag_part(const Matrix& a);
  static Hermitian diagonal(std::span<const double> diag);
  static Hermitian identity(std::size_t dim);

  std::size_t dim() const noexcept { return m_.dim(); }
  const Matrix& matrix() const noexcept { return m_; }
  operator const Matrix&() const noexcept { return m_; }  // NOLINT(google-explicit-constructor)
  Complex operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }

  friend bool operator==(const Hermitian&, const Hermitian&) = default;

 private:
  Matrix m_;
};

// Block structure. A matrix in M_k(M_m(C)) is stored as a km x km matrix whose
// (i, j) block of size m holds the (i, j) entry.
Matrix block(const Matrix& a, std::size_t bi, std::size_t bj, std::size_t size);
void set_block(Matrix& a, std::size_t bi, std::size_t bj, const Matrix& value);
Matrix block2(const Matrix& a11, const Matrix& a12, const Matrix& a21, const Matrix& a22);
Matrix direct_sum(const Matrix& a, const Matrix& b);
/// (a ⊗ b)_{(i,k),(j,l)} = a_ij b_kl, row index i * dim(b) + k.
Matrix kron(const Matrix& a, const Matrix& b);

double frobenius_norm(const Matrix& a);
/// Largest singular value.
double op_norm(const Matrix& a);

struct LuFactorization {
  Matrix lu;
  std::vector<std::size_t> pivots;
};

/// Partial-pivoting LU; throws SingularMatrixError on an exactly zero or non-finite pivot.
LuFactorization lu_factor(const Matrix& a);
std::vector<Complex> lu_solve(const LuFactorization& f, std::span<const Complex> rhs);

struct InverseResult {
  Matrix inverse;
  /// ||a||_1 ||a^{-1}||_1
  double condition;
};

InverseResult invert(const Matrix& a);
Matrix inverse(const Matrix& a);

// Hermitian eigensolver: Householder reduction to real tridiagonal form followed by
// implicit-shift QL. Throws NumericFailure if the sweep cap (64 m) is exceeded.
struct EigenSystem {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j belongs to values[j]
};

EigenSystem herm_eigen(const Hermitian& a);
std::vector<double> herm_eigenvalues(const Hermitian& a);
/// f(a) = U diag(f(λ)) U*.
Hermitian herm_function(const Hermitian& a, const std::function<double(double)>& f);

double min_eigenvalue(const Hermitian& a);
double max_eigenvalue(const Hermitian& a);

/// ||Im(b)^{-1}||; throws DomainError when Im(b) is not positive definite.
double im_inv_norm(const Matrix& b);

/// Point of the closed half-plane {Im(b) >= gamma 1}, gamma the smallest eigenvalue of Im(b).
struct HalfPlanePoint {
  Matrix matrix;
  double gamma;

  static HalfPlanePoint certify(const Matrix& b);
};

/// Whether [[b1, w], [0, b2]] lies in the upper half-plane of M_2(M_m(C)), decided by
/// ||Im(b2)^{-1/2} w* Im(b1)^{-1} w Im(b2)^{-1/2}|| < 4 (strict, 1e-12 relative slack).
bool in_upper_half_plane2(const Matrix& b1, const Matrix& b2, const Matrix& w);

/// Sampled lower bound of sup_{||x|| <= 1} ||T(x)|| for a linear map on M_m(C). The supremum
/// is attained at a unitary, so the search runs an ascent over unitaries from random starts.
double linear_map_norm_lower_bound(const std::function<Matrix(const Matrix&)>& map,
                                   std::size_t dim, int restarts, int iterations,
                                   std::uint64_t seed);

}  // namespace mde
