#pragma once

// Linear maps eta: M_m(C) -> M_m(C) used as covariances, their amplifications to
// M_k(M_m(C)) and positivity diagnostics.
//
// Choi convention: eta(b)_ij = sum_{k,l} C[(i,k),(j,l)] b_kl with row index i * m + k and
// column index j * m + l. For a Kraus term b -> a b a*, C = vec(a) vec(a)* with vec the
// row-major flattening. C is a tensor-factor swap of sum E_kl (x) eta(E_kl), so it is PSD
// exactly when eta is completely positive.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mde/algebra.hpp"

namespace mde {

enum class PositivityClass { CompletelyPositive, TwoPositive, PositiveOnly, Indefinite };

std::string to_string(PositivityClass c);
PositivityClass positivity_from_string(const std::string& s);
/// Whether maps of class c are 2-positive (CP or TwoPositive).
bool is_two_positive(PositivityClass c);

class CovarianceMap {
 public:
  enum class Kind { Kraus, Sandwich, Choi };

  CovarianceMap() = default;

  /// b -> sum_j a_j b a_j*; completely positive.
  static CovarianceMap kraus(std::vector<Matrix> ops);
  /// b -> sum_j b_j b b_j with b_j Hermitian; completely positive.
  static CovarianceMap sandwich(std::vector<Hermitian> ops);
  /// Map given by its Choi matrix with a declared positivity class (trusted input).
  static CovarianceMap choi(Matrix c, PositivityClass declared);
  static CovarianceMap zero(std::size_t dim);
  static CovarianceMap identity(std::size_t dim);
  /// b -> 2 Tr(b) 1 - b on M_3(C): 2-positive but not completely positive.
  static CovarianceMap choi_example();
  /// b -> b^T: positive, not 2-positive.
  static CovarianceMap transpose_map(std::size_t dim);

  /// sum_j coef_j maps_j. Nonnegative combinations of Kraus/sandwich maps stay in Kraus
  /// form; otherwise the result is a Choi map whose class is the weakest input class, or
  /// Indefinite when some coefficient is negative.
  static CovarianceMap combination(const std::vector<double>& coefs,
                                   const std::vector<CovarianceMap>& maps);
  /// (1 - t) e0 + t e1 for t in [0, 1].
  static CovarianceMap affine(const CovarianceMap& e0, const CovarianceMap& e1, double t);
  /// e1 - e0 (Indefinite).
  static CovarianceMap difference(const CovarianceMap& e1, const CovarianceMap& e0);

  Kind kind() const noexcept { return kind_; }
  /// Base dimension m.
  std::size_t dim() const noexcept { return dim_; }
  /// Amplification level k; the map acts on M_{k m}(C).
  std::size_t level() const noexcept { return level_; }
  std::size_t domain_dim() const noexcept { return dim_ * level_; }
  PositivityClass positivity() const noexcept { return positivity_; }
  const std::vector<Matrix>& operators() const noexcept { return ops_; }

  /// Blockwise application at the amplification level.
  Matrix apply(const Matrix& b) const;
  Matrix operator()(const Matrix& b) const { return apply(b); }
  CovarianceMap amplify(std::size_t k) const;
  /// Choi matrix of the base (level 1) map.
  Matrix choi_matrix() const;

  /// ||eta(1)||, which equals ||eta|| for positive maps. Throws PreconditionError for
  /// Indefinite maps; use norm_bounds instead.
  double operator_norm() const;

 private:
  Matrix apply_base(const Matrix& b) const;

  Kind kind_ = Kind::Choi;
  std::size_t dim_ = 0;
  std::size_t level_ = 1;
  PositivityClass positivity_ = PositivityClass::CompletelyPositive;
  std::vector<Matrix> ops_;  // Kraus or sandwich operators, or the single Choi matrix
};

struct NormBounds {
  double lower;
  double upper;
  bool exact() const { return lower == upper; }
};

/// Bounds on sup_{||b|| <= 1} ||eta(b)|| for an arbitrary map. Exact (= ||eta(1)||) when
/// +C or -C is PSD. Otherwise the lower bound is a unitary ascent search and the upper bound
/// ||eta_+(1)|| + ||eta_-(1)|| from the Jordan split of a Hermitian Choi matrix, or
/// sum_kl ||eta(E_kl)|| when C is not Hermitian.
NormBounds norm_bounds(const CovarianceMap& eta, std::uint64_t seed = 1);

struct PsdCheck {
  bool ok;
  double min_eigenvalue;  // witness
};

/// Choi matrix PSD up to an eigenvalue slack of -1e-10 * max(1, ||C||).
PsdCheck choi_psd_check(const CovarianceMap& eta);

struct PositivityTest {
  bool pass;
  int trials;
  /// Most negative (min eigenvalue of eta^(2)(x)) / ||x|| seen.
  double worst_ratio;
  std::optional<Matrix> counterexample;
};

/// Falsifier for 2-positivity: applies eta^(2) to random PSD x in M_2(M_m(C)) (ranks from 1
/// up) and fails when an output eigenvalue is below -1e-9 ||x||.
PositivityTest sample_2positivity(const CovarianceMap& eta, int trials, std::uint64_t seed);

/// C^1 path t -> eta_t on [t_start, t_end] with its derivative.
struct CovariancePath {
  struct Point {
    CovarianceMap eta;
    CovarianceMap eta_dot;
  };

  double t_start = 0.0;
  double t_end = 1.0;
  std::function<Point(double)> evaluate;

  Point operator()(double t) const { return evaluate(t); }

  /// eta_t = (1 - t) e0 + t e1 on [0, 1]; eta_dot = e1 - e0.
  static CovariancePath affine(const CovarianceMap& e0, const CovarianceMap& e1);
  static CovariancePath constant(const CovarianceMap& e);
};

}  // namespace mde
