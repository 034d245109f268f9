#include "mde/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "mde/random.hpp"

namespace mde {

std::string to_string(PositivityClass c) {
  switch (c) {
    case PositivityClass::CompletelyPositive: return "CP";
    case PositivityClass::TwoPositive: return "TwoPositive";
    case PositivityClass::PositiveOnly: return "PositiveOnly";
    case PositivityClass::Indefinite: return "Indefinite";
  }
  return "Indefinite";
}

PositivityClass positivity_from_string(const std::string& s) {
  if (s == "CP") return PositivityClass::CompletelyPositive;
  if (s == "TwoPositive") return PositivityClass::TwoPositive;
  if (s == "PositiveOnly") return PositivityClass::PositiveOnly;
  if (s == "Indefinite") return PositivityClass::Indefinite;
  throw std::invalid_argument("unknown positivity class '" + s + "'");
}

bool is_two_positive(PositivityClass c) {
  return c == PositivityClass::CompletelyPositive || c == PositivityClass::TwoPositive;
}

namespace {

int rank_of(PositivityClass c) {
  switch (c) {
    case PositivityClass::CompletelyPositive: return 3;
    case PositivityClass::TwoPositive: return 2;
    case PositivityClass::PositiveOnly: return 1;
    case PositivityClass::Indefinite: return 0;
  }
  return 0;
}

std::size_t common_dim(const std::vector<Matrix>& ops, const char* where) {
  if (ops.empty()) throw std::invalid_argument(std::string(where) + ": empty operator list");
  for (const auto& a : ops) require_same_dim(ops.front(), a, where);
  return ops.front().dim();
}

}  // namespace

CovarianceMap CovarianceMap::kraus(std::vector<Matrix> ops) {
  CovarianceMap e;
  e.kind_ = Kind::Kraus;
  e.dim_ = common_dim(ops, "kraus");
  e.ops_ = std::move(ops);
  return e;
}

CovarianceMap CovarianceMap::sandwich(std::vector<Hermitian> ops) {
  CovarianceMap e;
  e.kind_ = Kind::Sandwich;
  for (auto& h : ops) e.ops_.push_back(h.matrix());
  e.dim_ = common_dim(e.ops_, "sandwich");
  return e;
}

CovarianceMap CovarianceMap::choi(Matrix c, PositivityClass declared) {
  const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(c.dim()))));
  if (m == 0 || m * m != c.dim()) throw DimensionError("choi: matrix size must be a perfect square");
  CovarianceMap e;
  e.kind_ = Kind::Choi;
  e.dim_ = m;
  e.positivity_ = declared;
  e.ops_.push_back(std::move(c));
  return e;
}

CovarianceMap CovarianceMap::zero(std::size_t dim) {
  return choi(Matrix(dim * dim), PositivityClass::CompletelyPositive);
}

CovarianceMap CovarianceMap::identity(std::size_t dim) {
  return kraus({Matrix::identity(dim)});
}

CovarianceMap CovarianceMap::choi_example() {
  const std::size_t m = 3;
  Matrix c(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t l = 0; l < m; ++l) {
          double v = 0.0;
          if (i == j && k == l) v += 2.0;
          if (i == k && j == l) v -= 1.0;
          c(i * m + k, j * m + l) = v;
        }
  return choi(std::move(c), PositivityClass::TwoPositive);
}

CovarianceMap CovarianceMap::transpose_map(std::size_t dim) {
  Matrix c(dim * dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) c(i * dim + j, j * dim + i) = 1.0;
  return choi(std::move(c), PositivityClass::PositiveOnly);
}

CovarianceMap CovarianceMap::combination(const std::vector<double>& coefs,
                                         const std::vector<CovarianceMap>& maps) {
  if (coefs.size() != maps.size() || maps.empty())
    throw std::invalid_argument("combination: need one coefficient per map");
  const std::size_t m = maps.front().dim();
  bool nonnegative = true;
  bool factorized = true;
  int weakest = 3;
  for (std::size_t j = 0; j < maps.size(); ++j) {
    if (maps[j].dim() != m || maps[j].level() != 1)
      throw DimensionError("combination: maps must share the base dimension");
    if (!std::isfinite(coefs[j])) throw std::invalid_argument("combination: non-finite coefficient");
    if (coefs[j] < 0.0) nonnegative = false;
    if (coefs[j] == 0.0) continue;
    if (maps[j].kind() == Kind::Choi) factorized = false;
    weakest = std::min(weakest, rank_of(maps[j].positivity()));
  }
  if (nonnegative && factorized) {
    std::vector<Matrix> ops;
    for (std::size_t j = 0; j < maps.size(); ++j) {
      if (coefs[j] == 0.0) continue;
      const double s = std::sqrt(coefs[j]);
      for (const auto& a : maps[j].operators()) ops.push_back(s * a);
    }
    if (ops.empty()) return zero(m);
    bool all_sandwich = std::all_of(maps.begin(), maps.end(),
                                    [](const CovarianceMap& e) { return e.kind() == Kind::Sandwich; });
    CovarianceMap e = kraus(std::move(ops));
    if (all_sandwich) e.kind_ = Kind::Sandwich;
    return e;
  }
  Matrix c(m * m);
  for (std::size_t j = 0; j < maps.size(); ++j)
    if (coefs[j] != 0.0) c += coefs[j] * maps[j].choi_matrix();
  PositivityClass cls = PositivityClass::Indefinite;
  if (nonnegative) {
    cls = weakest == 3   ? PositivityClass::CompletelyPositive
          : weakest == 2 ? PositivityClass::TwoPositive
          : weakest == 1 ? PositivityClass::PositiveOnly
                         : PositivityClass::Indefinite;
  }
  return choi(std::move(c), cls);
}

CovarianceMap CovarianceMap::affine(const CovarianceMap& e0, const CovarianceMap& e1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("affine: t must lie in [0, 1]");
  return combination({1.0 - t, t}, {e0, e1});
}

CovarianceMap CovarianceMap::difference(const CovarianceMap& e1, const CovarianceMap& e0) {
  CovarianceMap d = combination({1.0, -1.0}, {e1, e0});
  d.positivity_ = PositivityClass::Indefinite;
  return d;
}

Matrix CovarianceMap::apply_base(const Matrix& b) const {
  const std::size_t m = dim_;
  Matrix out(m);
  switch (kind_) {
    case Kind::Kraus:
      for (const auto& a : ops_) out += a * b * a.adjoint();
      break;
    case Kind::Sandwich:
      for (const auto& a : ops_) out += a * b * a;
      break;
    case Kind::Choi: {
      const Matrix& c = ops_.front();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
          Complex s = 0.0;
          for (std::size_t k = 0; k < m; ++k)
            for (std::size_t l = 0; l < m; ++l) s += c(i * m + k, j * m + l) * b(k, l);
          out(i, j) = s;
        }
      break;
    }
  }
  return out;
}

Matrix CovarianceMap::apply(const Matrix& b) const {
  if (b.dim() != domain_dim())
    throw DimensionError("apply: expected dimension " + std::to_string(domain_dim()) + ", got " +
                         std::to_string(b.dim()));
  if (level_ == 1) return apply_base(b);
  Matrix out(b.dim());
  for (std::size_t bi = 0; bi < level_; ++bi)
    for (std::size_t bj = 0; bj < level_; ++bj)
      set_block(out, bi, bj, apply_base(block(b, bi, bj, dim_)));
  return out;
}

CovarianceMap CovarianceMap::amplify(std::size_t k) const {
  if (k == 0) throw std::invalid_argument("amplify: k must be positive");
  CovarianceMap e = *this;
  e.level_ = level_ * k;
  return e;
}

Matrix CovarianceMap::choi_matrix() const {
  const std::size_t m = dim_;
  if (kind_ == Kind::Choi) return ops_.front();
  Matrix c(m * m);
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      Matrix e(m);
      e(k, l) = 1.0;
      const Matrix img = apply_base(e);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) c(i * m + k, j * m + l) = img(i, j);
    }
  return c;
}

double CovarianceMap::operator_norm() const {
  if (positivity_ == PositivityClass::Indefinite)
    throw PreconditionError("operator_norm: ||eta|| = ||eta(1)|| needs a positive map; use norm_bounds");
  return op_norm(apply_base(Matrix::identity(dim_)));
}

namespace {

CovarianceMap base_of(const CovarianceMap& eta) {
  return eta.level() == 1 ? eta : CovarianceMap::choi(eta.choi_matrix(), eta.positivity());
}

}  // namespace

PsdCheck choi_psd_check(const CovarianceMap& eta) {
  const Matrix c = eta.choi_matrix();
  const Hermitian h = Hermitian::real_part(c);
  const double lo = min_eigenvalue(h);
  const double slack = 1e-10 * std::max(1.0, op_norm(c));
  const bool hermitian = frobenius_norm(c - h.matrix()) <= 1e-12 * std::max(1.0, frobenius_norm(c));
  return {hermitian && lo >= -slack, lo};
}

NormBounds norm_bounds(const CovarianceMap& eta_in, std::uint64_t seed) {
  const CovarianceMap eta = base_of(eta_in);
  const std::size_t m = eta.dim();
  const Matrix c = eta.choi_matrix();
  const Hermitian h = Hermitian::real_part(c);
  const double scale = std::max(1.0, op_norm(c));
  const bool hermitian = frobenius_norm(c - h.matrix()) <= 1e-14 * scale;
  const double at_one = op_norm(eta.apply(Matrix::identity(m)));
  if (hermitian) {
    const EigenSystem es = herm_eigen(h);
    const double tol = 1e-13 * scale;
    if (es.values.front() >= -tol || es.values.back() <= tol) return {at_one, at_one};
    Matrix plus(m * m), minus(m * m);
    for (std::size_t k = 0; k < m * m; ++k) {
      const double lam = es.values[k];
      for (std::size_t i = 0; i < m * m; ++i)
        for (std::size_t j = 0; j < m * m; ++j) {
          const Complex v = lam * es.vectors(i, k) * std::conj(es.vectors(j, k));
          if (lam > 0.0) plus(i, j) += v;
          else minus(i, j) -= v;
        }
    }
    const auto ep = CovarianceMap::choi(plus, PositivityClass::CompletelyPositive);
    const auto em = CovarianceMap::choi(minus, PositivityClass::CompletelyPositive);
    const double upper = op_norm(ep.apply(Matrix::identity(m))) + op_norm(em.apply(Matrix::identity(m)));
    const double ascent = linear_map_norm_lower_bound(
        [&](const Matrix& x) { return eta.apply(x); }, m, 8, 30, seed);
    const double lower = std::max(at_one, ascent);
    return {lower, std::max(lower, upper)};
  }
  double upper = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = 0; l < m; ++l) {
      Matrix e(m);
      e(k, l) = 1.0;
      upper += op_norm(eta.apply(e));
    }
  const double ascent =
      linear_map_norm_lower_bound([&](const Matrix& x) { return eta.apply(x); }, m, 8, 30, seed);
  const double lower = std::max(at_one, ascent);
  return {lower, std::max(lower, upper)};
}

PositivityTest sample_2positivity(const CovarianceMap& eta_in, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("sample_2positivity: trials must be >= 1");
  const CovarianceMap eta = base_of(eta_in);
  const CovarianceMap eta2 = eta.amplify(2);
  const std::size_t n = 2 * eta.dim();
  CounterRng rng(seed);
  PositivityTest result{true, 0, 0.0, std::nullopt};
  for (int t = 0; t < trials; ++t) {
    const std::size_t rank = 1 + static_cast<std::size_t>(t) % n;
    Matrix y(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < rank; ++j) y(i, j) = rng.complex_normal();
    const Hermitian x = Hermitian::from_upper(y * y.adjoint());
    const Hermitian out = Hermitian::real_part(eta2.apply(x));
    const double ratio = min_eigenvalue(out) / op_norm(x);
    ++result.trials;
    result.worst_ratio = std::min(result.worst_ratio, ratio);
    if (ratio < -1e-9) {
      result.pass = false;
      result.counterexample = x.matrix();
      break;
    }
  }
  return result;
}

CovariancePath CovariancePath::affine(const CovarianceMap& e0, const CovarianceMap& e1) {
  auto dot = std::make_shared<CovarianceMap>(CovarianceMap::difference(e1, e0));
  CovariancePath p;
  p.t_start = 0.0;
  p.t_end = 1.0;
  p.evaluate = [e0, e1, dot](double t) {
    return Point{CovarianceMap::affine(e0, e1, t), *dot};
  };
  return p;
}

CovariancePath CovariancePath::constant(const CovarianceMap& e) {
  CovariancePath p;
  p.evaluate = [e](double) { return Point{e, CovarianceMap::zero(e.dim())}; };
  return p;
}

}  // namespace mde
