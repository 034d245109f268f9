#include "mde/random.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace mde {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;
}  // namespace

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t CounterRng::next_u64() noexcept {
  ++counter_;
  return splitmix64_mix(seed_ + counter_ * kGolden);
}

double CounterRng::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

Complex CounterRng::complex_normal() noexcept {
  const double re = normal();
  const double im = normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

CounterRng CounterRng::split(std::uint64_t stream) const noexcept {
  return CounterRng(splitmix64_mix(seed_ ^ splitmix64_mix(stream + kStreamSalt)));
}

Matrix ginibre(std::size_t dim, CounterRng& rng, double scale) {
  Matrix a(dim);
  for (auto& z : a.data()) z = scale * rng.complex_normal();
  return a;
}

Hermitian gue(std::size_t dim, CounterRng& rng, double variance) {
  const double sd = std::sqrt(variance);
  Matrix a(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    a(i, i) = sd * rng.normal();
    for (std::size_t j = i + 1; j < dim; ++j) a(i, j) = sd * rng.complex_normal();
  }
  return Hermitian::from_upper(a);
}

Matrix random_unitary(std::size_t dim, CounterRng& rng) {
  Matrix a = ginibre(dim, rng);
  // Modified Gram-Schmidt on columns; the R diagonal comes out real positive, which is
  // the phase convention that makes the result Haar distributed.
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t k = 0; k < j; ++k) {
      Complex dot = 0.0;
      for (std::size_t i = 0; i < dim; ++i) dot += std::conj(a(i, k)) * a(i, j);
      for (std::size_t i = 0; i < dim; ++i) a(i, j) -= dot * a(i, k);
    }
    double nrm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) nrm += std::norm(a(i, j));
    nrm = std::sqrt(nrm);
    for (std::size_t i = 0; i < dim; ++i) a(i, j) /= nrm;
  }
  return a;
}

Hermitian random_density(std::size_t dim, CounterRng& rng, std::size_t rank) {
  if (rank == 0 || rank > dim) rank = dim;
  Matrix a(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < rank; ++j) a(i, j) = rng.complex_normal();
  Matrix p = a * a.adjoint();
  const double tr = p.trace().real();
  return Hermitian::from_upper(p / tr);
}

Matrix random_half_plane_point(std::size_t dim, double gamma, CounterRng& rng, double re_scale) {
  const Hermitian re = gue(dim, rng, re_scale * re_scale);
  const Matrix u = random_unitary(dim, rng);
  std::vector<Complex> lam(dim);
  for (std::size_t i = 0; i < dim; ++i) lam[i] = i == 0 ? gamma : gamma * (1.0 + 3.0 * rng.uniform());
  const Hermitian im = Hermitian::from_upper(u * Matrix::diagonal(lam) * u.adjoint());
  return re.matrix() + kI * im.matrix();
}

}  // namespace mde
