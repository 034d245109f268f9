#pragma once

// Seeded sampling. The generator is counter based: output k of stream (seed) is
// splitmix64_mix(seed + (k + 1) * 0x9E3779B97F4A7C15), i.e. the SplitMix64 sequence, so
// any value can be recomputed from (seed, k) alone. Independent streams come from
// split(i), whose seed is splitmix64_mix(seed ^ splitmix64_mix(i + 0x632BE59BD9B4E019)).
// Normals use Box-Muller on two consecutive uniforms so results are identical across
// standard libraries.

#include <cstddef>
#include <cstdint>

#include "mde/algebra.hpp"

namespace mde {

std::uint64_t splitmix64_mix(std::uint64_t z) noexcept;

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform in (0, 1); 53 random bits, never exactly 0.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  /// Complex normal with E|z|^2 = 1.
  Complex complex_normal() noexcept;

  CounterRng split(std::uint64_t stream) const noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Entries i.i.d. complex normal with E|a_ij|^2 = scale^2.
Matrix ginibre(std::size_t dim, CounterRng& rng, double scale = 1.0);
/// GUE with E|x_ij|^2 = variance for all i, j (diagonal real).
Hermitian gue(std::size_t dim, CounterRng& rng, double variance = 1.0);
/// Haar-distributed unitary (QR of a Ginibre matrix with phase correction).
Matrix random_unitary(std::size_t dim, CounterRng& rng);
/// Random density matrix a a* / Tr(a a*), a Ginibre of the given rank (0 = full).
Hermitian random_density(std::size_t dim, CounterRng& rng, std::size_t rank = 0);
/// Re(b) from GUE scaled by re_scale, Im(b) = gamma 1 + a PSD part with smallest eigenvalue
/// exactly gamma (up to rounding).
Matrix random_half_plane_point(std::size_t dim, double gamma, CounterRng& rng,
                               double re_scale = 1.0);

}  // namespace mde
