#include "mde/randmat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "mde/random.hpp"

namespace mde {

Hermitian sample_gue(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_gue: N must be positive");
  CounterRng rng(seed);
  return gue(n, rng, 1.0 / static_cast<double>(n));
}

void KroneckerModel::validate() const {
  if (b0.dim() == 0) throw DimensionError("kronecker model: empty b0");
  for (const auto& b : bs)
    if (b.dim() != b0.dim()) throw DimensionError("kronecker model: all b_j must match b0");
  if (n < 1) throw std::invalid_argument("kronecker model: N must be at least 1");
  if (trials < 1) throw std::invalid_argument("kronecker model: trials must be at least 1");
}

CovarianceMap KroneckerModel::covariance() const {
  if (bs.empty()) return CovarianceMap::zero(dim());
  return CovarianceMap::sandwich(bs);
}

Hermitian KroneckerModel::sample(int trial) const {
  validate();
  const CounterRng stream = CounterRng(seed).split(static_cast<std::uint64_t>(trial));
  const std::size_t m = dim();
  Matrix x = kron(b0.matrix(), Matrix::identity(n));
  for (std::size_t j = 0; j < bs.size(); ++j) {
    CounterRng rng = stream.split(j);
    const Hermitian g = gue(n, rng, 1.0 / static_cast<double>(n));
    // Add b_j (x) X_j without forming the product matrix.
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < m; ++k) {
        const Complex c = bs[j](i, k);
        if (c == 0.0) continue;
        for (std::size_t a = 0; a < n; ++a)
          for (std::size_t d = 0; d < n; ++d) x(i * n + a, k * n + d) += c * g(a, d);
      }
  }
  return Hermitian::real_part(x);
}

DiscreteMeasure empirical_spectrum(const KroneckerModel& model, int threads) {
  model.validate();
  const auto t = static_cast<std::size_t>(model.trials);
  std::vector<std::vector<double>> per_trial(t);
  std::vector<std::exception_ptr> errors(t);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < t; k = next++) {
      try {
        per_trial[k] = herm_eigenvalues(model.sample(static_cast<int>(k)));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, model.trials));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<double> atoms;
  atoms.reserve(t * model.dim() * model.n);
  for (auto& v : per_trial) atoms.insert(atoms.end(), v.begin(), v.end());
  return DiscreteMeasure::uniform(std::move(atoms));
}

MonteCarloReport validate_against_dos(const KroneckerModel& model, double epsilon, const SolverConfig& cfg,
                                      std::size_t grid_points, int threads) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("validate_against_dos: epsilon must be positive");
  model.validate();
  const DiscreteMeasure emp = empirical_spectrum(model, threads);
  const DataPair rho(model.b0, model.covariance());
  Window w = default_window(rho, epsilon);
  w.lo = std::min(w.lo, emp.atoms().front() - 10.0 * epsilon);
  w.hi = std::max(w.hi, emp.atoms().back() + 10.0 * epsilon);

  const SpectralDensity dos = density_of_states(rho, epsilon, w, grid_points, cfg);
  const SpectralDensity smooth = cauchy_smooth(emp, epsilon, dos.grid);

  MonteCarloReport r;
  r.levy = levy_distance(to_measure(dos), to_measure(smooth));
  r.n = model.n;
  r.trials = model.trials;
  r.seed = model.seed;
  r.epsilon = epsilon;
  r.grid_points = grid_points;
  r.window = w;
  const double h = (w.hi - w.lo) / static_cast<double>(grid_points - 1);
  r.slack.quantization = 2.0 * h + std::abs(1.0 - dos.mass) + std::abs(1.0 - smooth.mass);
  r.slack.tail = dos.tail_mass + smooth.tail_mass;
  r.slack.solver = dos.max_error * (w.hi - w.lo) / std::numbers::pi;
  return r;
}

}  // namespace mde
