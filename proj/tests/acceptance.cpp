// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any fails.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "mde/dyson.hpp"
#include "mde/evolution.hpp"
#include "mde/measures.hpp"
#include "mde/random.hpp"
#include "mde/randmat.hpp"
#include "mde/verify.hpp"

using namespace mde;

namespace {

struct Outcome {
  bool ok;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void run(const char* name, double time_limit, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs <= time_limit;
  const bool pass = o.ok && in_time;
  if (!pass) ++failures;
  std::printf("%s %s: %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs,
              time_limit, in_time ? "" : " [over time]");
  std::fflush(stdout);
}

Complex semicircle(Complex z) { return (z - std::sqrt(z - 2.0) * std::sqrt(z + 2.0)) / 2.0; }

CovarianceMap random_kraus(std::size_t m, std::size_t rank, CounterRng& rng) {
  std::vector<Matrix> ops;
  for (std::size_t j = 0; j < rank; ++j) ops.push_back(ginibre(m, rng, 1.0 / std::sqrt(double(m * rank))));
  return CovarianceMap::kraus(std::move(ops));
}

CovarianceMap normalized_kraus(std::size_t m, std::size_t rank, double norm, CounterRng& rng) {
  const CovarianceMap k = random_kraus(m, rank, rng);
  return CovarianceMap::combination({norm / k.operator_norm()}, {k});
}

Outcome semicircle_exactness() {
  const Matrix zero(1);
  const CovarianceMap id = CovarianceMap::identity(1);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Complex z(-3.0 + 6.0 * i / 199.0, 0.01);
    worst = std::max(worst, std::abs(solve(Matrix::scalar(1, z), id).w(0, 0) - semicircle(z)));
  }
  return {worst <= 1e-9, fmt("200 points at Im z = 0.01, max |G - closed form| = %.2e (tol 1e-9)", worst)};
}

Outcome certified_residuals() {
  int violations = 0;
  double worst_res = 0.0, worst_norm = 0.0;
  for (int i = 0; i < 500; ++i) {
    CounterRng rng = CounterRng(2).split(i);
    const std::size_t m = 2 + i % 2;
    const CovarianceMap eta = random_kraus(m, 1 + rng.next_u64() % 3, rng);
    const double gamma = std::exp(rng.uniform(std::log(0.05), std::log(2.0)));
    const Matrix b = random_half_plane_point(m, gamma, rng);
    const DysonSolution s = solve(b, eta);
    const double r = s.residual_norm / s.gamma;
    const double n = op_norm(s.w) * s.gamma;
    worst_res = std::max(worst_res, r);
    worst_norm = std::max(worst_norm, n);
    if (!(r <= 1e-12) || !(n <= 1.0)) ++violations;
  }
  return {violations == 0, fmt("500 instances, max residual/gamma = %.2e (tol 1e-12), max gamma ||w|| = %.6f (tol 1), "
                               "%d violations",
                               worst_res, worst_norm, violations)};
}

Outcome derivative_cross_validation() {
  double amp_lin = 0.0, amp_fd = 0.0, lin_fd = 0.0;
  SolverConfig cfg;
  cfg.polish = true;
  for (int i = 0; i < 100; ++i) {
    CounterRng rng = CounterRng(3).split(i);
    const CovarianceMap eta =
        i % 10 == 0 ? CovarianceMap::choi_example() : random_kraus(2 + i % 2, 1 + rng.next_u64() % 3, rng);
    const std::size_t m = eta.dim();
    const double gamma = std::exp(rng.uniform(std::log(0.1), std::log(2.0)));
    const Matrix b = random_half_plane_point(m, gamma, rng);
    Matrix h = ginibre(m, rng);
    h = h / op_norm(h);
    const Matrix amp = frechet_derivative(b, eta, h, cfg).value;
    const Matrix lin = frechet_derivative_linear(b, eta, h, cfg);
    const double t = 1e-4 * gamma;
    const Matrix fd = (solve(b + t * h, eta, cfg).w - solve(b - t * h, eta, cfg).w) / (2.0 * t);
    const double scale = op_norm(lin);
    amp_lin = std::max(amp_lin, op_norm(amp - lin) / scale);
    amp_fd = std::max(amp_fd, op_norm(amp - fd) / scale);
    lin_fd = std::max(lin_fd, op_norm(lin - fd) / scale);
  }
  const bool ok = amp_lin <= 1e-9 && amp_fd <= 1e-6 && lin_fd <= 1e-6;
  return {ok, fmt("100 instances, relative gaps: amplification-linear %.2e (tol 1e-9), amplification-FD %.2e, "
                  "linear-FD %.2e (tol 1e-6)",
                  amp_lin, amp_fd, lin_fd)};
}

Outcome bound_suite() {
  SuiteOptions opt;
  opt.instances = 100;
  opt.seed = 7;
  const auto reports = run_suite("all", opt);
  bool ok = !reports.empty();
  std::string failed;
  double tightest = 1e300;
  std::string tightest_name;
  for (const auto& r : reports) {
    const bool good = r.pass() && r.instances >= 100 && r.includes_fixture;
    if (!good) {
      ok = false;
      failed += " " + r.name;
    }
    if (r.worst_bound > 0.0 && r.worst_margin / r.worst_bound < tightest) {
      tightest = r.worst_margin / r.worst_bound;
      tightest_name = r.name;
    }
  }
  std::string d = fmt("%zu bounds x >= 100 instances with the non-CP fixture, tightest relative margin %.2e (%s)",
                      reports.size(), tightest, tightest_name.c_str());
  if (!failed.empty()) d += "; failing:" + failed;
  return {ok, d};
}

Outcome burgers_consistency() {
  CounterRng rng(5);
  const CovarianceMap e0 = normalized_kraus(2, 2, 1.0, rng), e1 = normalized_kraus(2, 2, 3.0, rng);
  const Hermitian h = gue(2, rng);
  std::vector<Matrix> bs;
  for (int i = 0; i < 5; ++i) bs.push_back((-1.0 + 0.5 * i) * h.matrix() + Matrix::scalar(2, Complex(0.0, 0.5)));
  const BurgersReport r = burgers_sweep(CovariancePath::affine(e0, e1), bs, {0.1, 0.3, 0.5, 0.7, 0.9}, {}, 1e-5);
  const bool ok = r.max_fd_check <= 1e-5 && r.halving_ratio >= 3.0 && r.halving_ratio <= 5.0;
  return {ok, fmt("5x5 grid at gamma = 0.5, max fd_check %.2e (tol 1e-5), halving ratio %.3f (want [3, 5])",
                  r.max_fd_check, r.halving_ratio)};
}

Outcome monte_carlo() {
  KroneckerModel sc;
  sc.b0 = Hermitian(1);
  sc.bs = {Hermitian::identity(1)};
  sc.n = 1000;
  sc.trials = 10;
  sc.seed = 42;
  KroneckerModel pauli;
  pauli.b0 = Hermitian(2);
  pauli.bs = {Hermitian::from_upper(Matrix::from_rows({{0.0, 1.0}, {1.0, 0.0}})),
              Hermitian::diagonal(std::vector<double>{1.0, -1.0})};
  pauli.n = 1000;
  pauli.trials = 10;
  pauli.seed = 42;
  const MonteCarloReport a = validate_against_dos(sc, 0.05);
  const MonteCarloReport b = validate_against_dos(pauli, 0.05);
  return {a.levy <= 0.05 && b.levy <= 0.08,
          fmt("N = 1000, 10 trials, seed 42, eps 0.05: semicircle L = %.2e (threshold 0.05), Pauli L = %.2e "
              "(threshold 0.08)",
              a.levy, b.levy)};
}

Outcome levy_metric() {
  double fixture_err = 0.0;
  const DiscreteMeasure d0 = DiscreteMeasure::dirac(0.0);
  for (double a : {1e-6, 0.01, 0.25, 0.5, 0.999, 1.0, 1.5, 10.0}) {
    fixture_err = std::max(fixture_err, std::abs(levy_distance(d0, DiscreteMeasure::dirac(a)) - std::min(a, 1.0)));
    fixture_err = std::max(fixture_err, std::abs(levy_distance(DiscreteMeasure::dirac(a), d0) - std::min(a, 1.0)));
  }
  CounterRng rng(7);
  auto sample = [&] {
    const std::size_t n = 1 + rng.next_u64() % 8;
    std::vector<double> at, w;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      at.push_back(rng.uniform(-2.0, 2.0));
      w.push_back(rng.uniform(0.05, 1.0));
      total += w.back();
    }
    for (auto& x : w) x /= total;
    return DiscreteMeasure(at, w);
  };
  int asym = 0;
  double tri = -1e300;
  for (int i = 0; i < 1000; ++i) {
    const DiscreteMeasure x = sample(), y = sample(), z = sample();
    const double xy = levy_distance(x, y), xz = levy_distance(x, z), zy = levy_distance(z, y);
    if (xy != levy_distance(y, x)) ++asym;
    tri = std::max(tri, xy - xz - zy);
  }
  const bool ok = fixture_err <= 1e-12 && asym == 0 && tri <= 1e-12;
  return {ok, fmt("dirac fixtures max error %.2e (tol 1e-12), 1000 triples: %d asymmetric, max triangle excess "
                  "%.2e (tol 1e-12)",
                  fixture_err, asym, tri)};
}

}  // namespace

int main() {
  run("1 semicircle exactness", 5, semicircle_exactness);
  run("2 certified residuals", 60, certified_residuals);
  run("3 derivative cross-validation", 600, derivative_cross_validation);
  run("4 bound suite", 600, bound_suite);
  run("5 Burgers consistency", 600, burgers_consistency);
  run("6 Monte Carlo agreement", 180, monte_carlo);
  run("7 Levy metric", 600, levy_metric);
  return failures == 0 ? 0 : 1;
}
