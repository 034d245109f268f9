// Command-line front end. Stdout carries only the path of the artifact written; progress and
// diagnostics go to stderr. Exit codes: 0 success, 1 verification failure, 2 input error,
// 3 numeric non-convergence.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mde/dyson.hpp"
#include "mde/evolution.hpp"
#include "mde/io.hpp"
#include "mde/measures.hpp"
#include "mde/randmat.hpp"
#include "mde/verify.hpp"

using namespace mde;

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kInput = 2, kNonConvergence = 3 };

struct Common {
  double tol = 1e-12;
  int max_iter = 10000;
  int threads = 1;
  std::string out;

  SolverConfig solver() const {
    SolverConfig c;
    c.tol_residual = tol;
    c.max_iter = max_iter;
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--tol", c.tol, "Residual tolerance relative to gamma")->check(CLI::PositiveNumber);
  app->add_option("--max-iter", c.max_iter, "Iteration cap per solve")->check(CLI::PositiveNumber);
  app->add_option("--threads", c.threads, "Worker cap")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "Output path")->required();
}

Window parse_window(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw InputError("--window expects lo:hi");
  try {
    std::size_t used = 0;
    const double lo = std::stod(s.substr(0, colon), &used);
    if (used != colon) throw InputError("--window: bad lower end");
    const std::string rest = s.substr(colon + 1);
    const double hi = std::stod(rest, &used);
    if (used != rest.size()) throw InputError("--window: bad upper end");
    if (!(lo < hi)) throw InputError("--window needs lo < hi");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw InputError("--window expects two numbers lo:hi");
  }
}

Complex parse_complex(const std::string& s) {
  const auto comma = s.find(',');
  try {
    if (comma == std::string::npos) return {std::stod(s), 0.0};
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::logic_error&) {
    throw InputError("expected a complex number re,im: '" + s + "'");
  }
}

void emit(const std::string& path, const std::string& content) {
  write_atomic(path, content);
  std::cout << path << '\n';
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix Dyson equation solver, densities of states and bound verification"};
  app.require_subcommand(1);
  Common common;

  // dos
  std::string pair_path, window_s;
  double epsilon = 0.05;
  std::size_t grid = 2001;
  auto* dos = app.add_subcommand("dos", "Density of states of a data pair as CSV");
  dos->add_option("--pair", pair_path, "Data pair JSON")->required();
  dos->add_option("--epsilon", epsilon, "Smoothing height")->check(CLI::PositiveNumber);
  dos->add_option("--window", window_s, "Grid window lo:hi (default from the data)");
  dos->add_option("--grid", grid, "Number of grid points")->check(CLI::Range(2, 10000000));
  add_common(dos, common);

  // cauchy
  std::vector<std::string> zs;
  auto* cauchy = app.add_subcommand("cauchy", "Scalar Cauchy transform phi(G(z 1 - b0))");
  cauchy->add_option("--pair", pair_path, "Data pair JSON")->required();
  cauchy->add_option("--z", zs, "Spectral parameter re,im (repeatable)")->required();
  add_common(cauchy, common);

  // derivative
  std::string b_path, h_path, method = "amplification";
  std::string z_s;
  auto* deriv = app.add_subcommand("derivative", "Frechet derivative (DG)(b) h");
  deriv->add_option("--pair", pair_path, "Data pair JSON (eta is used; b defaults to z 1 - b0)")->required();
  deriv->add_option("--b", b_path, "Matrix JSON for b");
  deriv->add_option("--z", z_s, "Use b = z 1 - b0 with z = re,im");
  deriv->add_option("--direction", h_path, "Matrix JSON for the direction h")->required();
  deriv->add_option("--method", method, "amplification or linear")
      ->check(CLI::IsMember({"amplification", "linear"}));
  add_common(deriv, common);

  // evolve
  std::string eta0_path, eta1_path;
  std::vector<std::string> b_paths;
  std::vector<double> ts;
  double delta = 0.0;
  auto* evolve = app.add_subcommand("evolve", "Burgers consistency along the affine path eta0 -> eta1");
  evolve->add_option("--eta0", eta0_path, "Covariance JSON")->required();
  evolve->add_option("--eta1", eta1_path, "Covariance JSON")->required();
  evolve->add_option("--b", b_paths, "Matrix JSON files for b (repeatable)")->required();
  evolve->add_option("--t", ts, "Times in (0, 1) (repeatable)")->required();
  evolve->add_option("--delta", delta, "Finite-difference step (default 1e-5)")->check(CLI::PositiveNumber);
  add_common(evolve, common);

  // subordinate
  std::string b0m_path;
  double sigma_prime = 0.25, sigma = 0.5;
  auto* subord = app.add_subcommand("subordinate", "Subordination omega = Psi_eta0(G_eta1(b))");
  subord->add_option("--eta0", eta0_path, "Covariance JSON")->required();
  subord->add_option("--eta1", eta1_path, "Covariance JSON")->required();
  subord->add_option("--b0", b0m_path, "Matrix JSON for the disc centre")->required();
  subord->add_option("--b", b_path, "Matrix JSON for the evaluation point")->required();
  subord->add_option("--sigma-prime", sigma_prime, "Disc radius factor");
  subord->add_option("--sigma", sigma, "Outer factor");
  add_common(subord, common);

  // verify
  std::string suite = "all";
  int instances = 100;
  std::uint64_t seed = 7;
  std::vector<double> eps_grid;
  auto* verify = app.add_subcommand("verify", "Run a bound-verification suite");
  verify->add_option("--suite", suite, "holder, lemmas, levy or all")
      ->check(CLI::IsMember({"holder", "lemmas", "levy", "all"}));
  verify->add_option("--seed", seed, "Suite seed");
  verify->add_option("--instances", instances, "Instances per bound")->check(CLI::PositiveNumber);
  verify->add_option("--epsilon", eps_grid, "Smoothing heights for the Holder checks (repeatable)");
  verify->add_option("--grid", grid, "Grid points for densities of states")->check(CLI::Range(3, 1000000));
  add_common(verify, common);
  bool verify_grid_set = false;

  // randmat
  std::string model_path;
  auto* randmat = app.add_subcommand("randmat", "Monte Carlo comparison of a Kronecker model with its DOS");
  randmat->add_option("--model", model_path, "Model JSON")->required();
  randmat->add_option("--epsilon", epsilon, "Smoothing height")->check(CLI::PositiveNumber);
  randmat->add_option("--grid", grid, "Number of grid points")->check(CLI::Range(3, 10000000));
  randmat->add_option("--seed", seed, "Override the model seed");
  add_common(randmat, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }
  verify_grid_set = verify->count("--grid") > 0;

  try {
    const SolverConfig cfg = common.solver();
    if (dos->parsed()) {
      const DataPair rho = data_pair_from_json(read_json_file(pair_path));
      std::optional<Window> w;
      if (!window_s.empty()) w = parse_window(window_s);
      std::cerr << "dos: " << grid << " points at epsilon " << epsilon << '\n';
      const SpectralDensity sd = density_of_states(rho, epsilon, w, grid, cfg);
      std::cerr << "dos: mass " << sd.mass << ", tail mass <= " << sd.tail_mass << ", max solver error "
                << sd.max_error << '\n';
      emit(common.out, density_csv(sd));
    } else if (cauchy->parsed()) {
      const DataPair rho = data_pair_from_json(read_json_file(pair_path));
      Json arr = Json::array();
      for (const auto& s : zs) {
        const Complex z = parse_complex(s);
        const CauchyValue v = scalar_cauchy_certified(rho, z, cfg);
        arr.push_back({{"z", {z.real(), z.imag()}},
                       {"value", {v.value.real(), v.value.imag()}},
                       {"error_bound", v.error_bound ? Json(*v.error_bound) : Json(nullptr)},
                       {"iterations", v.iterations}});
      }
      emit(common.out, dump(arr));
    } else if (deriv->parsed()) {
      const DataPair rho = data_pair_from_json(read_json_file(pair_path));
      if (b_path.empty() == z_s.empty()) throw InputError("derivative: give exactly one of --b and --z");
      const Matrix b = b_path.empty() ? Matrix::scalar(rho.dim(), parse_complex(z_s)) - rho.b0.matrix()
                                      : matrix_from_json(read_json_file(b_path));
      const Matrix h = matrix_from_json(read_json_file(h_path));
      Json j;
      if (method == "amplification") {
        const DerivativeResult d = frechet_derivative(b, rho.eta, h, cfg);
        j = {{"method", method},
             {"value", to_json(d.value)},
             {"error_bound", d.error_bound ? Json(*d.error_bound) : Json(nullptr)},
             {"iterations", d.iterations}};
      } else {
        j = {{"method", method}, {"value", to_json(frechet_derivative_linear(b, rho.eta, h, cfg))}};
      }
      emit(common.out, dump(j));
    } else if (evolve->parsed()) {
      const CovarianceMap e0 = covariance_from_json(read_json_file(eta0_path));
      const CovarianceMap e1 = covariance_from_json(read_json_file(eta1_path));
      std::vector<Matrix> bs;
      for (const auto& p : b_paths) bs.push_back(matrix_from_json(read_json_file(p)));
      std::optional<double> d;
      if (delta > 0.0) d = delta;
      std::cerr << "evolve: " << ts.size() << " x " << bs.size() << " grid\n";
      const BurgersReport r = burgers_sweep(CovariancePath::affine(e0, e1), bs, ts, cfg, d);
      std::cerr << "evolve: max fd_check " << r.max_fd_check << ", halving ratio " << r.halving_ratio << '\n';
      emit(common.out, dump(to_json(r)));
    } else if (subord->parsed()) {
      const CovarianceMap e0 = covariance_from_json(read_json_file(eta0_path));
      const CovarianceMap e1 = covariance_from_json(read_json_file(eta1_path));
      const HalfPlanePoint b0 = HalfPlanePoint::certify(matrix_from_json(read_json_file(b0m_path)));
      const Matrix b = matrix_from_json(read_json_file(b_path));
      const SubordinationResult r = subordinate(b0, b, e0, e1, cfg, {sigma_prime, sigma});
      for (const auto& w : r.warnings) std::cerr << "subordinate: warning: " << w << '\n';
      emit(common.out, dump(to_json(r)));
    } else if (verify->parsed()) {
      SuiteOptions so;
      so.instances = instances;
      so.seed = seed;
      so.threads = common.threads;
      so.harness.solver = cfg;
      if (!eps_grid.empty()) so.harness.eps_grid = eps_grid;
      if (verify_grid_set) so.harness.grid_points = grid;
      std::cerr << "verify: suite " << suite << ", " << instances << " instances, seed " << seed << '\n';
      const std::vector<BoundReport> reps = run_suite(suite, so);
      bool ok = true;
      for (const auto& r : reps) {
        std::cerr << "  " << r.name << ": " << (r.pass() ? "pass" : "FAIL") << " (margin " << r.worst_margin
                  << ", slack " << r.slack.total() << ")\n";
        ok = ok && r.pass();
      }
      emit(common.out, dump(to_json(reps)));
      return ok ? kOk : kVerifyFail;
    } else if (randmat->parsed()) {
      KroneckerModel model = model_from_json(read_json_file(model_path));
      if (randmat->count("--seed") > 0) model.seed = seed;
      std::cerr << "randmat: N = " << model.n << ", " << model.trials << " trials, seed " << model.seed << '\n';
      const MonteCarloReport r = validate_against_dos(model, epsilon, cfg, grid, common.threads);
      std::cerr << "randmat: levy distance " << r.levy << '\n';
      emit(common.out, dump(to_json(r)));
    }
  } catch (const NonConvergence& e) {
    std::cerr << "error: non-convergence: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kNonConvergence;
  } catch (const NumericFailure& e) {
    std::cerr << "error: numeric failure: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const SingularMatrixError& e) {
    std::cerr << "error: numeric failure: " << e.what() << '\n';
    return kNonConvergence;
  } catch (const std::invalid_argument& e) {  // input, dimension and precondition errors
    std::cerr << "error: invalid input: " << e.what() << '\n';
    return kInput;
  } catch (const std::domain_error& e) {
    std::cerr << "error: invalid input: " << e.what() << '\n';
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInput;
  }
  return kOk;
}
