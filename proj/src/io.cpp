#include "mde/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace mde {

namespace {

// Runs a parser and rethrows any failure as InputError with context.
template <class F>
auto parse(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return nullptr;
  return x > 0 ? "inf" : "-inf";
}

Complex entry_from_json(const Json& e) {
  if (e.is_number()) return {e.get<double>(), 0.0};
  if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
    return {e[0].get<double>(), e[1].get<double>()};
  throw InputError("matrix entry must be a number or [re, im]");
}

std::string kind_name(CovarianceMap::Kind k) {
  switch (k) {
    case CovarianceMap::Kind::Kraus: return "kraus";
    case CovarianceMap::Kind::Sandwich: return "sandwich";
    case CovarianceMap::Kind::Choi: return "choi";
  }
  return "choi";
}

}  // namespace

Json to_json(const Matrix& a) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < a.dim(); ++j) row.push_back({a(i, j).real(), a(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return {{"dim", a.dim()}, {"entries", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j) {
  return parse("matrix", [&] {
    const Json& rows = j.at("entries");
    if (!rows.is_array() || rows.empty()) throw InputError("entries must be a nonempty array");
    const std::size_t m = rows.size();
    if (j.contains("dim") && j.at("dim").get<std::size_t>() != m) throw InputError("dim does not match entries");
    Matrix a(m);
    for (std::size_t r = 0; r < m; ++r) {
      if (!rows[r].is_array() || rows[r].size() != m) throw InputError("matrix must be square");
      for (std::size_t c = 0; c < m; ++c) a(r, c) = entry_from_json(rows[r][c]);
    }
    if (!a.is_finite()) throw InputError("non-finite entry");
    return a;
  });
}

Hermitian hermitian_from_json(const Json& j) {
  const Matrix a = matrix_from_json(j);
  const double scale = std::max(1.0, frobenius_norm(a));
  if (frobenius_norm(a - a.adjoint()) > 1e-12 * scale) throw InputError("matrix must be Hermitian");
  return Hermitian::real_part(a);
}

Json to_json(const CovarianceMap& eta) {
  if (eta.level() != 1) throw std::invalid_argument("to_json: amplified maps are not serialized");
  Json mats = Json::array();
  for (const auto& a : eta.operators()) mats.push_back(to_json(a));
  return {{"dim", eta.dim()},
          {"repr", {{"kind", kind_name(eta.kind())}, {"matrices", std::move(mats)}}},
          {"positivity_class", to_string(eta.positivity())}};
}

CovarianceMap covariance_from_json(const Json& j) {
  return parse("covariance", [&] {
    const Json& repr = j.at("repr");
    const std::string kind = repr.at("kind").get<std::string>();
    const Json& mats = repr.at("matrices");
    if (!mats.is_array() || mats.empty()) throw InputError("repr.matrices must be a nonempty array");
    CovarianceMap eta;
    if (kind == "kraus") {
      std::vector<Matrix> ops;
      for (const auto& m : mats) ops.push_back(matrix_from_json(m));
      eta = CovarianceMap::kraus(std::move(ops));
    } else if (kind == "sandwich") {
      std::vector<Hermitian> ops;
      for (const auto& m : mats) ops.push_back(hermitian_from_json(m));
      eta = CovarianceMap::sandwich(std::move(ops));
    } else if (kind == "choi") {
      if (mats.size() != 1) throw InputError("a choi representation holds exactly one matrix");
      if (!j.contains("positivity_class")) throw InputError("choi maps need a declared positivity_class");
      eta = CovarianceMap::choi(matrix_from_json(mats[0]),
                                positivity_from_string(j.at("positivity_class").get<std::string>()));
    } else {
      throw InputError("unknown repr.kind '" + kind + "'");
    }
    if (j.contains("dim") && j.at("dim").get<std::size_t>() != eta.dim()) throw InputError("dim does not match repr");
    if (kind != "choi" && j.contains("positivity_class") &&
        positivity_from_string(j.at("positivity_class").get<std::string>()) != PositivityClass::CompletelyPositive)
      throw InputError("kraus and sandwich maps are completely positive; positivity_class must be CP");
    return eta;
  });
}

Json to_json(const DataPair& rho) {
  return {{"b0", to_json(rho.b0.matrix())}, {"eta", to_json(rho.eta)}, {"phi", to_json(rho.phi.density().matrix())}};
}

DataPair data_pair_from_json(const Json& j) {
  return parse("data pair", [&] {
    std::optional<StateFunctional> phi;
    if (j.contains("phi") && !j.at("phi").is_null()) phi = StateFunctional(hermitian_from_json(j.at("phi")));
    return DataPair(hermitian_from_json(j.at("b0")), covariance_from_json(j.at("eta")), phi);
  });
}

Json to_json(const DiscreteMeasure& mu) { return {{"atoms", mu.atoms()}, {"weights", mu.weights()}}; }

DiscreteMeasure measure_from_json(const Json& j) {
  return parse("measure", [&] {
    return DiscreteMeasure(j.at("atoms").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>());
  });
}

Json to_json(const KroneckerModel& model) {
  Json bs = Json::array();
  for (const auto& b : model.bs) bs.push_back(to_json(b.matrix()));
  return {{"b0", to_json(model.b0.matrix())},
          {"bs", std::move(bs)},
          {"N", model.n},
          {"trials", model.trials},
          {"seed", model.seed}};
}

KroneckerModel model_from_json(const Json& j) {
  return parse("model", [&] {
    KroneckerModel m;
    m.b0 = hermitian_from_json(j.at("b0"));
    if (j.contains("bs"))
      for (const auto& b : j.at("bs")) m.bs.push_back(hermitian_from_json(b));
    m.n = j.value("N", std::size_t{1});
    m.trials = j.value("trials", 1);
    m.seed = j.value("seed", std::uint64_t{0});
    m.validate();
    return m;
  });
}

Json to_json(const BoundReport& r) {
  return {{"bound_name", r.name},
          {"instances", r.instances},
          {"worst_margin", num(r.worst_margin)},
          {"slack_budget", num(r.slack.total())},
          {"slack_components",
           {{"quantization", num(r.slack.quantization)}, {"tail", num(r.slack.tail)}, {"solver", num(r.slack.solver)}}},
          {"worst_bound", num(r.worst_bound)},
          {"worst_observed", num(r.worst_observed)},
          {"worst_instance", r.worst_instance},
          {"min_margin", num(r.min_margin)},
          {"includes_fixture", r.includes_fixture},
          {"skipped", r.skipped},
          {"notes", r.notes},
          {"verdict", r.pass() ? "pass" : "fail"}};
}

Json to_json(const std::vector<BoundReport>& reports) {
  Json a = Json::array();
  for (const auto& r : reports) a.push_back(to_json(r));
  return a;
}

Json to_json(const MonteCarloReport& r) {
  return {{"levy", num(r.levy)},
          {"N", r.n},
          {"trials", r.trials},
          {"seed", r.seed},
          {"epsilon", r.epsilon},
          {"grid_points", r.grid_points},
          {"window", {r.window.lo, r.window.hi}},
          {"slack", {{"quantization", num(r.slack.quantization)}, {"tail", num(r.slack.tail)}, {"solver", num(r.slack.solver)}}}};
}

Json to_json(const DysonSolution& s) {
  return {{"w", to_json(s.w)},
          {"residual_norm", num(s.residual_norm)},
          {"error_bound", s.error_bound ? num(*s.error_bound) : Json(nullptr)},
          {"iterations", s.iterations},
          {"gamma", num(s.gamma)},
          {"inverse_condition", num(s.inverse_condition)},
          {"residual_history", s.residual_history},
          {"warnings", s.warnings}};
}

Json to_json(const BurgersReport& r) {
  Json samples = Json::array();
  for (const auto& s : r.samples)
    samples.push_back({{"t", s.t},
                       {"b", to_json(s.b)},
                       {"g", to_json(s.g)},
                       {"g_dot", to_json(s.g_dot)},
                       {"fd_check", num(s.fd_check)},
                       {"fd_check_half", num(s.fd_check_half)}});
  return {{"delta", r.delta},
          {"max_fd_check", num(r.max_fd_check)},
          {"max_fd_check_half", num(r.max_fd_check_half)},
          {"halving_ratio", num(r.halving_ratio)},
          {"samples", std::move(samples)}};
}

Json to_json(const SubordinationResult& r) {
  return {{"omega", to_json(r.omega)},
          {"deviation", num(r.deviation)},
          {"deviation_bound", num(r.deviation_bound)},
          {"consistency", num(r.consistency)},
          {"consistency_budget", num(r.consistency_budget)},
          {"in_domain", r.in_domain},
          {"warnings", r.warnings}};
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string density_csv(const SpectralDensity& sd) {
  std::string out = "t,density\n";
  for (std::size_t i = 0; i < sd.grid.size(); ++i) {
    out += format_double(sd.grid[i]);
    out += ',';
    out += format_double(sd.values[i]);
    out += '\n';
  }
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return Json::parse(ss.str());
  } catch (const Json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  const fs::path tmp = dir / ("." + target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move output into '" + path + "': " + ec.message());
  }
}

}  // namespace mde
