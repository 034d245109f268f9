#pragma once

// JSON and CSV formats for data pairs, covariance maps, models and reports, plus atomic file
// output.
//
//   matrix:      {"dim": m, "entries": [[[re, im], ...], ...]}  (a bare number is a real entry)
//   covariance:  {"dim": m, "repr": {"kind": "kraus" | "sandwich" | "choi", "matrices": [...]},
//                 "positivity_class": "CP" | "TwoPositive" | "PositiveOnly" | "Indefinite"}
//   data pair:   {"b0": matrix, "eta": covariance, "phi": density matrix (optional)}
//   model:       {"b0": matrix, "bs": [matrix, ...], "N": n, "trials": t, "seed": s}
//   measure:     {"atoms": [...], "weights": [...]}

#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "mde/algebra.hpp"
#include "mde/covariance.hpp"
#include "mde/evolution.hpp"
#include "mde/measures.hpp"
#include "mde/randmat.hpp"
#include "mde/verify.hpp"

namespace mde {

using Json = nlohmann::json;

/// Malformed or inconsistent input files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Json to_json(const Matrix& a);
Matrix matrix_from_json(const Json& j);
/// Requires exact conjugate symmetry up to 1e-12 relative.
Hermitian hermitian_from_json(const Json& j);

Json to_json(const CovarianceMap& eta);
CovarianceMap covariance_from_json(const Json& j);

Json to_json(const DataPair& rho);
DataPair data_pair_from_json(const Json& j);

Json to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const Json& j);

Json to_json(const KroneckerModel& model);
KroneckerModel model_from_json(const Json& j);

Json to_json(const BoundReport& r);
Json to_json(const std::vector<BoundReport>& reports);
Json to_json(const MonteCarloReport& r);
Json to_json(const DysonSolution& s);
Json to_json(const BurgersReport& r);
Json to_json(const SubordinationResult& r);

/// "t,density" rows with %.17g.
std::string density_csv(const SpectralDensity& sd);
std::string format_double(double x);

/// Parses a JSON file; every failure surfaces as InputError.
Json read_json_file(const std::string& path);
/// Writes to a temporary file in the same directory and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace mde
