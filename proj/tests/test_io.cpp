#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mde/io.hpp"
#include "mde/random.hpp"

using namespace mde;

TEST_SUITE("io") {
  TEST_CASE("matrix round trip") {
    CounterRng rng(1);
    const Matrix a = ginibre(3, rng);
    CHECK(matrix_from_json(to_json(a)) == a);
    CHECK(matrix_from_json(Json::parse(R"({"entries": [[1, [0, 2]], [0, 3]]})"))(0, 1) == Complex(0, 2));
    CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"entries": [[1, 2]]})")), InputError);
    CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"entries": [[1, "x"], [0, 1]]})")), InputError);
    CHECK_THROWS_AS(matrix_from_json(Json::parse(R"({"dim": 3, "entries": [[1]]})")), InputError);
    CHECK_THROWS_AS(hermitian_from_json(Json::parse(R"({"entries": [[1, 2], [0, 1]]})")), InputError);
  }

  TEST_CASE("covariance round trip") {
    CounterRng rng(2);
    const CovarianceMap k = CovarianceMap::kraus({ginibre(2, rng), ginibre(2, rng)});
    const CovarianceMap k2 = covariance_from_json(to_json(k));
    const Matrix b = ginibre(2, rng);
    CHECK(k2.apply(b) == k.apply(b));
    const CovarianceMap ce = covariance_from_json(to_json(CovarianceMap::choi_example()));
    CHECK(ce.positivity() == PositivityClass::TwoPositive);
    CHECK(ce.apply(Matrix::identity(3)) == CovarianceMap::choi_example().apply(Matrix::identity(3)));
    Json bad = to_json(CovarianceMap::choi_example());
    bad.erase("positivity_class");
    CHECK_THROWS_AS(covariance_from_json(bad), InputError);
    Json wrong = to_json(k);
    wrong["repr"]["kind"] = "lindblad";
    CHECK_THROWS_AS(covariance_from_json(wrong), InputError);
    wrong = to_json(k);
    wrong["positivity_class"] = "PositiveOnly";
    CHECK_THROWS_AS(covariance_from_json(wrong), InputError);
  }

  TEST_CASE("data pair, model and measure") {
    CounterRng rng(3);
    const DataPair rho(gue(2, rng), CovarianceMap::sandwich({gue(2, rng)}), StateFunctional(random_density(2, rng)));
    const DataPair r2 = data_pair_from_json(to_json(rho));
    CHECK(r2.b0 == rho.b0);
    CHECK(r2.phi.density() == rho.phi.density());
    Json no_phi = to_json(rho);
    no_phi.erase("phi");
    CHECK(data_pair_from_json(no_phi).phi.density() == StateFunctional::normalized_trace(2).density());

    KroneckerModel m;
    m.b0 = gue(2, rng);
    m.bs = {gue(2, rng)};
    m.n = 30;
    m.trials = 2;
    m.seed = 99;
    const KroneckerModel m2 = model_from_json(to_json(m));
    CHECK(m2.sample(1) == m.sample(1));
    Json bad = to_json(m);
    bad["N"] = 0;
    CHECK_THROWS_AS(model_from_json(bad), InputError);

    const DiscreteMeasure mu({0.1, -0.3}, {0.25, 0.75});
    const DiscreteMeasure mu2 = measure_from_json(to_json(mu));
    CHECK(mu2.atoms() == mu.atoms());
    CHECK(mu2.weights() == mu.weights());
    CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"atoms": [0], "weights": [0.5]})")), InputError);
  }

  TEST_CASE("CSV uses round-trip decimal") {
    SpectralDensity sd;
    sd.grid = {0.1, 1.0 / 3.0};
    sd.values = {2.0 / 3.0, 1e-300};
    const std::string csv = density_csv(sd);
    CHECK(csv.rfind("t,density\n", 0) == 0);
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(csv.find(format_double(2.0 / 3.0)) != std::string::npos);
  }

  TEST_CASE("reports serialize verdicts") {
    BoundReport r;
    r.name = "lipschitz";
    r.add(1.0, 0.5, {});
    const Json j = to_json(r);
    CHECK(j["verdict"] == "pass");
    CHECK(j["bound_name"] == "lipschitz");
    CHECK(j["worst_margin"].get<double>() == doctest::Approx(0.5));
    r.add(1.0, 2.0, {});
    CHECK(to_json(r)["verdict"] == "fail");
  }

  TEST_CASE("files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "mde_io_test";
    fs::create_directories(dir);
    const std::string path = (dir / "out.json").string();
    write_atomic(path, "{\"a\": 1}");
    CHECK(read_json_file(path)["a"] == 1);
    write_atomic(path, "[]");
    CHECK(read_json_file(path).is_array());
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    {
      std::ofstream(dir / "bad.json") << "{not json";
    }
    CHECK_THROWS_AS(read_json_file((dir / "bad.json").string()), InputError);
    CHECK_THROWS_AS(read_json_file((dir / "missing.json").string()), InputError);
    fs::remove_all(dir);
  }
}
