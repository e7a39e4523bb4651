#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "scidnet/config.hpp"
#include "scidnet/dataset.hpp"
#include "scidnet/simgen.hpp"

using namespace scidnet;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "scidnet_data_model";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << body;
  return path;
}

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("load_csv parses header and moves the response out") {
  const auto path = temp_file("ok.csv", "y,a,b\n1,2,3\n4,5,6\n7,8,9\n");
  const Dataset d = load_csv(path, "y");
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  REQUIRE(d.feature_names.size() == 2);
  CHECK(d.feature_names[0] == "a");
  CHECK(d.feature_names[1] == "b");
  CHECK(d.y(2) == 7.0);
  CHECK(d.x(1, 0) == 5.0);
  CHECK(d.x(2, 1) == 9.0);
}

TEST_CASE("load_csv keeps feature order when the response is in the middle") {
  const auto path = temp_file("mid.csv", "a,resp,b\n1,2,3\n4,5,6\n");
  const Dataset d = load_csv(path, "resp");
  CHECK(d.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(d.y(1) == 5.0);
  CHECK(d.x(1, 1) == 6.0);
}

TEST_CASE("load_csv reports the location of a blank cell") {
  const auto path = temp_file("blank.csv", "y,a,b\n1,2,3\n4,,6\n");
  const std::string msg = error_of([&] { load_csv(path, "y"); });
  CHECK(msg.find("non-numeric cell at row 2, col 2") != std::string::npos);
}

TEST_CASE("load_csv rejects text and non-finite cells") {
  CHECK(error_of([&] { load_csv(temp_file("txt.csv", "y,a\n1,abc\n2,3\n"), "y"); })
            .find("non-numeric cell") != std::string::npos);
  CHECK(error_of([&] { load_csv(temp_file("nan.csv", "y,a\n1,nan\n2,3\n"), "y"); })
            .find("non-numeric cell") != std::string::npos);
}

TEST_CASE("load_csv error cases") {
  CHECK(error_of([&] { load_csv(temp_file("one.csv", "y,a\n1,2\n"), "y"); }).find("n < 2") !=
        std::string::npos);
  CHECK(error_of([&] { load_csv(temp_file("noresp.csv", "q,a\n1,2\n3,4\n"), "y"); })
            .find("response column") != std::string::npos);
  CHECK(error_of([&] { load_csv("/nonexistent/file.csv", "y"); }).find("cannot open") != std::string::npos);
  CHECK(error_of([&] { load_csv(temp_file("ragged.csv", "y,a\n1,2\n3\n"), "y"); }) != "");
}

TEST_CASE("validate accepts a well formed dataset") {
  Dataset d;
  d.x = Matrix::Ones(3, 2);
  d.y = Vector::Zero(3);
  CHECK_NOTHROW(validate(d));
}

TEST_CASE("validate names the NaN response index") {
  Dataset d;
  d.x = Matrix::Ones(4, 2);
  d.y = Vector::Zero(4);
  d.y(2) = std::numeric_limits<double>::quiet_NaN();
  const std::string msg = error_of([&] { validate(d); });
  CHECK(msg.find("response") != std::string::npos);
  CHECK(msg.find("3") != std::string::npos);
}

TEST_CASE("validate rejects an empty feature matrix") {
  Dataset d;
  d.x = Matrix(3, 0);
  d.y = Vector::Zero(3);
  CHECK(error_of([&] { validate(d); }).find("no features") != std::string::npos);
}

TEST_CASE("validate rejects length mismatch, tiny n and non-finite features") {
  Dataset d;
  d.x = Matrix::Ones(3, 2);
  d.y = Vector::Zero(2);
  CHECK(error_of([&] { validate(d); }) != "");
  d.x = Matrix::Ones(1, 2);
  d.y = Vector::Zero(1);
  CHECK(error_of([&] { validate(d); }).find("n < 2") != std::string::npos);
  d.x = Matrix::Ones(3, 2);
  d.y = Vector::Zero(3);
  d.x(1, 1) = std::numeric_limits<double>::infinity();
  CHECK(error_of([&] { validate(d); }) != "");
}

TEST_CASE("CSV write/read round trip is bit identical") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.x.resize(25, 4);
  d.y.resize(25);
  for (Eigen::Index i = 0; i < 25; ++i) {
    d.y(i) = normal(rng) * 1e3;
    for (Eigen::Index j = 0; j < 4; ++j) d.x(i, j) = normal(rng) * std::pow(10.0, static_cast<double>(j) - 5.0);
  }
  d.x(0, 0) = 0.1;
  d.x(1, 0) = -0.0;
  d.x(2, 0) = 1e-300;
  d.x(3, 0) = 123456789.0;
  d.feature_names = {"f1", "f2", "f3", "f4"};
  const auto dir = std::filesystem::temp_directory_path() / "scidnet_data_model";
  std::filesystem::create_directories(dir);
  write_csv(d, dir / "rt.csv", "resp");
  const Dataset back = load_csv(dir / "rt.csv", "resp");
  CHECK(back.feature_names == d.feature_names);
  for (Eigen::Index i = 0; i < 25; ++i) {
    CHECK(back.y(i) == d.y(i));
    for (Eigen::Index j = 0; j < 4; ++j) CHECK(back.x(i, j) == d.x(i, j));
  }
  // Reading and writing again reproduces the same bytes.
  write_csv(back, dir / "rt2.csv", "resp");
  std::ifstream a(dir / "rt.csv"), b(dir / "rt2.csv");
  const std::string sa((std::istreambuf_iterator<char>(a)), {});
  const std::string sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("format_double gives the shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("simulated datasets always validate") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    for (Link link : {Link::SingleIndexPolynomial, Link::SingleIndexRelu, Link::NonlinearAdditive,
                      Link::NonlinearInteraction, Link::Linear}) {
      SimDesign design;
      design.n = 20;
      design.p = 600;
      design.link = link;
      design.seed = seed;
      design.feature_dist = seed % 2 ? FeatureDist::StudentT : FeatureDist::Gaussian;
      CHECK_NOTHROW(validate(generate(design).data));
    }
  }
}

TEST_CASE("RunConfig defaults validate and ranges are enforced") {
  RunConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.merge_threshold_r == 0.9);
  CHECK(c.hierarchy_m == 10.0);
  CHECK(c.bootstrap_b == 50);
  CHECK(c.fdr_level_q == 0.15);
  CHECK_FALSE(c.kappa.has_value());
  CHECK_FALSE(c.active_set_size.has_value());

  auto rejects = [](auto mutate, const std::string& field) {
    RunConfig bad;
    mutate(bad);
    try {
      bad.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what()).rfind(field, 0) == 0;
    }
    return false;
  };
  CHECK(rejects([](RunConfig& r) { r.fdr_level_q = 1.5; }, "fdr_level_q"));
  CHECK(rejects([](RunConfig& r) { r.fdr_level_q = 0.0; }, "fdr_level_q"));
  CHECK(rejects([](RunConfig& r) { r.merge_threshold_r = 0.0; }, "merge_threshold_r"));
  CHECK(rejects([](RunConfig& r) { r.path_multiplier = 1.0; }, "path_multiplier"));
  CHECK(rejects([](RunConfig& r) { r.bootstrap_b = 0; }, "bootstrap_b"));
  CHECK(rejects([](RunConfig& r) { r.kappa = -1.0; }, "kappa"));
  CHECK(rejects([](RunConfig& r) { r.cv_folds = 1; }, "cv_folds"));
  CHECK(rejects([](RunConfig& r) { r.learning_rate = 0.0; }, "learning_rate"));
  CHECK(rejects([](RunConfig& r) { r.active_set_size = 0; }, "active_set_size"));
}
