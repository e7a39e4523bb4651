#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "scidnet/simgen.hpp"

using namespace scidnet;

namespace {

double sample_var(const Vector& v) {
  return (v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1);
}

}  // namespace

TEST_CASE("toeplitz_cholesky small cases") {
  const Matrix one = toeplitz_cholesky(1, 0.7);
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) == 1.0);
  const Matrix two = toeplitz_cholesky(2, 0.5);
  CHECK(two(0, 0) == 1.0);
  CHECK(two(0, 1) == 0.0);
  CHECK(two(1, 0) == 0.5);
  CHECK(two(1, 1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
  CHECK_THROWS_AS(toeplitz_cholesky(3, 1.0), ConfigError);
  CHECK_THROWS_AS(toeplitz_cholesky(0, 0.5), ConfigError);
}

TEST_CASE("toeplitz_cholesky reconstructs the AR(1) covariance") {
  for (double rho : {0.0, 0.5, 0.95}) {
    const Matrix l = toeplitz_cholesky(50, rho);
    const Matrix s = l * l.transpose();
    double err = 0.0;
    for (Eigen::Index i = 0; i < 50; ++i) {
      for (Eigen::Index j = 0; j < 50; ++j) {
        err = std::max(err, std::fabs(s(i, j) - std::pow(rho, std::abs(static_cast<double>(i - j)))));
        if (j > i) CHECK(l(i, j) == 0.0);
      }
    }
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("ar1_gaussian equals standard draws times the Cholesky factor") {
  Rng a(5);
  const Matrix x = ar1_gaussian(20, 8, 0.8, a);
  Rng b(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z(20, 8);
  for (Eigen::Index i = 0; i < 20; ++i) {
    for (Eigen::Index j = 0; j < 8; ++j) z(i, j) = normal(b);
  }
  const Matrix ref = z * toeplitz_cholesky(8, 0.8).transpose();
  CHECK((x - ref).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("independent design has identity covariance") {
  SimDesign d;
  d.n = 2000;
  d.p = 10;
  d.rho = 0.0;
  d.s0 = {0, 1};
  d.seed = 3;
  const Simulation sim = generate(d);
  const Matrix& x = sim.data.x;
  const Matrix c = (x.rowwise() - x.colwise().mean()).transpose() * (x.rowwise() - x.colwise().mean()) /
                   static_cast<double>(d.n - 1);
  CHECK((c - Matrix::Identity(10, 10)).cwiseAbs().maxCoeff() <= 0.15);
}

TEST_CASE("lag-one correlation matches rho") {
  SimDesign d;
  d.n = 5000;
  d.p = 6;
  d.rho = 0.7;
  d.s0 = {0};
  d.seed = 8;
  const Simulation sim = generate(d);
  for (Eigen::Index j = 0; j + 1 < 6; ++j) {
    const Vector a = sim.data.x.col(j).array() - sim.data.x.col(j).mean();
    const Vector b = sim.data.x.col(j + 1).array() - sim.data.x.col(j + 1).mean();
    CHECK(std::fabs(a.dot(b) / (a.norm() * b.norm()) - 0.7) <= 0.05);
  }
}

TEST_CASE("noiseless linear design reproduces y exactly") {
  SimDesign d;
  d.n = 50;
  d.p = 3;
  d.link = Link::Linear;
  d.s0 = {0, 1, 2};
  d.sigma2 = 0.0;
  d.seed = 1;
  const Simulation sim = generate(d);
  const Vector fit = sim.data.x * sim.beta;
  CHECK(sim.data.y == fit);
  CHECK(sim.sigma2 == 0.0);
  for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::fabs(sim.beta(j) - d.beta0) < 2.0);
}

TEST_CASE("link functions") {
  CHECK(polynomial_link(1.0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(polynomial_link(-2.0) == doctest::Approx(-0.8 - 0.6).epsilon(1e-15));
  CHECK(relu_link(-2.0) == 0.0);
  CHECK(relu_link(3.5) == 3.5);
}

TEST_CASE("single-index designs put signal only on the support") {
  SimDesign d;
  d.n = 100;
  d.p = 500;
  d.beta0 = 4.0;
  d.seed = 2;
  const Simulation sim = generate(d);
  CHECK(sim.truth.s0 == IndexList{49, 149, 249, 349, 449});
  for (Eigen::Index j = 0; j < 500; ++j) {
    const bool in = std::find(sim.truth.s0.begin(), sim.truth.s0.end(), static_cast<Index>(j)) != sim.truth.s0.end();
    if (in) {
      CHECK(std::fabs(std::fabs(sim.beta(j)) - 4.0) < 1.5);
    } else {
      CHECK(sim.beta(j) == 0.0);
    }
  }
  const Vector g = (sim.data.x * sim.beta).unaryExpr(&polynomial_link);
  CHECK((g - sim.signal).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(sim.data.feature_names.front() == "x1");
  CHECK(sim.data.feature_names.back() == "x500");
}

TEST_CASE("additive and interaction links use the documented formulas") {
  SimDesign d;
  d.n = 30;
  d.p = 500;
  d.sigma2 = 0.0;
  d.seed = 4;
  d.link = Link::NonlinearAdditive;
  const Simulation add = generate(d);
  CHECK(add.truth.s0 == IndexList{99, 199, 299, 399, 499});
  const Matrix& x = add.data.x;
  for (Eigen::Index i = 0; i < 30; ++i) {
    const double expect = 2.0 * x(i, 99) + 2.0 * std::pow(x(i, 199), 3) + std::exp(x(i, 299)) +
                          6.0 * std::sin(x(i, 399)) + 2.0 * std::max(0.0, std::pow(x(i, 499), 3));
    CHECK(add.data.y(i) == doctest::Approx(expect).epsilon(1e-12));
  }
  d.link = Link::NonlinearInteraction;
  const Simulation inter = generate(d);
  const Matrix& xi = inter.data.x;
  for (Eigen::Index i = 0; i < 30; ++i) {
    const double expect = 2.0 * xi(i, 99) + 2.0 * std::pow(xi(i, 199), 3) + std::exp(xi(i, 299)) +
                          6.0 * xi(i, 399) * xi(i, 499);
    CHECK(inter.data.y(i) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("snr calibration") {
  SimDesign d;
  d.n = 400;
  d.p = 500;
  d.link = Link::NonlinearAdditive;
  d.sigma2.reset();
  d.snr = 5.0;
  d.seed = 6;
  const Simulation sim = generate(d);
  CHECK(std::fabs(sample_var(sim.signal) / sim.sigma2 - 5.0) <= 0.05);
}

TEST_CASE("generation is deterministic per seed") {
  SimDesign d;
  d.n = 40;
  d.p = 60;
  d.s0 = {3, 10};
  d.seed = 99;
  const Simulation a = generate(d);
  const Simulation b = generate(d);
  CHECK(a.data.x == b.data.x);
  CHECK(a.data.y == b.data.y);
  CHECK(a.beta == b.beta);
  CHECK(a.truth.s0 == b.truth.s0);
  d.seed = 100;
  CHECK_FALSE(generate(d).data.x == a.data.x);
}

TEST_CASE("student t rows are heavier tailed") {
  SimDesign d;
  d.n = 4000;
  d.p = 3;
  d.rho = 0.0;
  d.s0 = {0};
  d.feature_dist = FeatureDist::StudentT;
  d.seed = 12;
  const Simulation sim = generate(d);
  const Vector c = sim.data.x.col(0);
  const double var = sample_var(c);
  // Variance of t with 5 degrees of freedom is 5/3.
  CHECK(var == doctest::Approx(5.0 / 3.0).epsilon(0.2));
  const double kurt = (c.array() - c.mean()).pow(4).mean() / (var * var);
  CHECK(kurt > 4.0);
}

TEST_CASE("design validation") {
  SimDesign d;
  d.p = 100;
  CHECK_THROWS_AS(d.validate(), ConfigError);  // default support exceeds p
  d.s0 = {5};
  CHECK_NOTHROW(d.validate());
  SimDesign bad = d;
  bad.rho = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.snr = 2.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.sigma2.reset();
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = d;
  bad.link = Link::NonlinearAdditive;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK(parse_link("linear") == Link::Linear);
  CHECK_THROWS_AS(parse_link("cubic"), ConfigError);
  CHECK(parse_feature_dist(to_string(FeatureDist::StudentT)) == FeatureDist::StudentT);
}
