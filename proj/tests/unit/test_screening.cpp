#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "scidnet/nonparanormal.hpp"
#include "scidnet/screening.hpp"
#include "scidnet/simgen.hpp"

using namespace scidnet;

namespace {

// Weighted L2 distance between the empirical characteristic function of the
// pairs and exp(-|t|^2/2), weight N(0, beta^2 I), by composite Simpson on
// a 201 x 201 grid over [-8, 8]^2.
double hz_quadrature(const Vector& a, const Vector& b, double beta) {
  const int pts = 201;
  const double lo = -8.0;
  const double h = 16.0 / (pts - 1);
  auto simpson = [&](int i) { return (i == 0 || i == pts - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  const double norm = 1.0 / (2.0 * std::numbers::pi * beta * beta);
  const double n = static_cast<double>(a.size());
  double total = 0.0;
  for (int i = 0; i < pts; ++i) {
    const double t1 = lo + i * h;
    for (int j = 0; j < pts; ++j) {
      const double t2 = lo + j * h;
      double re = 0.0;
      double im = 0.0;
      for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double arg = t1 * a(k) + t2 * b(k);
        re += std::cos(arg);
        im += std::sin(arg);
      }
      const double r2 = t1 * t1 + t2 * t2;
      re = re / n - std::exp(-0.5 * r2);
      im /= n;
      const double weight = norm * std::exp(-r2 / (2.0 * beta * beta));
      total += simpson(i) * simpson(j) * (re * re + im * im) * weight;
    }
  }
  return total * h * h / 9.0;
}

}  // namespace

TEST_CASE("bandwidth values") {
  CHECK(hz_bandwidth(400) == doctest::Approx(std::pow(500.0, 1.0 / 6.0) / std::sqrt(2.0)));
  CHECK(std::fabs(hz_bandwidth(400) - 1.9922) < 1e-3);
  CHECK(std::fabs(hz_bandwidth(1) - 0.7339) < 1e-4);
  for (Index n : {1, 5, 50, 1000}) CHECK(hz_bandwidth(2 * n) > hz_bandwidth(n));
}

TEST_CASE("statistic on degenerate samples") {
  for (double beta : {0.3, 1.0, 2.5}) {
    const double b2 = beta * beta;
    CHECK(hz_statistic(Vector::Zero(1), Vector::Zero(1), beta) ==
          doctest::Approx(1.0 - 2.0 / (1.0 + b2) + 1.0 / (1.0 + 2.0 * b2)).epsilon(1e-14));
  }
  CHECK(hz_statistic(Vector::Zero(2), Vector::Zero(2), 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(hz_statistic(Vector::Zero(2), Vector::Zero(3), 1.0), DataError);
}

TEST_CASE("closed form matches numerical quadrature on 50 random samples") {
  std::mt19937_64 rng(20240);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<int> size(1, 30);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = size(rng);
    Vector a(n), b(n);
    const double rho = (rep % 5) / 5.0;
    for (int i = 0; i < n; ++i) {
      a(i) = normal(rng);
      b(i) = rho * a(i) + std::sqrt(1.0 - rho * rho) * normal(rng);
    }
    const double beta = hz_bandwidth(static_cast<Index>(n));
    worst = std::max(worst, std::fabs(hz_statistic(a, b, beta) - hz_quadrature(a, b, beta)));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("statistic is symmetric, permutation invariant and non-negative") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    Vector a(40), b(40);
    for (int i = 0; i < 40; ++i) {
      a(i) = normal(rng);
      b(i) = 0.5 * a(i) + normal(rng);
    }
    const double beta = hz_bandwidth(40);
    const double w = hz_statistic(a, b, beta);
    CHECK(w >= 0.0);
    CHECK(hz_statistic(b, a, beta) == doctest::Approx(w).epsilon(1e-12));
    std::vector<int> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(hz_statistic(a(perm), b(perm), beta) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("auto active-set size and clamping") {
  CHECK(auto_active_size(400) == 133);
  CHECK(auto_active_size(300) == 105);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Dataset d;
  d.x.resize(30, 5);
  d.y.resize(30);
  for (Eigen::Index i = 0; i < 30; ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) d.x(i, j) = normal(rng);
    d.y(i) = normal(rng);
  }
  const TransformedDataset t = npn_transform(d);
  const ScreeningResult r = screen(t, Index{10});
  CHECK(r.active.size() == 5);
  CHECK(r.clamped);
  CHECK(r.requested_size == 10);
  const ScreeningResult r2 = screen(t, Index{3});
  CHECK(r2.active.size() == 3);
  CHECK_FALSE(r2.clamped);
  const ScreeningResult r3 = screen(t, std::nullopt);
  CHECK(r3.active.size() == 5);  // floor(60 / ln 30) = 17, capped at p
  CHECK_FALSE(r3.clamped);
  CHECK(r3.bandwidth == hz_bandwidth(30));
}

TEST_CASE("ranking is descending with ascending-index ties") {
  const Vector w = (Vector(6) << 0.2, 0.5, 0.2, 0.9, 0.5, 0.1).finished();
  CHECK(rank_by_statistic(w) == IndexList{3, 1, 4, 0, 2, 5});
}

TEST_CASE("perfectly dependent feature wins in at least 95 of 100 runs") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Dataset d;
    d.x.resize(200, 8);
    for (Eigen::Index i = 0; i < 200; ++i) {
      for (Eigen::Index j = 0; j < 8; ++j) d.x(i, j) = normal(rng);
    }
    d.y = d.x.col(2);
    const ScreeningResult r = screen(npn_transform(d), Index{1});
    if (r.active.front() == 2) ++wins;
  }
  CHECK(wins >= 95);
}

TEST_CASE("sure screening on the polynomial design") {
  int covered = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SimDesign design;
    design.n = 300;
    design.p = 500;
    design.beta0 = 4.0;
    design.sigma2 = 1.0;
    design.seed = seed;
    const Simulation sim = generate(design);
    const ScreeningResult r = screen(npn_transform(sim.data), std::nullopt);
    const bool all = std::all_of(sim.truth.s0.begin(), sim.truth.s0.end(), [&](Index k) {
      return std::find(r.active.begin(), r.active.end(), k) != r.active.end();
    });
    covered += all ? 1 : 0;
  }
  CHECK(covered >= 9);
}
