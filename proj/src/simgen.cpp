#include "scidnet/simgen.hpp"

#include <algorithm>
#include <cmath>

namespace scidnet {

std::string to_string(Link link) {
  switch (link) {
    case Link::SingleIndexPolynomial: return "single_index_polynomial";
    case Link::SingleIndexRelu: return "single_index_relu";
    case Link::NonlinearAdditive: return "nonlinear_additive";
    case Link::NonlinearInteraction: return "nonlinear_interaction";
    case Link::Linear: return "linear";
  }
  return "unknown";
}

Link parse_link(const std::string& name) {
  for (Link l : {Link::SingleIndexPolynomial, Link::SingleIndexRelu, Link::NonlinearAdditive,
                 Link::NonlinearInteraction, Link::Linear}) {
    if (to_string(l) == name) return l;
  }
  throw ConfigError("design.link: unknown link '" + name + "'");
}

std::string to_string(FeatureDist dist) {
  return dist == FeatureDist::Gaussian ? "gaussian" : "student_t";
}

FeatureDist parse_feature_dist(const std::string& name) {
  if (name == "gaussian") return FeatureDist::Gaussian;
  if (name == "student_t") return FeatureDist::StudentT;
  throw ConfigError("design.feature_dist: unknown distribution '" + name + "'");
}

IndexList default_support(Link link) {
  if (link == Link::SingleIndexPolynomial || link == Link::SingleIndexRelu) {
    return {49, 149, 249, 349, 449};
  }
  return {99, 199, 299, 399, 499};
}

IndexList SimDesign::support() const { return s0.empty() ? default_support(link) : s0; }

void SimDesign::validate() const {
  if (n < 2) throw ConfigError("design.n: must be at least 2");
  if (p < 1) throw ConfigError("design.p: must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("design.rho: must lie in [0, 1)");
  if (sigma2.has_value() == snr.has_value()) {
    throw ConfigError("design: exactly one of sigma2 and snr must be set");
  }
  if (sigma2 && !(*sigma2 >= 0.0)) throw ConfigError("design.sigma2: must be non-negative");
  if (snr && !(*snr > 0.0)) throw ConfigError("design.snr: must be positive");
  if (feature_dist == FeatureDist::StudentT && !(df > 0.0)) {
    throw ConfigError("design.df: must be positive");
  }
  const IndexList s = support();
  if (s.empty()) throw ConfigError("design.s0: must not be empty");
  for (Index k : s) {
    if (k >= p) throw ConfigError("design.s0: index " + std::to_string(k + 1) + " exceeds p");
  }
  if ((link == Link::NonlinearAdditive || link == Link::NonlinearInteraction) && s.size() != 5) {
    throw ConfigError("design.s0: additive and interaction links need exactly five indices");
  }
}

double polynomial_link(double t) { return t * t * t / 10.0 + 3.0 * t / 10.0; }
double relu_link(double t) { return std::max(0.0, t); }

Matrix toeplitz_cholesky(Index p, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("toeplitz_cholesky: rho must lie in [0, 1)");
  if (p < 1) throw ConfigError("toeplitz_cholesky: p must be positive");
  // Closed form for the AR(1) structure: L(i,0) = rho^i and
  // L(i,j) = rho^{i-j} sqrt(1 - rho^2) for 1 <= j <= i.
  const auto pp = static_cast<Eigen::Index>(p);
  const double s = std::sqrt(1.0 - rho * rho);
  Matrix l = Matrix::Zero(pp, pp);
  for (Eigen::Index i = 0; i < pp; ++i) {
    l(i, 0) = std::pow(rho, static_cast<double>(i));
    for (Eigen::Index j = 1; j <= i; ++j) l(i, j) = std::pow(rho, static_cast<double>(i - j)) * s;
  }
  return l;
}

Matrix ar1_gaussian(Index n, Index p, double rho, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double s = std::sqrt(1.0 - rho * rho);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double prev = normal(rng);
    x(i, 0) = prev;
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
      prev = rho * prev + s * normal(rng);
      x(i, j) = prev;
    }
  }
  return x;
}

Simulation generate(const SimDesign& design) {
  design.validate();
  Rng rng(derive_seed(design.seed, tags::kSimulate));
  std::normal_distribution<double> normal(0.0, 1.0);

  Simulation sim;
  const IndexList s0 = design.support();
  Matrix x = ar1_gaussian(design.n, design.p, design.rho, rng);
  if (design.feature_dist == FeatureDist::StudentT) {
    std::chi_squared_distribution<double> chi2(design.df);
    for (Eigen::Index i = 0; i < x.rows(); ++i) x.row(i) *= std::sqrt(design.df / chi2(rng));
  }

  const auto n = static_cast<Eigen::Index>(design.n);
  sim.beta = Vector::Zero(static_cast<Eigen::Index>(design.p));
  Vector g(n);
  auto col = [&](std::size_t k) { return x.col(static_cast<Eigen::Index>(s0[k])); };

  switch (design.link) {
    case Link::SingleIndexPolynomial:
    case Link::SingleIndexRelu: {
      std::bernoulli_distribution coin(0.5);
      for (Index k : s0) {
        const double u = coin(rng) ? 1.0 : -1.0;
        sim.beta(static_cast<Eigen::Index>(k)) = u * design.beta0 + std::sqrt(0.1) * normal(rng);
      }
      const Vector index = x * sim.beta;
      g = design.link == Link::SingleIndexPolynomial ? index.unaryExpr(&polynomial_link)
                                                     : index.unaryExpr(&relu_link);
      break;
    }
    case Link::Linear: {
      for (Index k : s0) {
        sim.beta(static_cast<Eigen::Index>(k)) = design.beta0 + std::sqrt(0.1) * normal(rng);
      }
      g = x * sim.beta;
      break;
    }
    case Link::NonlinearAdditive: {
      const Vector relu_cube = col(4).array().cube().max(0.0).matrix();
      g = (2.0 * col(0).array() + 2.0 * col(1).array().cube() + col(2).array().exp() +
           6.0 * col(3).array().sin() + 2.0 * relu_cube.array())
              .matrix();
      break;
    }
    case Link::NonlinearInteraction: {
      g = (2.0 * col(0).array() + 2.0 * col(1).array().cube() + col(2).array().exp() +
           6.0 * col(3).array() * col(4).array())
              .matrix();
      break;
    }
  }

  if (design.snr) {
    const double var_g = (g.array() - g.mean()).square().sum() / static_cast<double>(n - 1);
    sim.sigma2 = var_g / *design.snr;
  } else {
    sim.sigma2 = *design.sigma2;
  }
  const double sd = std::sqrt(sim.sigma2);
  Vector y = g;
  for (Eigen::Index i = 0; i < n; ++i) y(i) += sd * normal(rng);

  sim.data.x = std::move(x);
  sim.data.y = std::move(y);
  sim.data.feature_names.reserve(design.p);
  for (Index j = 0; j < design.p; ++j) sim.data.feature_names.push_back("x" + std::to_string(j + 1));
  sim.signal = std::move(g);
  sim.truth.s0 = s0;
  std::sort(sim.truth.s0.begin(), sim.truth.s0.end());
  return sim;
}

}  // namespace scidnet
