#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "scidnet/common.hpp"
#include "scidnet/dataset.hpp"
#include "scidnet/rng.hpp"

namespace scidnet {

enum class Link { SingleIndexPolynomial, SingleIndexRelu, NonlinearAdditive, NonlinearInteraction, Linear };
enum class FeatureDist { Gaussian, StudentT };

std::string to_string(Link link);
Link parse_link(const std::string& name);
std::string to_string(FeatureDist dist);
FeatureDist parse_feature_dist(const std::string& name);

struct SimDesign {
  Index n = 400;
  Index p = 1000;
  double rho = 0.95;
  Link link = Link::SingleIndexPolynomial;
  IndexList s0;  // 0-based; empty selects the link's default support
  double beta0 = 2.0;
  std::optional<double> sigma2 = 1.0;
  std::optional<double> snr;
  FeatureDist feature_dist = FeatureDist::Gaussian;
  double df = 5.0;
  std::uint64_t seed = 0;

  /// Support actually used: `s0`, or the default for the link.
  IndexList support() const;
  void validate() const;
};

/// Single-index links use {50,150,250,350,450}, the others
/// {100,200,300,400,500} (1-based positions).
IndexList default_support(Link link);

/// Polynomial single-index link x^3/10 + 3x/10.
double polynomial_link(double t);
double relu_link(double t);

struct Simulation {
  Dataset data;
  TruthSpec truth;
  Vector beta;        // length p; zero for links without coefficients
  Vector signal;      // g evaluated on the sample
  double sigma2 = 0.0;
};

/// Lower-triangular factor of the AR(1) Toeplitz matrix rho^{|i-j|}.
Matrix toeplitz_cholesky(Index p, double rho);

/// n draws of the AR(1)-correlated Gaussian vector, equivalent to Z L'.
Matrix ar1_gaussian(Index n, Index p, double rho, Rng& rng);

Simulation generate(const SimDesign& design);

}  // namespace scidnet
