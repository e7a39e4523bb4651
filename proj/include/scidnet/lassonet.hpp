#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "scidnet/common.hpp"
#include "scidnet/config.hpp"

namespace scidnet {

/// f(x) = theta' x + h(x), with h a one-hidden-layer ReLU network:
/// h(x) = w1' relu(w0' x + b0) + b1.
struct ResidualNet {
  Vector theta;  // m skip weights
  Matrix w0;     // m x K first-layer weights; row j feeds from input j
  Vector b0;     // K
  Vector w1;     // K
  double b1 = 0.0;

  Index inputs() const { return static_cast<Index>(theta.size()); }
  Index hidden() const { return static_cast<Index>(b0.size()); }
  bool all_finite() const;
};

struct NetGradient {
  Vector theta;
  Matrix w0;
  Vector b0;
  Vector w1;
  double b1 = 0.0;
};

/// Seeded uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation.
ResidualNet init_net(Index inputs, Index hidden, std::uint64_t seed);

double forward(const ResidualNet& net, const Vector& x);
Vector predict(const ResidualNet& net, const Matrix& x);

/// L = (1/n) sum (f(x_i) - y_i)^2.
double mse_loss(const ResidualNet& net, const Matrix& x, const Vector& y);

/// Returns L and fills the analytic gradient of L.
double loss_gradient(const ResidualNet& net, const Matrix& x, const Vector& y, NetGradient& grad);

struct HierProxResult {
  double theta = 0.0;
  Vector w;
};

/// Exact minimizer of 0.5 (t - theta)^2 + 0.5 ||W - w||^2 + step_lambda |t|
/// subject to ||W||_inf <= m_const |t|.
HierProxResult hier_prox(double theta, const Vector& w, double step_lambda, double m_const);

/// ||w0_j||_inf <= M |theta_j| for every input j (exact floating comparison).
bool satisfies_hierarchy(const ResidualNet& net, double m_const);

/// Unpenalised, unconstrained mini-batch training with momentum and
/// early stopping on a held-out slice.
ResidualNet train_dense(const Matrix& x, const Vector& y, const RunConfig& config,
                        std::uint64_t seed);

struct ImportanceScores {
  Vector lambda_hat;                 // 0 when a feature is never active
  std::vector<double> path_lambdas;  // visited penalties, increasing
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support_per_lambda;  // path x m
  Matrix theta_path;                 // path x m, standardized-input scale
  double lambda_dense = 0.0;
  bool reached_empty = false;
};

/// Column z-scores (1/n variance; constant columns map to zero) and a
/// centred/scaled response. Every LassoNet fit runs on this scale.
struct Standardizer {
  Vector x_mean;
  Vector x_scale;  // multiply after centring; 0 for constant columns
  double y_mean = 0.0;
  double y_scale = 1.0;  // divide after centring

  static Standardizer fit(const Matrix& x, const Vector& y);
  Matrix transform_x(const Matrix& x) const;
  Vector transform_y(const Vector& y) const;
  Vector inverse_y(const Vector& ys) const;
};

/// Trains the dense network, then raises lambda geometrically, running
/// proximal epochs at each level until every skip weight is zero (or the
/// cap is exceeded). lambda_hat_j is the largest visited lambda at which
/// feature j was still active.
ImportanceScores lasso_path(const Matrix& x, const Vector& y, const RunConfig& config,
                            std::uint64_t seed);

/// Writes rows (lambda, feature_index, theta_value), 1-based feature index.
void write_path_csv(const ImportanceScores& scores, const std::filesystem::path& path);

/// Network picked along the path by validation error.
struct LassoNetModel {
  Standardizer scale;
  ResidualNet net;
  double lambda = 0.0;
  IndexList support;
  double validation_mse = 0.0;

  Vector predict(const Matrix& x) const;
};

/// Prediction-optimal LassoNet: the last `validation_fraction` of a seeded
/// permutation is held out and the path point with the lowest held-out MSE
/// is returned. The path stops early once the held-out error exceeds
/// twice its best value.
LassoNetModel fit_lassonet_validated(const Matrix& x, const Vector& y, const RunConfig& config,
                                     double validation_fraction, std::uint64_t seed);

}  // namespace scidnet
