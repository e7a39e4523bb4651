#include "scidnet/lassonet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "scidnet/dataset.hpp"
#include "scidnet/rng.hpp"

namespace scidnet {

bool ResidualNet::all_finite() const {
  return theta.allFinite() && w0.allFinite() && b0.allFinite() && w1.allFinite() &&
         std::isfinite(b1);
}

ResidualNet init_net(Index inputs, Index hidden, std::uint64_t seed) {
  Rng rng(seed);
  const auto m = static_cast<Eigen::Index>(inputs);
  const auto k = static_cast<Eigen::Index>(hidden);
  std::uniform_real_distribution<double> in_layer(-1.0 / std::sqrt(static_cast<double>(inputs)),
                                                  1.0 / std::sqrt(static_cast<double>(inputs)));
  std::uniform_real_distribution<double> out_layer(-1.0 / std::sqrt(static_cast<double>(hidden)),
                                                   1.0 / std::sqrt(static_cast<double>(hidden)));
  ResidualNet net;
  net.theta.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) net.theta(j) = in_layer(rng);
  net.w0.resize(m, k);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < m; ++j) net.w0(j, c) = in_layer(rng);
  }
  net.b0.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) net.b0(c) = in_layer(rng);
  net.w1.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) net.w1(c) = out_layer(rng);
  net.b1 = out_layer(rng);
  return net;
}

double forward(const ResidualNet& net, const Vector& x) {
  if (x.size() != net.theta.size()) throw DataError("forward: input dimension mismatch");
  const Vector pre = net.w0.transpose() * x + net.b0;
  return net.theta.dot(x) + pre.cwiseMax(0.0).dot(net.w1) + net.b1;
}

Vector predict(const ResidualNet& net, const Matrix& x) {
  if (x.cols() != net.theta.size()) throw DataError("predict: input dimension mismatch");
  Matrix z = x * net.w0;
  z.rowwise() += net.b0.transpose();
  Vector f = x * net.theta + z.cwiseMax(0.0) * net.w1;
  f.array() += net.b1;
  return f;
}

double mse_loss(const ResidualNet& net, const Matrix& x, const Vector& y) {
  return (predict(net, x) - y).squaredNorm() / static_cast<double>(x.rows());
}

namespace {

/// Scratch buffers reused across gradient evaluations.
struct GradWorkspace {
  Matrix z;
  Matrix d;
  Vector r;
};

double loss_gradient_into(const ResidualNet& net, const Matrix& x, const Vector& y,
                          NetGradient& grad, GradWorkspace& ws) {
  const double n = static_cast<double>(x.rows());
  ws.z.noalias() = x * net.w0;
  ws.z.rowwise() += net.b0.transpose();
  ws.r.noalias() = x * net.theta;
  ws.r.noalias() += ws.z.cwiseMax(0.0) * net.w1;
  ws.r -= y;
  ws.r.array() += net.b1;
  const double loss = ws.r.squaredNorm() / n;
  ws.r *= 2.0 / n;

  grad.theta.noalias() = x.transpose() * ws.r;
  grad.w1.noalias() = ws.z.cwiseMax(0.0).transpose() * ws.r;
  grad.b1 = ws.r.sum();
  ws.d.noalias() = ws.r * net.w1.transpose();
  ws.d.array() *= (ws.z.array() > 0.0).cast<double>();
  grad.w0.noalias() = x.transpose() * ws.d;
  grad.b0.noalias() = ws.d.colwise().sum().transpose();
  return loss;
}

}  // namespace

double loss_gradient(const ResidualNet& net, const Matrix& x, const Vector& y, NetGradient& grad) {
  GradWorkspace ws;
  return loss_gradient_into(net, x, y, grad, ws);
}

HierProxResult hier_prox(double theta, const Vector& w, double step_lambda, double m_const) {
  const Eigen::Index k = w.size();
  // Every candidate level vanishes: the origin is optimal.
  if (std::abs(theta) + m_const * w.cwiseAbs().sum() <= step_lambda) {
    return HierProxResult{0.0, Vector::Zero(k)};
  }
  std::vector<double> mag(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) mag[static_cast<std::size_t>(i)] = std::abs(w(i));
  std::sort(mag.begin(), mag.end(), std::greater<>());

  // Prefix sums of sorted magnitudes and their squares.
  std::vector<double> s1(mag.size() + 1, 0.0);
  std::vector<double> s2(mag.size() + 1, 0.0);
  for (std::size_t i = 0; i < mag.size(); ++i) {
    s1[i + 1] = s1[i] + mag[i];
    s2[i + 1] = s2[i] + mag[i] * mag[i];
  }

  const double abs_theta = std::abs(theta);
  const double m2 = m_const * m_const;

  // Candidate level a = M|t| for each truncation count; every candidate is
  // feasible, the optimum is among them.
  double best_level = 0.0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c <= mag.size(); ++c) {
    const double level = m_const / (1.0 + static_cast<double>(c) * m2) *
                         std::max(abs_theta + m_const * s1[c] - step_lambda, 0.0);
    const auto clipped = static_cast<std::size_t>(
        std::upper_bound(mag.begin(), mag.end(), level, std::greater<>()) - mag.begin());
    const double t = level / m_const;
    const double tail = std::max(
        s2[clipped] - 2.0 * level * s1[clipped] + static_cast<double>(clipped) * level * level, 0.0);
    const double obj = 0.5 * (t - abs_theta) * (t - abs_theta) + 0.5 * tail + step_lambda * t;
    if (obj < best_obj) {
      best_obj = obj;
      best_level = level;
    }
  }

  HierProxResult out;
  const double sign = theta < 0.0 ? -1.0 : 1.0;
  out.theta = sign * (best_level / m_const);
  const double bound = m_const * std::abs(out.theta);
  out.w.resize(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double v = std::min(std::abs(w(i)), bound);
    out.w(i) = w(i) < 0.0 ? -v : v;
  }
  return out;
}

bool satisfies_hierarchy(const ResidualNet& net, double m_const) {
  for (Eigen::Index j = 0; j < net.theta.size(); ++j) {
    const double bound = m_const * std::abs(net.theta(j));
    if (net.w0.row(j).cwiseAbs().maxCoeff() > bound) return false;
  }
  return true;
}

namespace {

/// Mini-batch gradient descent with heavy-ball momentum.
class SgdTrainer {
 public:
  SgdTrainer(ResidualNet& net, double lr, double momentum) : net_(net), lr_(lr), mu_(momentum) {
    vel_.theta = Vector::Zero(net.theta.size());
    vel_.w0 = Matrix::Zero(net.w0.rows(), net.w0.cols());
    vel_.b0 = Vector::Zero(net.b0.size());
    vel_.w1 = Vector::Zero(net.w1.size());
    vel_.b1 = 0.0;
  }

  double step(const Matrix& xb, const Vector& yb) {
    const double loss = loss_gradient_into(net_, xb, yb, grad_, ws_);
    vel_.theta = mu_ * vel_.theta + grad_.theta;
    vel_.w0 = mu_ * vel_.w0 + grad_.w0;
    vel_.b0 = mu_ * vel_.b0 + grad_.b0;
    vel_.w1 = mu_ * vel_.w1 + grad_.w1;
    vel_.b1 = mu_ * vel_.b1 + grad_.b1;
    net_.theta -= lr_ * vel_.theta;
    net_.w0 -= lr_ * vel_.w0;
    net_.b0 -= lr_ * vel_.b0;
    net_.w1 -= lr_ * vel_.w1;
    net_.b1 -= lr_ * vel_.b1;
    return loss;
  }

  void prox(double lambda, double m_const) {
    const double step_lambda = lr_ * lambda;
    for (Eigen::Index j = 0; j < net_.theta.size(); ++j) {
      const auto res = hier_prox(net_.theta(j), net_.w0.row(j).transpose(), step_lambda, m_const);
      net_.theta(j) = res.theta;
      net_.w0.row(j) = res.w.transpose();
    }
  }

 private:
  ResidualNet& net_;
  NetGradient grad_;
  NetGradient vel_;
  GradWorkspace ws_;
  double lr_;
  double mu_;
};

/// Runs one epoch over `rows` in shuffled mini-batches. When `lambda` is
/// non-negative a proximal step follows every gradient step.
void run_epoch(SgdTrainer& trainer, const Matrix& x, const Vector& y, IndexList& rows,
               Index batch_size, Rng& rng, double lambda, double m_const) {
  if (batch_size >= static_cast<Index>(x.rows()) && rows.size() == static_cast<Index>(x.rows())) {
    trainer.step(x, y);
    if (lambda >= 0.0) trainer.prox(lambda, m_const);
    return;
  }
  std::shuffle(rows.begin(), rows.end(), rng);
  const Index bs = std::min<Index>(batch_size, rows.size());
  for (Index start = 0; start < rows.size(); start += bs) {
    const Index stop = std::min<Index>(start + bs, rows.size());
    std::vector<Eigen::Index> idx(rows.begin() + static_cast<std::ptrdiff_t>(start),
                                  rows.begin() + static_cast<std::ptrdiff_t>(stop));
    const Matrix xb = x(idx, Eigen::all);
    const Vector yb = y(idx);
    trainer.step(xb, yb);
    if (lambda >= 0.0) trainer.prox(lambda, m_const);
  }
}

IndexList iota_list(Index n) {
  IndexList v(n);
  std::iota(v.begin(), v.end(), Index{0});
  return v;
}

/// Proximal path driver. `visit` sees the network after each lambda level and
/// returns false to stop early.
void run_path(ResidualNet& net, const Matrix& x, const Vector& y, const RunConfig& config,
              std::uint64_t seed, double lambda_start,
              const std::function<bool(double, const ResidualNet&)>& visit) {
  SgdTrainer trainer(net, config.learning_rate, config.momentum);
  Rng rng(derive_seed(seed, tags::kBatches, 1));
  IndexList rows = iota_list(static_cast<Index>(x.rows()));
  // Anchored at unit scale too: a tiny start would otherwise end the path
  // while strong features are still active.
  const double cap = config.lambda_cap_factor * std::max(lambda_start, 1.0);
  for (double lambda = lambda_start; lambda <= cap; lambda *= config.path_multiplier) {
    for (Index e = 0; e < config.epochs_path; ++e) {
      // Full-batch steps: mini-batch noise re-activates features near the
      // threshold and breaks the ordering of exit points.
      run_epoch(trainer, x, y, rows, static_cast<Index>(rows.size()), rng, lambda,
                config.hierarchy_m);
    }
    if (!net.all_finite()) {
      std::ostringstream msg;
      msg << "lasso path diverged at lambda = " << lambda;
      throw PipelineError(msg.str());
    }
    if (!satisfies_hierarchy(net, config.hierarchy_m)) {
      throw PipelineError("hierarchy constraint violated after proximal step");
    }
    if (!visit(lambda, net)) break;
  }
}

double dense_lambda(const ResidualNet& net, const Matrix& x, const Vector& y) {
  NetGradient g;
  loss_gradient(net, x, y, g);
  return g.theta.size() > 0 ? g.theta.cwiseAbs().maxCoeff() : 0.0;
}

double resolve_lambda_start(const RunConfig& config, double lambda_dense) {
  if (config.lambda_start) return *config.lambda_start;
  const double start = 1e-3 * lambda_dense;
  return start > 1e-8 ? start : 1e-8;
}

}  // namespace

ResidualNet train_dense(const Matrix& x, const Vector& y, const RunConfig& config,
                        std::uint64_t seed) {
  const Index n = static_cast<Index>(x.rows());
  if (n < 2) throw DataError("train_dense: n < 2");
  if (y.size() != x.rows()) throw DataError("train_dense: dimension mismatch");

  ResidualNet net = init_net(static_cast<Index>(x.cols()), config.hidden_size,
                             derive_seed(seed, tags::kNetInit));
  const ResidualNet initial = net;
  const double initial_loss = mse_loss(net, x, y);

  Rng rng(derive_seed(seed, tags::kBatches));
  IndexList perm = iota_list(n);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto n_val = static_cast<Index>(std::floor(config.validation_fraction * static_cast<double>(n)));
  if (n - n_val < 1) n_val = 0;
  IndexList train(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  std::vector<Eigen::Index> val(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());
  const Matrix x_val = x(val, Eigen::all);
  const Vector y_val = y(val);
  auto monitor = [&](const ResidualNet& candidate) {
    return n_val > 0 ? mse_loss(candidate, x_val, y_val) : mse_loss(candidate, x, y);
  };

  SgdTrainer trainer(net, config.learning_rate, config.momentum);
  ResidualNet best = net;
  double best_loss = monitor(net);
  Index stale = 0;
  for (Index epoch = 0; epoch < config.epochs_dense; ++epoch) {
    run_epoch(trainer, x, y, train, config.batch_size, rng, -1.0, config.hierarchy_m);
    const double loss = monitor(net);
    if (!std::isfinite(loss) || !net.all_finite()) {
      std::ostringstream msg;
      msg << "dense training diverged at epoch " << epoch + 1 << " (learning_rate "
          << config.learning_rate << ", last finite monitored loss " << best_loss << ")";
      throw PipelineError(msg.str());
    }
    if (loss < best_loss) {
      best_loss = loss;
      best = net;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  if (mse_loss(best, x, y) > initial_loss) return initial;
  return best;
}

Standardizer Standardizer::fit(const Matrix& x, const Vector& y) {
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.x_mean = x.colwise().mean().transpose();
  s.x_scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double sd = std::sqrt((x.col(j).array() - s.x_mean(j)).square().sum() / n);
    s.x_scale(j) = sd > 1e-12 ? 1.0 / sd : 0.0;
  }
  s.y_mean = y.mean();
  const double sd = std::sqrt((y.array() - s.y_mean).square().sum() / n);
  s.y_scale = sd > 1e-12 ? sd : 1.0;
  return s;
}

Matrix Standardizer::transform_x(const Matrix& x) const {
  return (x.rowwise() - x_mean.transpose()) * x_scale.asDiagonal();
}

Vector Standardizer::transform_y(const Vector& y) const {
  return (y.array() - y_mean) / y_scale;
}

Vector Standardizer::inverse_y(const Vector& ys) const {
  return (ys.array() * y_scale + y_mean).matrix();
}

ImportanceScores lasso_path(const Matrix& x, const Vector& y, const RunConfig& config,
                            std::uint64_t seed) {
  if (x.rows() < 2) throw DataError("lasso_path: n < 2");
  if (x.cols() < 1) throw DataError("lasso_path: no features");
  const Standardizer scale = Standardizer::fit(x, y);
  const Matrix z = scale.transform_x(x);
  const Vector ys = scale.transform_y(y);

  ResidualNet net = train_dense(z, ys, config, seed);
  ImportanceScores out;
  out.lambda_dense = dense_lambda(net, z, ys);
  const double start = resolve_lambda_start(config, out.lambda_dense);

  const Eigen::Index m = x.cols();
  out.lambda_hat = Vector::Zero(m);
  std::vector<Eigen::Matrix<bool, 1, Eigen::Dynamic>> supports;
  std::vector<Eigen::RowVectorXd> thetas;
  run_path(net, z, ys, config, seed, start, [&](double lambda, const ResidualNet& current) {
    out.path_lambdas.push_back(lambda);
    Eigen::Matrix<bool, 1, Eigen::Dynamic> active(m);
    bool any = false;
    for (Eigen::Index j = 0; j < m; ++j) {
      active(j) = current.theta(j) != 0.0;
      if (active(j)) {
        out.lambda_hat(j) = lambda;
        any = true;
      }
    }
    supports.push_back(active);
    thetas.push_back(current.theta.transpose());
    out.reached_empty = !any;
    return any;
  });

  out.support_per_lambda.resize(static_cast<Eigen::Index>(supports.size()), m);
  out.theta_path.resize(static_cast<Eigen::Index>(thetas.size()), m);
  for (std::size_t i = 0; i < supports.size(); ++i) {
    out.support_per_lambda.row(static_cast<Eigen::Index>(i)) = supports[i];
    out.theta_path.row(static_cast<Eigen::Index>(i)) = thetas[i];
  }
  return out;
}

void write_path_csv(const ImportanceScores& scores, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write path file: " + path.string());
  out << "lambda,feature_index,theta_value\n";
  for (Eigen::Index i = 0; i < scores.theta_path.rows(); ++i) {
    for (Eigen::Index j = 0; j < scores.theta_path.cols(); ++j) {
      out << format_double(scores.path_lambdas[static_cast<std::size_t>(i)]) << ',' << j + 1 << ','
          << format_double(scores.theta_path(i, j)) << '\n';
    }
  }
}

Vector LassoNetModel::predict(const Matrix& x) const {
  return scale.inverse_y(scidnet::predict(net, scale.transform_x(x)));
}

LassoNetModel fit_lassonet_validated(const Matrix& x, const Vector& y, const RunConfig& config,
                                     double validation_fraction, std::uint64_t seed) {
  const Index n = static_cast<Index>(x.rows());
  auto n_val = static_cast<Index>(std::llround(validation_fraction * static_cast<double>(n)));
  n_val = std::clamp<Index>(n_val, 1, n > 2 ? n - 2 : 1);
  if (n < 3) throw DataError("fit_lassonet_validated: need at least three observations");

  Rng rng(derive_seed(seed, tags::kSplit));
  IndexList perm = iota_list(n);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::vector<Eigen::Index> tr(perm.begin(), perm.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<Eigen::Index> va(perm.end() - static_cast<std::ptrdiff_t>(n_val), perm.end());

  LassoNetModel model;
  model.scale = Standardizer::fit(x(tr, Eigen::all), y(tr));
  const Matrix zt = model.scale.transform_x(x(tr, Eigen::all));
  const Vector yt = model.scale.transform_y(y(tr));
  const Matrix zv = model.scale.transform_x(x(va, Eigen::all));
  const Vector yv = model.scale.transform_y(y(va));

  ResidualNet net = train_dense(zt, yt, config, seed);
  model.net = net;
  model.lambda = 0.0;
  model.validation_mse = mse_loss(net, zv, yv);

  const double start = resolve_lambda_start(config, dense_lambda(net, zt, yt));
  run_path(net, zt, yt, config, seed, start, [&](double lambda, const ResidualNet& current) {
    const double err = mse_loss(current, zv, yv);
    if (err < model.validation_mse) {
      model.validation_mse = err;
      model.net = current;
      model.lambda = lambda;
    }
    return current.theta.cwiseAbs().maxCoeff() > 0.0 && err <= 2.0 * model.validation_mse;
  });

  for (Eigen::Index j = 0; j < model.net.theta.size(); ++j) {
    if (model.net.theta(j) != 0.0) model.support.push_back(static_cast<Index>(j));
  }
  return model;
}

}  // namespace scidnet
