#include "scidnet/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scidnet/rng.hpp"

namespace scidnet {

// ---- regression tree ------------------------------------------------------

void RegressionTree::fit(const Matrix& x, const Vector& y, const std::vector<Eigen::Index>& rows,
                         const TreeParams& params) {
  if (rows.empty()) throw DataError("RegressionTree: no training rows");
  nodes_.clear();
  std::vector<Eigen::Index> work = rows;
  grow(x, y, work, 0, params);
}

Index RegressionTree::grow(const Matrix& x, const Vector& y, std::vector<Eigen::Index>& rows,
                           Index level, const TreeParams& params) {
  const Index id = nodes_.size();
  nodes_.push_back(Node{});
  const double count = static_cast<double>(rows.size());
  double sum = 0.0;
  for (auto r : rows) sum += y(r);
  nodes_[id].value = sum / count;
  nodes_[id].level = level;

  const Index min_leaf = std::max<Index>(params.min_leaf, 1);
  if (level >= params.max_depth || rows.size() < 2 * min_leaf) return id;

  const double base = sum * sum / count;
  double best_score = base + 1e-12 * std::max(1.0, std::abs(base));
  Eigen::Index best_feature = -1;
  double best_threshold = 0.0;

  std::vector<std::pair<double, double>> pairs(rows.size());
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    for (std::size_t i = 0; i < rows.size(); ++i) pairs[i] = {x(rows[i], f), y(rows[i])};
    std::sort(pairs.begin(), pairs.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double left = 0.0;
    for (std::size_t k = 1; k < pairs.size(); ++k) {
      left += pairs[k - 1].second;
      if (k < min_leaf || pairs.size() - k < min_leaf) continue;
      if (!(pairs[k - 1].first < pairs[k].first)) continue;
      const double nl = static_cast<double>(k);
      const double nr = count - nl;
      const double right = sum - left;
      const double score = left * left / nl + right * right / nr;
      if (score > best_score) {
        best_score = score;
        best_feature = f;
        best_threshold = 0.5 * (pairs[k - 1].first + pairs[k].first);
      }
    }
  }
  if (best_feature < 0) return id;

  std::vector<Eigen::Index> left_rows;
  std::vector<Eigen::Index> right_rows;
  for (auto r : rows) (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
  rows.clear();
  rows.shrink_to_fit();

  const Index l = grow(x, y, left_rows, level + 1, params);
  const Index r = grow(x, y, right_rows, level + 1, params);
  nodes_[id].feature = best_feature;
  nodes_[id].threshold = best_threshold;
  nodes_[id].left = l;
  nodes_[id].right = r;
  return id;
}

double RegressionTree::predict_row(const Matrix& x, Eigen::Index row) const {
  Index id = 0;
  while (nodes_[id].feature >= 0) {
    id = x(row, nodes_[id].feature) <= nodes_[id].threshold ? nodes_[id].left : nodes_[id].right;
  }
  return nodes_[id].value;
}

Vector RegressionTree::predict(const Matrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = predict_row(x, i);
  return out;
}

Index RegressionTree::depth() const {
  Index d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.level);
  return d;
}

void BaggedTrees::fit(const Matrix& x, const Vector& y, Index n_trees, const TreeParams& params,
                      std::uint64_t seed) {
  trees_.assign(n_trees, RegressionTree{});
  Rng rng(seed);
  std::uniform_int_distribution<Eigen::Index> pick(0, x.rows() - 1);
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(x.rows()));
  for (auto& tree : trees_) {
    for (auto& r : rows) r = pick(rng);
    tree.fit(x, y, rows, params);
  }
}

Vector BaggedTrees::predict(const Matrix& x) const {
  Vector out = Vector::Zero(x.rows());
  for (const auto& tree : trees_) out += tree.predict(x);
  return out / static_cast<double>(std::max<std::size_t>(trees_.size(), 1));
}

// ---- multilayer perceptron -------------------------------------------------

namespace {

struct AdamState {
  std::vector<Matrix> mw, vw;
  std::vector<Vector> mb, vb;
  Index t = 0;
};

}  // namespace

void Mlp::fit(const Matrix& x_train, const Vector& y_train, const Matrix& x_val, const Vector& y_val,
              const MlpOptions& options, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Index> sizes;
  sizes.push_back(static_cast<Index>(x_train.cols()));
  sizes.insert(sizes.end(), options.hidden.begin(), options.hidden.end());
  sizes.push_back(1);

  weights_.clear();
  biases_.clear();
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
    std::uniform_real_distribution<double> init(-bound, bound);
    Matrix w(static_cast<Eigen::Index>(sizes[l]), static_cast<Eigen::Index>(sizes[l + 1]));
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = init(rng);
    }
    weights_.push_back(std::move(w));
    biases_.push_back(Vector::Zero(static_cast<Eigen::Index>(sizes[l + 1])));
  }

  AdamState adam;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    adam.mw.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
    adam.vw.push_back(Matrix::Zero(weights_[l].rows(), weights_[l].cols()));
    adam.mb.push_back(Vector::Zero(biases_[l].size()));
    adam.vb.push_back(Vector::Zero(biases_[l].size()));
  }
  constexpr double beta1 = 0.9;
  constexpr double beta2 = 0.999;
  constexpr double eps = 1e-8;

  auto val_loss = [&] {
    const Matrix& xv = x_val.rows() > 0 ? x_val : x_train;
    const Vector& yv = x_val.rows() > 0 ? y_val : y_train;
    return (predict(xv) - yv).squaredNorm() / static_cast<double>(xv.rows());
  };

  std::vector<Matrix> best_w = weights_;
  std::vector<Vector> best_b = biases_;
  double best = val_loss();
  Index stale = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(x_train.rows()));
  std::iota(order.begin(), order.end(), 0);
  const std::size_t layers = weights_.size();
  std::vector<Matrix> acts(layers + 1);
  std::vector<Matrix> pre(layers);

  for (Index epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      std::vector<Eigen::Index> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                    order.begin() + static_cast<std::ptrdiff_t>(stop));
      acts[0] = x_train(idx, Eigen::all);
      for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = acts[l] * weights_[l];
        pre[l].rowwise() += biases_[l].transpose();
        acts[l + 1] = l + 1 < layers ? Matrix(pre[l].cwiseMax(0.0)) : pre[l];
      }
      const double bn = static_cast<double>(idx.size());
      Matrix delta = (acts[layers].col(0) - y_train(idx)) * (2.0 / bn);
      ++adam.t;
      const double c1 = 1.0 - std::pow(beta1, static_cast<double>(adam.t));
      const double c2 = 1.0 - std::pow(beta2, static_cast<double>(adam.t));
      for (std::size_t l = layers; l-- > 0;) {
        const Matrix gw = acts[l].transpose() * delta;
        const Vector gb = delta.colwise().sum().transpose();
        if (l > 0) {
          delta = (delta * weights_[l].transpose())
                      .cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
        adam.mw[l] = beta1 * adam.mw[l] + (1.0 - beta1) * gw;
        adam.vw[l] = beta2 * adam.vw[l] + (1.0 - beta2) * gw.cwiseAbs2();
        adam.mb[l] = beta1 * adam.mb[l] + (1.0 - beta1) * gb;
        adam.vb[l] = beta2 * adam.vb[l] + (1.0 - beta2) * gb.cwiseAbs2();
        weights_[l].array() -= options.learning_rate * (adam.mw[l].array() / c1) /
                               ((adam.vw[l].array() / c2).sqrt() + eps);
        biases_[l].array() -= options.learning_rate * (adam.mb[l].array() / c1) /
                              ((adam.vb[l].array() / c2).sqrt() + eps);
      }
    }
    const double loss = val_loss();
    if (!std::isfinite(loss)) break;
    if (loss < best) {
      best = loss;
      best_w = weights_;
      best_b = biases_;
      stale = 0;
    } else if (++stale >= options.patience) {
      break;
    }
  }
  weights_ = std::move(best_w);
  biases_ = std::move(best_b);
}

Vector Mlp::predict(const Matrix& x) const {
  Matrix a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = a * weights_[l];
    z.rowwise() += biases_[l].transpose();
    a = l + 1 < weights_.size() ? Matrix(z.cwiseMax(0.0)) : z;
  }
  return a.col(0);
}

}  // namespace scidnet
