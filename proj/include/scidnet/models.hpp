#pragma once

#include <cstdint>
#include <vector>

#include "scidnet/common.hpp"

namespace scidnet {

struct TreeParams {
  Index max_depth = 6;
  Index min_leaf = 5;
};

/// CART regression tree grown on squared error.
class RegressionTree {
 public:
  void fit(const Matrix& x, const Vector& y, const std::vector<Eigen::Index>& rows,
           const TreeParams& params);
  double predict_row(const Matrix& x, Eigen::Index row) const;
  Vector predict(const Matrix& x) const;
  Index node_count() const { return nodes_.size(); }
  Index depth() const;

 private:
  struct Node {
    Eigen::Index feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    Index left = 0;
    Index right = 0;
    Index level = 0;
  };
  Index grow(const Matrix& x, const Vector& y, std::vector<Eigen::Index>& rows, Index level,
             const TreeParams& params);
  std::vector<Node> nodes_;
};

/// Bootstrap-aggregated regression trees.
class BaggedTrees {
 public:
  void fit(const Matrix& x, const Vector& y, Index n_trees, const TreeParams& params,
           std::uint64_t seed);
  Vector predict(const Matrix& x) const;

 private:
  std::vector<RegressionTree> trees_;
};

struct MlpOptions {
  std::vector<Index> hidden = {40, 40};
  double learning_rate = 1e-3;
  Index batch_size = 32;
  Index max_epochs = 500;
  Index patience = 20;
};

/// Fully connected ReLU network with a linear output, trained with Adam
/// on squared error and early-stopped on a validation set.
class Mlp {
 public:
  void fit(const Matrix& x_train, const Vector& y_train, const Matrix& x_val, const Vector& y_val,
           const MlpOptions& options, std::uint64_t seed);
  Vector predict(const Matrix& x) const;

 private:
  std::vector<Matrix> weights_;  // in x out
  std::vector<Vector> biases_;
};

}  // namespace scidnet
