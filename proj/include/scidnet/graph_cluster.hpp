#pragma once

#include <vector>

#include "scidnet/common.hpp"

namespace scidnet {

/// Estimated zero pattern of the precision matrix over the active set.
struct PrecisionSupport {
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> support;
  Vector lambda_per_node;

  Index size() const { return static_cast<Index>(support.rows()); }
};

/// Nodewise lasso. Each column is regressed on the others with its penalty
/// picked by K-fold cross-validation (one-standard-error rule) over a
/// log-spaced grid from lambda_max down to 1e-3 lambda_max. An edge is kept
/// when either of the two regressions involving the pair keeps it.
PrecisionSupport nodewise_support(const Matrix& tx_active, Index cv_folds, Index grid_size);

/// Disjoint clusters over positions 0..m-1 of the active set.
struct ClusterSet {
  std::vector<IndexList> clusters;  // members sorted ascending
  IndexList representatives;        // one member per cluster

  Index size() const { return clusters.size(); }
};

/// Pearson correlation matrix of the columns.
Matrix correlation_matrix(const Matrix& x);

/// Seed clusters from the support rows, merge pairs whose maximum absolute
/// cross-correlation reaches r until a fixed point, resolve overlaps toward
/// the smallest seed, and pick the member with the largest statistic as
/// representative.
ClusterSet build_clusters(const PrecisionSupport& support, const Matrix& corr,
                          const Vector& w_stats, double r);

}  // namespace scidnet
