#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "scidnet/common.hpp"
#include "scidnet/config.hpp"
#include "scidnet/graph_cluster.hpp"

namespace scidnet {

using RankMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

/// I_j = #{j' != j : score_j <= score_j'}. Ties raise both ranks.
Eigen::Matrix<long, Eigen::Dynamic, 1> ranks_from_scores(const Vector& scores);

struct BootstrapRanks {
  RankMatrix ranks;  // B x |C|
  Vector avg_ranks;  // column means

  Index b() const { return static_cast<Index>(ranks.rows()); }
  Index clusters() const { return static_cast<Index>(ranks.cols()); }

  static BootstrapRanks from_rows(RankMatrix ranks);
  /// Per-column standard deviation of the bootstrap ranks (1/B convention).
  Vector rank_sd() const;
};

/// Pairs bootstrap: replicate b resamples n rows with seed
/// derive_seed(seed, bootstrap tag, b), runs the lasso path on the
/// representatives and ranks the resulting importances.
BootstrapRanks bootstrap_ranks(const Matrix& x_reps, const Vector& y, const RunConfig& config,
                               std::uint64_t seed);

/// factor/B * sum_b sum_{j : I_j^b <= delta} 1(|I_j^b - avg_j| > kappa).
double estimate_e0(const BootstrapRanks& ranks, double delta, double kappa, double factor = 1.0);

struct CurvePoint {
  double delta = 0.0;
  Index n_plus = 0;
  double e0_hat = 0.0;
  double fdr_hat = 0.0;
};

struct SelectionResult {
  std::vector<CurvePoint> curve;
  std::optional<double> delta_star;
  IndexList selected_cluster_ids;  // ascending cluster index
  double kappa_used = 0.0;
  double q = 0.0;
};

/// Sweeps delta over the sorted distinct averaged ranks and keeps every
/// cluster at or below the largest delta whose estimated FDR is below q.
SelectionResult select_clusters(const BootstrapRanks& ranks, const ClusterSet& clusters, double q,
                                double kappa, double e0_factor = 1.0);

/// Position of the largest gap in the sorted averaged ranks, searched in
/// the first half of the sequence; earliest gap wins ties. Returns the
/// number of entries before the gap (at least 1).
double detect_kappa(const Vector& avg_ranks);

void write_curve_csv(const SelectionResult& sel, const std::filesystem::path& path);

/// Rows (replicate, representative_index, rank); replicate and
/// representative indices are 1-based.
void write_ranks_csv(const BootstrapRanks& ranks, const IndexList& representative_features,
                     const std::filesystem::path& path);

}  // namespace scidnet
