#include "scidnet/pipeline.hpp"

#include <algorithm>

#include "scidnet/nonparanormal.hpp"

namespace scidnet {

PipelineResult run_scidnet(const Dataset& data, const RunConfig& config) {
  config.validate();
  validate(data);

  PipelineResult out;
  const TransformedDataset tds = npn_transform(data);
  out.screening = screen(tds, config.active_set_size);
  const IndexList& active = out.screening.active;
  const auto m = static_cast<Eigen::Index>(active.size());

  std::vector<Eigen::Index> cols(active.begin(), active.end());
  const Matrix tx_active = tds.tx(Eigen::all, cols);
  const Vector w_active = out.screening.w_stats(cols);

  ClusterSet local;
  if (m >= 2) {
    out.support = nodewise_support(tx_active, config.cv_folds, config.nodewise_grid);
    local = build_clusters(out.support, correlation_matrix(tx_active), w_active,
                           config.merge_threshold_r);
  } else {
    out.support.support.setConstant(m, m, true);
    out.support.lambda_per_node = Vector::Zero(m);
    local.clusters.push_back({0});
    local.representatives.push_back(0);
  }

  // Positions in the active set -> feature indices.
  for (const auto& c : local.clusters) {
    IndexList members;
    for (Index pos : c) members.push_back(active[pos]);
    std::sort(members.begin(), members.end());
    out.clusters.clusters.push_back(std::move(members));
  }
  for (Index pos : local.representatives) out.clusters.representatives.push_back(active[pos]);

  std::vector<Eigen::Index> rep_cols(out.clusters.representatives.begin(),
                                     out.clusters.representatives.end());
  out.ranks = bootstrap_ranks(data.x(Eigen::all, rep_cols), data.y, config, config.seed);

  double kappa = 1.0;
  if (config.kappa) {
    kappa = *config.kappa;
  } else if (out.clusters.size() >= 2) {
    kappa = detect_kappa(out.ranks.avg_ranks);
  }
  out.selection = select_clusters(out.ranks, out.clusters, config.fdr_level_q, kappa, config.e0_factor);
  return out;
}

IndexList selected_features(const PipelineResult& result) {
  IndexList feats;
  for (Index c : result.selection.selected_cluster_ids) {
    const auto& members = result.clusters.clusters[c];
    feats.insert(feats.end(), members.begin(), members.end());
  }
  std::sort(feats.begin(), feats.end());
  feats.erase(std::unique(feats.begin(), feats.end()), feats.end());
  return feats;
}

}  // namespace scidnet
