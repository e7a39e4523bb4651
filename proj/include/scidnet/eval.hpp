#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scidnet/config.hpp"
#include "scidnet/dataset.hpp"
#include "scidnet/graph_cluster.hpp"
#include "scidnet/cleaning.hpp"
#include "scidnet/simgen.hpp"

namespace scidnet {

struct PowerFdr {
  double power = 0.0;
  double fdr = 0.0;
};

/// Cluster-level metrics. Power is the share of S0 covered by the union of
/// the selected clusters; FDR is the share of selected clusters containing
/// no member of S0. `clusters` holds feature indices.
PowerFdr power_fdr(const SelectionResult& selection, const ClusterSet& clusters, const TruthSpec& truth);
PowerFdr power_fdr(const std::vector<IndexList>& selected, const TruthSpec& truth);

enum class ModelKind { Mlp, BaggedTree };
std::string to_string(ModelKind kind);
ModelKind parse_model(const std::string& name);

struct Prediction {
  Vector predictions;
  double test_mse = 0.0;
  double pred_corr = 0.0;
  bool corr_degenerate = false;  // constant predictions or test response
};

/// Pearson correlation; 0 with `degenerate` set when either side is constant.
double pearson(const Vector& a, const Vector& b, bool* degenerate = nullptr);

/// Refits `model` on the chosen columns of `train` (1/8 held out for early
/// stopping or tree-size selection) and scores it on `test`.
Prediction fit_predict(const Dataset& train, const Dataset& test, const IndexList& features,
                       ModelKind model, std::uint64_t seed, Index n_trees = 100);

struct ExperimentOptions {
  Index replications = 1;
  std::vector<ModelKind> models = {ModelKind::Mlp, ModelKind::BaggedTree};
  bool baseline_lassonet = false;  // prediction-optimal LassoNet on all features
  double train_fraction = 0.8;
  Index n_trees = 100;
};

struct ModelScore {
  double mse = 0.0;
  double corr = 0.0;
};

struct ReplicationResult {
  Index id = 0;
  bool ok = false;
  std::string error;
  double power = 0.0;
  double fdr = 0.0;
  std::vector<ModelScore> models;  // aligned with ExperimentOptions::models
  bool sure_screening = false;     // S0 inside the active set
  Index n_active = 0;
  Index n_clusters = 0;
  Index n_selected = 0;
  double kappa = 0.0;
  double rank_sd_true = 0.0;   // mean bootstrap rank sd, clusters touching S0
  double rank_sd_null = 0.0;   // mean bootstrap rank sd, the rest
  Index n_true_clusters = 0;
  // Prediction-optimal LassoNet on every feature (feature-level metrics).
  double baseline_power = 0.0;
  double baseline_fdr = 0.0;
  double baseline_mse = 0.0;
  double baseline_corr = 0.0;
  Index baseline_support = 0;
  double runtime_s = 0.0;
};

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
};

MeanSd mean_sd(const std::vector<double>& values);

struct ExperimentSummary {
  MeanSd power;
  MeanSd fdr;
  std::vector<ModelKind> models;
  std::vector<MeanSd> test_mse;
  std::vector<MeanSd> pred_corr;
  MeanSd baseline_power;
  MeanSd baseline_fdr;
  MeanSd baseline_mse;
  Index n_replications = 0;
  Index n_failed = 0;
  std::vector<ReplicationResult> replications;
  RunConfig config;
  SimDesign design;
  ExperimentOptions options;
};

/// Monte-Carlo driver. Replication r uses design seed and run seed derived
/// from the roots with index r. Test MSE is reported in units of the
/// training-response variance.
ExperimentSummary run_experiment(const SimDesign& design, const RunConfig& config,
                                 const ExperimentOptions& options);

}  // namespace scidnet
