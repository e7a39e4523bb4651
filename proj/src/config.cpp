#include "scidnet/config.hpp"

#include <cmath>

namespace scidnet {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(std::string(field) + ": " + what);
}

}  // namespace

void RunConfig::validate() const {
  if (active_set_size) require(*active_set_size >= 1, "active_set_size", "must be a positive integer");
  require(merge_threshold_r > 0.0 && merge_threshold_r <= 1.0, "merge_threshold_r",
          "must lie in (0, 1]");
  require(hierarchy_m > 0.0 && std::isfinite(hierarchy_m), "hierarchy_m", "must be positive");
  if (lambda_start) require(*lambda_start > 0.0 && std::isfinite(*lambda_start), "lambda_start",
                            "must be positive");
  require(path_multiplier > 1.0 && std::isfinite(path_multiplier), "path_multiplier",
          "must be greater than 1");
  require(bootstrap_b >= 1, "bootstrap_b", "must be a positive integer");
  if (kappa) require(*kappa >= 0.0 && std::isfinite(*kappa), "kappa", "must be non-negative");
  require(fdr_level_q > 0.0 && fdr_level_q < 1.0, "fdr_level_q", "must lie in (0, 1)");
  require(cv_folds >= 2, "cv_folds", "must be at least 2");
  require(nodewise_grid >= 2, "nodewise_grid", "must be at least 2");
  require(hidden_size >= 1, "hidden_size", "must be a positive integer");
  require(epochs_dense >= 1, "epochs_dense", "must be a positive integer");
  require(epochs_path >= 1, "epochs_path", "must be a positive integer");
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate", "must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum", "must lie in [0, 1)");
  require(batch_size >= 1, "batch_size", "must be a positive integer");
  require(patience >= 1, "patience", "must be a positive integer");
  require(validation_fraction >= 0.0 && validation_fraction < 0.5, "validation_fraction",
          "must lie in [0, 0.5)");
  require(e0_factor > 0.0 && std::isfinite(e0_factor), "e0_factor", "must be positive");
  require(lambda_cap_factor > 1.0 && std::isfinite(lambda_cap_factor), "lambda_cap_factor",
          "must be greater than 1");
}

}  // namespace scidnet
