#pragma once

#include <cstdint>
#include <optional>

#include "scidnet/common.hpp"

namespace scidnet {

/// Tuning knobs for one pipeline run. `std::nullopt` on the optional fields
/// means "auto"; see the consuming module for how auto resolves.
struct RunConfig {
  std::optional<Index> active_set_size;  // auto: floor(2n / log n)
  double merge_threshold_r = 0.9;
  double hierarchy_m = 10.0;
  std::optional<double> lambda_start;  // auto: 1e-3 * lambda_dense
  double path_multiplier = 1.05;
  Index bootstrap_b = 50;
  std::optional<double> kappa;  // auto: detect_kappa on averaged ranks
  double fdr_level_q = 0.15;
  std::uint64_t seed = 0;
  Index cv_folds = 5;
  Index nodewise_grid = 50;
  Index hidden_size = 100;
  Index epochs_dense = 200;
  Index epochs_path = 20;
  double learning_rate = 1e-3;
  double momentum = 0.9;
  Index batch_size = 64;
  Index patience = 10;
  double validation_fraction = 0.1;
  double e0_factor = 1.0;
  double lambda_cap_factor = 1e6;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

}  // namespace scidnet
