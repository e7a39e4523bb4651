#pragma once

#include "scidnet/cleaning.hpp"
#include "scidnet/config.hpp"
#include "scidnet/dataset.hpp"
#include "scidnet/graph_cluster.hpp"
#include "scidnet/screening.hpp"

namespace scidnet {

/// Everything produced by one screening-and-cleaning run.
struct PipelineResult {
  ScreeningResult screening;
  PrecisionSupport support;      // over active positions
  ClusterSet clusters;           // members and representatives as feature indices
  BootstrapRanks ranks;          // columns follow `clusters`
  SelectionResult selection;
};

/// transform -> screen -> nodewise support -> clusters -> bootstrap ranks -> selection.
PipelineResult run_scidnet(const Dataset& data, const RunConfig& config);

/// Union of the members of the selected clusters, ascending.
IndexList selected_features(const PipelineResult& result);

}  // namespace scidnet
