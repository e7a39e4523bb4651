#pragma once

#include <optional>

#include "scidnet/common.hpp"
#include "scidnet/nonparanormal.hpp"

namespace scidnet {

/// Henze-Zirkler smoothing parameter (1.25 n)^{1/6} / sqrt(2).
double hz_bandwidth(Index n);

/// Closed-form weighted L2 distance between the empirical characteristic
/// function of the pairs (tx_i, ty_i) and that of N(0, I_2). Clamped at zero
/// when roundoff produces a value in [-1e-12, 0).
double hz_statistic(const Vector& tx, const Vector& ty, double beta);

struct ScreeningResult {
  Vector w_stats;     // one statistic per feature
  IndexList active;   // descending statistic, ascending index on ties
  double bandwidth = 0.0;
  Index requested_size = 0;
  bool clamped = false;  // requested size exceeded p
};

/// floor(2n / log n), at least 1.
Index auto_active_size(Index n);

/// Orders features by statistic (descending, index ascending on ties).
IndexList rank_by_statistic(const Vector& w_stats);

ScreeningResult screen(const TransformedDataset& tds, std::optional<Index> active_size);

}  // namespace scidnet
