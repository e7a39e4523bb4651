#pragma once

#include "scidnet/common.hpp"
#include "scidnet/dataset.hpp"

namespace scidnet {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile, absolute error below 1e-10 on (0, 1).
/// Acklam's rational approximation followed by one Halley refinement.
double normal_quantile(double p);

/// Truncation level 1 / (4 n^{1/4} sqrt(pi log n)).
double truncation_level(Index n);

/// clamp(rank_i / n, delta_n, 1 - delta_n) where rank_i counts entries <= v_i.
Vector truncated_ecdf(const Vector& v);

/// Gaussian-copula transform of every feature column and of the response.
struct TransformedDataset {
  Matrix tx;
  Vector ty;
  const Dataset* source = nullptr;

  Index n() const { return static_cast<Index>(tx.rows()); }
  Index p() const { return static_cast<Index>(tx.cols()); }
};

Vector npn_column(const Vector& v);
TransformedDataset npn_transform(const Dataset& data);

}  // namespace scidnet
