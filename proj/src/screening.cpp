#include "scidnet/screening.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scidnet/parallel.hpp"

namespace scidnet {

double hz_bandwidth(Index n) {
  return std::pow(1.25 * static_cast<double>(n), 1.0 / 6.0) / std::sqrt(2.0);
}

namespace {

// Shared by hz_statistic and screen: the response's pairwise kernel factor
// exp(-c (ty_i - ty_j)^2) is computed once and reused for every feature.
double hz_with_response_kernel(const Vector& tx, const Vector& ty, const Matrix& ky, double beta) {
  const Eigen::Index n = tx.size();
  const double b2 = beta * beta;
  const double c = 0.5 * b2;

  double pair_sum = static_cast<double>(n);  // diagonal terms, d_ii = 0
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dx = tx(i) - tx(j);
      row += std::exp(-c * dx * dx) * ky(j, i);
    }
    pair_sum += 2.0 * row;
  }

  const double c1 = b2 / (2.0 * (1.0 + b2));
  double single_sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    single_sum += std::exp(-c1 * (tx(i) * tx(i) + ty(i) * ty(i)));
  }

  const double nd = static_cast<double>(n);
  const double value =
      pair_sum / (nd * nd) - 2.0 / (nd * (1.0 + b2)) * single_sum + 1.0 / (1.0 + 2.0 * b2);
  if (value < 0.0 && value >= -1e-12) return 0.0;
  return value;
}

Matrix response_kernel(const Vector& ty, double beta) {
  const Eigen::Index n = ty.size();
  const double c = 0.5 * beta * beta;
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = ty(i) - ty(j);
      k(j, i) = std::exp(-c * d * d);
    }
  }
  return k;
}

}  // namespace

double hz_statistic(const Vector& tx, const Vector& ty, double beta) {
  if (tx.size() != ty.size()) throw DataError("hz_statistic: length mismatch");
  if (tx.size() < 1) throw DataError("hz_statistic: empty sample");
  if (!(beta > 0.0)) throw DataError("hz_statistic: bandwidth must be positive");
  return hz_with_response_kernel(tx, ty, response_kernel(ty, beta), beta);
}

Index auto_active_size(Index n) {
  if (n < 2) return 1;
  const double nd = static_cast<double>(n);
  return std::max<Index>(1, static_cast<Index>(std::floor(2.0 * nd / std::log(nd))));
}

IndexList rank_by_statistic(const Vector& w_stats) {
  IndexList order(static_cast<std::size_t>(w_stats.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return w_stats(static_cast<Eigen::Index>(a)) > w_stats(static_cast<Eigen::Index>(b));
  });
  return order;
}

ScreeningResult screen(const TransformedDataset& tds, std::optional<Index> active_size) {
  ScreeningResult res;
  const Index n = tds.n();
  const Index p = tds.p();
  res.bandwidth = hz_bandwidth(n);

  const Matrix ky = response_kernel(tds.ty, res.bandwidth);
  res.w_stats.resize(static_cast<Eigen::Index>(p));
  parallel_for(p, [&](std::size_t k) {
    const auto col = static_cast<Eigen::Index>(k);
    res.w_stats(col) = hz_with_response_kernel(tds.tx.col(col), tds.ty, ky, res.bandwidth);
  });

  res.requested_size = active_size.value_or(auto_active_size(n));
  Index k = res.requested_size;
  if (k > p) {
    res.clamped = active_size.has_value();
    k = p;
  }
  auto order = rank_by_statistic(res.w_stats);
  order.resize(k);
  res.active = std::move(order);
  return res;
}

}  // namespace scidnet
