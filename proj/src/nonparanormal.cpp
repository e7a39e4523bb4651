#include "scidnet/nonparanormal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "scidnet/parallel.hpp"

namespace scidnet {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -HUGE_VAL;
    if (p == 1.0) return HUGE_VAL;
    throw Error("normal_quantile: probability outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley step. In the upper tail work with the complement to avoid
  // cancellation in Phi(x) - p.
  const double density = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  double e = 0.0;
  if (p > 0.5) {
    e = -(0.5 * std::erfc(x / std::numbers::sqrt2) - (1.0 - p));
  } else {
    e = normal_cdf(x) - p;
  }
  const double u = e / density;
  return x - u / (1.0 + 0.5 * x * u);
}

double truncation_level(Index n) {
  if (n < 2) throw DataError("truncated_ecdf: n < 2");
  const double nd = static_cast<double>(n);
  return 1.0 / (4.0 * std::pow(nd, 0.25) * std::sqrt(std::numbers::pi * std::log(nd)));
}

Vector truncated_ecdf(const Vector& v) {
  const auto n = static_cast<Index>(v.size());
  const double delta = truncation_level(n);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) throw DataError("truncated_ecdf: non-finite entry");
  }

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return v(a) < v(b); });

  // Walk ties as blocks; every member of a block gets the block's end position.
  Vector out(v.size());
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && v(order[j]) == v(order[i])) ++j;
    const double f = std::clamp(static_cast<double>(j) / static_cast<double>(n), delta, 1.0 - delta);
    for (std::size_t k = i; k < j; ++k) out(order[k]) = f;
    i = j;
  }
  return out;
}

Vector npn_column(const Vector& v) {
  return truncated_ecdf(v).unaryExpr([](double f) { return normal_quantile(f); });
}

TransformedDataset npn_transform(const Dataset& data) {
  validate(data);
  TransformedDataset out;
  out.source = &data;
  out.tx.resize(data.x.rows(), data.x.cols());
  out.ty = npn_column(data.y);
  parallel_for(data.p(), [&](std::size_t j) {
    const auto col = static_cast<Eigen::Index>(j);
    out.tx.col(col) = npn_column(data.x.col(col));
  });
  return out;
}

}  // namespace scidnet
