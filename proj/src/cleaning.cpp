#include "scidnet/cleaning.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scidnet/dataset.hpp"
#include "scidnet/lassonet.hpp"
#include "scidnet/parallel.hpp"
#include "scidnet/rng.hpp"

namespace scidnet {

Eigen::Matrix<long, Eigen::Dynamic, 1> ranks_from_scores(const Vector& scores) {
  const Eigen::Index m = scores.size();
  Eigen::Matrix<long, Eigen::Dynamic, 1> ranks(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    long count = 0;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (k != j && scores(j) <= scores(k)) ++count;
    }
    ranks(j) = count;
  }
  return ranks;
}

BootstrapRanks BootstrapRanks::from_rows(RankMatrix ranks) {
  BootstrapRanks out;
  out.avg_ranks = ranks.cast<double>().colwise().mean().transpose();
  out.ranks = std::move(ranks);
  return out;
}

Vector BootstrapRanks::rank_sd() const {
  const Matrix r = ranks.cast<double>();
  Vector sd(r.cols());
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    sd(j) = std::sqrt((r.col(j).array() - avg_ranks(j)).square().mean());
  }
  return sd;
}

BootstrapRanks bootstrap_ranks(const Matrix& x_reps, const Vector& y, const RunConfig& config,
                               std::uint64_t seed) {
  const Eigen::Index n = x_reps.rows();
  const Eigen::Index m = x_reps.cols();
  if (n < 2) throw DataError("bootstrap_ranks: n < 2");
  if (m < 1) throw DataError("bootstrap_ranks: no representatives");
  if (y.size() != n) throw DataError("bootstrap_ranks: dimension mismatch");

  const Index b_count = config.bootstrap_b;
  RankMatrix ranks(static_cast<Eigen::Index>(b_count), m);
  std::vector<std::string> failures(b_count);

  parallel_for(b_count, [&](std::size_t b) {
    const std::uint64_t rep_seed = derive_seed(seed, tags::kBootstrap, b + 1);
    Rng rng(rep_seed);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
    for (auto& r : rows) r = pick(rng);
    try {
      const auto scores = lasso_path(x_reps(rows, Eigen::all), y(rows), config, rep_seed);
      ranks.row(static_cast<Eigen::Index>(b)) = ranks_from_scores(scores.lambda_hat).transpose();
    } catch (const std::exception& e) {
      failures[b] = e.what();
    }
  });

  for (std::size_t b = 0; b < failures.size(); ++b) {
    if (!failures[b].empty()) {
      throw PipelineError("bootstrap replicate " + std::to_string(b + 1) + " failed: " + failures[b]);
    }
  }
  return BootstrapRanks::from_rows(std::move(ranks));
}

double estimate_e0(const BootstrapRanks& ranks, double delta, double kappa, double factor) {
  const Eigen::Index bn = ranks.ranks.rows();
  double total = 0.0;
  for (Eigen::Index b = 0; b < bn; ++b) {
    for (Eigen::Index j = 0; j < ranks.ranks.cols(); ++j) {
      const double r = static_cast<double>(ranks.ranks(b, j));
      if (r <= delta && std::abs(ranks.avg_ranks(j) - r) > kappa) total += 1.0;
    }
  }
  return factor * total / static_cast<double>(bn);
}

SelectionResult select_clusters(const BootstrapRanks& ranks, const ClusterSet& clusters, double q,
                                double kappa, double e0_factor) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("fdr_level_q: must lie in (0, 1)");
  if (!(kappa >= 0.0)) throw ConfigError("kappa: must be non-negative");
  if (clusters.size() != ranks.clusters()) {
    throw DataError("select_clusters: rank columns do not match cluster count");
  }

  SelectionResult out;
  out.q = q;
  out.kappa_used = kappa;

  std::vector<double> deltas(ranks.avg_ranks.data(), ranks.avg_ranks.data() + ranks.avg_ranks.size());
  std::sort(deltas.begin(), deltas.end());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

  for (double delta : deltas) {
    CurvePoint pt;
    pt.delta = delta;
    pt.n_plus = static_cast<Index>((ranks.avg_ranks.array() <= delta).count());
    pt.e0_hat = estimate_e0(ranks, delta, kappa, e0_factor);
    pt.fdr_hat = pt.n_plus > 0 ? pt.e0_hat / static_cast<double>(pt.n_plus) : 0.0;
    if (pt.fdr_hat < q) out.delta_star = delta;
    out.curve.push_back(pt);
  }

  if (out.delta_star) {
    for (Eigen::Index j = 0; j < ranks.avg_ranks.size(); ++j) {
      if (ranks.avg_ranks(j) <= *out.delta_star) out.selected_cluster_ids.push_back(static_cast<Index>(j));
    }
  }
  return out;
}

double detect_kappa(const Vector& avg_ranks) {
  const Eigen::Index m = avg_ranks.size();
  if (m < 2) throw DataError("detect_kappa: need at least two clusters");
  std::vector<double> sorted(avg_ranks.data(), avg_ranks.data() + m);
  std::sort(sorted.begin(), sorted.end());

  // Gap i sits between sorted[i] and sorted[i+1]; only the first half counts.
  const auto limit = static_cast<std::size_t>((m + 1) / 2);
  std::size_t best = 0;
  double best_gap = -1.0;
  for (std::size_t i = 0; i < limit && i + 1 < sorted.size(); ++i) {
    const double gap = sorted[i + 1] - sorted[i];
    if (gap > best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  return std::max(1.0, static_cast<double>(best + 1));
}

void write_curve_csv(const SelectionResult& sel, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write curve file: " + path.string());
  out << "delta,n_plus,e0_hat,fdr_hat\n";
  for (const auto& pt : sel.curve) {
    out << format_double(pt.delta) << ',' << pt.n_plus << ',' << format_double(pt.e0_hat) << ','
        << format_double(pt.fdr_hat) << '\n';
  }
}

void write_ranks_csv(const BootstrapRanks& ranks, const IndexList& representative_features,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write ranks file: " + path.string());
  out << "replicate,representative_index,rank\n";
  for (Eigen::Index b = 0; b < ranks.ranks.rows(); ++b) {
    for (Eigen::Index j = 0; j < ranks.ranks.cols(); ++j) {
      out << b + 1 << ',' << representative_features[static_cast<std::size_t>(j)] + 1 << ','
          << ranks.ranks(b, j) << '\n';
    }
  }
}

}  // namespace scidnet
