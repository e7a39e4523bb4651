#include "scidnet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>

#include "scidnet/lassonet.hpp"
#include "scidnet/models.hpp"
#include "scidnet/parallel.hpp"
#include "scidnet/pipeline.hpp"
#include "scidnet/rng.hpp"

namespace scidnet {

PowerFdr power_fdr(const std::vector<IndexList>& selected, const TruthSpec& truth) {
  if (truth.s0.empty()) throw DataError("power_fdr: empty true support");
  const std::set<Index> s0(truth.s0.begin(), truth.s0.end());
  std::set<Index> covered;
  Index null_only = 0;
  for (const auto& cluster : selected) {
    bool hit = false;
    for (Index f : cluster) {
      if (s0.count(f)) {
        covered.insert(f);
        hit = true;
      }
    }
    if (!hit) ++null_only;
  }
  PowerFdr out;
  out.power = static_cast<double>(covered.size()) / static_cast<double>(s0.size());
  out.fdr = selected.empty() ? 0.0
                             : static_cast<double>(null_only) / static_cast<double>(selected.size());
  return out;
}

PowerFdr power_fdr(const SelectionResult& selection, const ClusterSet& clusters, const TruthSpec& truth) {
  std::vector<IndexList> chosen;
  for (Index c : selection.selected_cluster_ids) chosen.push_back(clusters.clusters.at(c));
  return power_fdr(chosen, truth);
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::Mlp ? "mlp" : "bagged_tree";
}

ModelKind parse_model(const std::string& name) {
  if (name == "mlp") return ModelKind::Mlp;
  if (name == "bagged_tree" || name == "rt") return ModelKind::BaggedTree;
  throw ConfigError("models: unknown model '" + name + "' (expected mlp or bagged_tree)");
}

double pearson(const Vector& a, const Vector& b, bool* degenerate) {
  if (a.size() != b.size()) throw DataError("pearson: length mismatch");
  if (degenerate) *degenerate = false;
  const Vector ca = a.array() - a.mean();
  const Vector cb = b.array() - b.mean();
  const double sa = ca.squaredNorm();
  const double sb = cb.squaredNorm();
  if (a.size() < 2 || sa <= 0.0 || sb <= 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  return ca.dot(cb) / std::sqrt(sa * sb);
}

namespace {

struct ColumnScale {
  Vector mean;
  Vector scale;

  static ColumnScale fit(const Matrix& x) {
    ColumnScale s;
    const double n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
      s.scale(j) = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
    }
    return s;
  }

  Matrix apply(const Matrix& x) const {
    return ((x.rowwise() - mean.transpose()).array().rowwise() * scale.transpose().array()).matrix();
  }
};

double mse(const Vector& pred, const Vector& y) {
  return (pred - y).squaredNorm() / static_cast<double>(y.size());
}

}  // namespace

Prediction fit_predict(const Dataset& train, const Dataset& test, const IndexList& features,
                       ModelKind model, std::uint64_t seed, Index n_trees) {
  if (features.empty()) throw DataError("fit_predict: empty feature set");
  if (test.n() < 2) throw DataError("fit_predict: test set needs at least 2 rows");
  if (train.n() < 2) throw DataError("fit_predict: training set needs at least 2 rows");
  if (train.p() != test.p()) throw DataError("fit_predict: train and test feature counts differ");
  for (Index f : features) {
    if (f >= train.p()) throw DataError("fit_predict: feature index out of range");
  }

  std::vector<Eigen::Index> cols(features.begin(), features.end());
  const Matrix xtr_raw = train.x(Eigen::all, cols);
  const Matrix xte_raw = test.x(Eigen::all, cols);

  // Seeded permutation; the last eighth is the validation slice.
  Rng rng(seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(train.n()));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_val = std::max<std::size_t>(1, order.size() / 8);
  const std::vector<Eigen::Index> fit_rows(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<Eigen::Index> val_rows(order.end() - static_cast<std::ptrdiff_t>(n_val), order.end());

  Prediction out;
  if (model == ModelKind::Mlp) {
    const ColumnScale xs = ColumnScale::fit(xtr_raw(fit_rows, Eigen::all));
    const Vector y_fit = train.y(fit_rows);
    const double y_mean = y_fit.mean();
    const double y_var = (y_fit.array() - y_mean).square().mean();
    const double y_sd = y_var > 0.0 ? std::sqrt(y_var) : 1.0;
    const Matrix x_fit = xs.apply(xtr_raw(fit_rows, Eigen::all));
    const Matrix x_val = xs.apply(xtr_raw(val_rows, Eigen::all));
    const Vector ys_fit = (y_fit.array() - y_mean) / y_sd;
    const Vector ys_val = (train.y(val_rows).array() - y_mean) / y_sd;
    Mlp net;
    net.fit(x_fit, ys_fit, x_val, ys_val, MlpOptions{}, derive_seed(seed, tags::kNetInit));
    out.predictions = (net.predict(xs.apply(xte_raw)).array() * y_sd + y_mean).matrix();
  } else {
    static const Index depths[] = {2, 4, 6, 10};
    static const Index leaves[] = {2, 5, 10};
    const Matrix x_fit = xtr_raw(fit_rows, Eigen::all);
    const Vector y_fit = train.y(fit_rows);
    const Matrix x_val = xtr_raw(val_rows, Eigen::all);
    const Vector y_val = train.y(val_rows);
    TreeParams best;
    double best_mse = std::numeric_limits<double>::infinity();
    const Index probe = std::min<Index>(n_trees, 20);
    for (Index d : depths) {
      for (Index l : leaves) {
        const TreeParams params{d, l};
        BaggedTrees bag;
        bag.fit(x_fit, y_fit, std::max<Index>(probe, 1), params, derive_seed(seed, tags::kModels));
        const double err = mse(bag.predict(x_val), y_val);
        if (err < best_mse) {
          best_mse = err;
          best = params;
        }
      }
    }
    BaggedTrees bag;
    bag.fit(xtr_raw, train.y, std::max<Index>(n_trees, 1), best, derive_seed(seed, tags::kModels, 1));
    out.predictions = bag.predict(xte_raw);
  }
  out.test_mse = mse(out.predictions, test.y);
  out.pred_corr = pearson(out.predictions, test.y, &out.corr_degenerate);
  return out;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.sd = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

namespace {

ReplicationResult run_replication(const SimDesign& design, const RunConfig& config,
                                  const ExperimentOptions& options, Index r) {
  const auto started = std::chrono::steady_clock::now();
  ReplicationResult rep;
  rep.id = r;

  SimDesign d = design;
  d.seed = derive_seed(design.seed, tags::kReplication, r);
  RunConfig cfg = config;
  cfg.seed = derive_seed(config.seed, tags::kReplication, r);
  const Simulation sim = generate(d);
  const TruthSpec& truth = sim.truth;

  Rng rng(derive_seed(cfg.seed, tags::kSplit));
  IndexList order(sim.data.n());
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<Index>(std::llround(options.train_fraction * static_cast<double>(order.size())));
  if (n_train < 2 || n_train + 2 > order.size()) throw DataError("train/test split leaves fewer than 2 rows");
  IndexList train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  IndexList test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  const Dataset train = sim.data.rows(train_idx);
  const Dataset test = sim.data.rows(test_idx);

  const PipelineResult res = run_scidnet(train, cfg);
  const PowerFdr pf = power_fdr(res.selection, res.clusters, truth);
  rep.power = pf.power;
  rep.fdr = pf.fdr;
  rep.n_active = res.screening.active.size();
  rep.n_clusters = res.clusters.size();
  rep.n_selected = res.selection.selected_cluster_ids.size();
  rep.kappa = res.selection.kappa_used;

  const std::set<Index> active(res.screening.active.begin(), res.screening.active.end());
  const std::set<Index> s0(truth.s0.begin(), truth.s0.end());
  rep.sure_screening = std::all_of(s0.begin(), s0.end(), [&](Index f) { return active.count(f) > 0; });

  const Vector sd = res.ranks.rank_sd();
  double sum_true = 0.0;
  double sum_null = 0.0;
  Index n_null = 0;
  for (Index c = 0; c < res.clusters.size(); ++c) {
    const auto& members = res.clusters.clusters[c];
    const bool is_true = std::any_of(members.begin(), members.end(), [&](Index f) { return s0.count(f) > 0; });
    if (is_true) {
      sum_true += sd(static_cast<Eigen::Index>(c));
      ++rep.n_true_clusters;
    } else {
      sum_null += sd(static_cast<Eigen::Index>(c));
      ++n_null;
    }
  }
  rep.rank_sd_true = rep.n_true_clusters ? sum_true / static_cast<double>(rep.n_true_clusters) : 0.0;
  rep.rank_sd_null = n_null ? sum_null / static_cast<double>(n_null) : 0.0;

  // Responses in units of the training variance.
  const double y_mean = train.y.mean();
  double y_var = (train.y.array() - y_mean).square().mean();
  if (!(y_var > 0.0)) y_var = 1.0;

  const IndexList feats = selected_features(res);
  for (std::size_t k = 0; k < options.models.size(); ++k) {
    ModelScore score;
    if (feats.empty()) {
      const Vector pred = Vector::Constant(test.y.size(), y_mean);
      score.mse = (pred - test.y).squaredNorm() / static_cast<double>(test.y.size()) / y_var;
      score.corr = 0.0;
    } else {
      const Prediction p = fit_predict(train, test, feats, options.models[k],
                                       derive_seed(cfg.seed, tags::kModels, k), options.n_trees);
      score.mse = p.test_mse / y_var;
      score.corr = p.pred_corr;
    }
    rep.models.push_back(score);
  }

  if (options.baseline_lassonet) {
    const LassoNetModel base = fit_lassonet_validated(train.x, train.y, cfg, 1.0 / 8.0,
                                                      derive_seed(cfg.seed, tags::kBaseline));
    rep.baseline_support = base.support.size();
    Index hits = 0;
    for (Index f : base.support) hits += s0.count(f);
    rep.baseline_power = static_cast<double>(hits) / static_cast<double>(s0.size());
    rep.baseline_fdr = base.support.empty()
                           ? 0.0
                           : static_cast<double>(base.support.size() - hits) /
                                 static_cast<double>(base.support.size());
    const Vector pred = base.predict(test.x);
    rep.baseline_mse = (pred - test.y).squaredNorm() / static_cast<double>(test.y.size()) / y_var;
    rep.baseline_corr = pearson(pred, test.y);
  }

  rep.ok = true;
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rep;
}

}  // namespace

ExperimentSummary run_experiment(const SimDesign& design, const RunConfig& config,
                                 const ExperimentOptions& options) {
  if (options.replications < 1) throw ConfigError("replications: must be at least 1");
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw ConfigError("train_fraction: must lie in (0, 1)");
  }
  design.validate();
  config.validate();

  std::vector<ReplicationResult> reps(options.replications);
  parallel_for(options.replications, [&](std::size_t r) {
    try {
      reps[r] = run_replication(design, config, options, r);
    } catch (const std::exception& e) {
      reps[r] = ReplicationResult{};
      reps[r].id = r;
      reps[r].ok = false;
      reps[r].error = e.what();
    }
  });

  ExperimentSummary out;
  out.config = config;
  out.design = design;
  out.options = options;
  out.models = options.models;
  out.n_failed = static_cast<Index>(std::count_if(reps.begin(), reps.end(), [](const auto& r) { return !r.ok; }));
  out.n_replications = options.replications - out.n_failed;
  if (static_cast<double>(out.n_failed) > 0.2 * static_cast<double>(options.replications)) {
    std::string first;
    for (const auto& r : reps) {
      if (!r.ok) {
        first = r.error;
        break;
      }
    }
    throw PipelineError(std::to_string(out.n_failed) + " of " + std::to_string(options.replications) +
                        " replications failed; first error: " + first);
  }

  std::vector<double> power, fdr, bp, bf, bm;
  std::vector<std::vector<double>> mse(options.models.size()), corr(options.models.size());
  for (const auto& r : reps) {
    if (!r.ok) continue;
    power.push_back(r.power);
    fdr.push_back(r.fdr);
    for (std::size_t k = 0; k < options.models.size(); ++k) {
      mse[k].push_back(r.models[k].mse);
      corr[k].push_back(r.models[k].corr);
    }
    bp.push_back(r.baseline_power);
    bf.push_back(r.baseline_fdr);
    bm.push_back(r.baseline_mse);
  }
  out.power = mean_sd(power);
  out.fdr = mean_sd(fdr);
  for (std::size_t k = 0; k < options.models.size(); ++k) {
    out.test_mse.push_back(mean_sd(mse[k]));
    out.pred_corr.push_back(mean_sd(corr[k]));
  }
  if (options.baseline_lassonet) {
    out.baseline_power = mean_sd(bp);
    out.baseline_fdr = mean_sd(bf);
    out.baseline_mse = mean_sd(bm);
  }
  out.replications = std::move(reps);
  return out;
}

}  // namespace scidnet
