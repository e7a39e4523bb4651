#include "scidnet/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "scidnet/dataset.hpp"
#include "scidnet/parallel.hpp"
#include "scidnet/pipeline.hpp"

namespace scidnet {

using nlohmann::json;

namespace {

// ---- strict field readers ------------------------------------------------

std::string qualified(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

double read_double(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + ": expected a number");
  return v.get<double>();
}

Index read_index(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<Index>();
  if (v.is_number_integer()) throw ConfigError(key + ": must be a non-negative integer");
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 9.0e15) return static_cast<Index>(d);
  }
  throw ConfigError(key + ": expected a non-negative integer");
}

std::uint64_t read_seed(const json& v, const std::string& key) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  throw ConfigError(key + ": expected a non-negative integer");
}

bool read_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key + ": expected true or false");
  return v.get<bool>();
}

std::string read_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + ": expected a string");
  return v.get<std::string>();
}

bool is_auto(const json& v) { return v.is_string() && v.get<std::string>() == "auto"; }

using Handler = std::function<void(const json&, const std::string&)>;

void dispatch(const json& obj, const std::string& prefix, const std::map<std::string, Handler>& fields) {
  if (!obj.is_object()) {
    throw ConfigError((prefix.empty() ? std::string("config") : prefix) + ": expected a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError("unknown key '" + qualified(prefix, key) + "'");
    it->second(value, qualified(prefix, key));
  }
}

SimDesign parse_design(const json& obj) {
  SimDesign d;
  bool sigma_set = false;
  const std::map<std::string, Handler> fields = {
      {"n", [&](const json& v, const std::string& k) { d.n = read_index(v, k); }},
      {"p", [&](const json& v, const std::string& k) { d.p = read_index(v, k); }},
      {"rho", [&](const json& v, const std::string& k) { d.rho = read_double(v, k); }},
      {"link",
       [&](const json& v, const std::string& k) { d.link = parse_link(read_string(v, k)); }},
      {"s0",
       [&](const json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k + ": expected an array of 1-based indices");
         d.s0.clear();
         for (const auto& e : v) {
           const Index idx = read_index(e, k);
           if (idx < 1) throw ConfigError(k + ": indices are 1-based");
           d.s0.push_back(idx - 1);
         }
       }},
      {"beta0", [&](const json& v, const std::string& k) { d.beta0 = read_double(v, k); }},
      {"sigma2",
       [&](const json& v, const std::string& k) {
         sigma_set = true;
         if (v.is_null()) {
           d.sigma2.reset();
         } else {
           d.sigma2 = read_double(v, k);
         }
       }},
      {"snr",
       [&](const json& v, const std::string& k) {
         if (v.is_null()) {
           d.snr.reset();
         } else {
           d.snr = read_double(v, k);
         }
       }},
      {"feature_dist",
       [&](const json& v, const std::string& k) { d.feature_dist = parse_feature_dist(read_string(v, k)); }},
      {"df", [&](const json& v, const std::string& k) { d.df = read_double(v, k); }},
      {"seed", [&](const json& v, const std::string& k) { d.seed = read_seed(v, k); }},
  };
  dispatch(obj, "design", fields);
  // An snr calibration replaces the default noise variance unless both were given.
  if (d.snr && !sigma_set) d.sigma2.reset();
  d.validate();
  return d;
}

ExperimentOptions parse_bench(const json& obj) {
  ExperimentOptions o;
  const std::map<std::string, Handler> fields = {
      {"replications", [&](const json& v, const std::string& k) { o.replications = read_index(v, k); }},
      {"models",
       [&](const json& v, const std::string& k) {
         if (!v.is_array()) throw ConfigError(k + ": expected an array of model names");
         o.models.clear();
         for (const auto& e : v) o.models.push_back(parse_model(read_string(e, k)));
       }},
      {"baseline_lassonet",
       [&](const json& v, const std::string& k) { o.baseline_lassonet = read_bool(v, k); }},
      {"train_fraction", [&](const json& v, const std::string& k) { o.train_fraction = read_double(v, k); }},
      {"n_trees", [&](const json& v, const std::string& k) { o.n_trees = read_index(v, k); }},
  };
  dispatch(obj, "bench", fields);
  if (o.replications < 1) throw ConfigError("bench.replications: must be at least 1");
  if (!(o.train_fraction > 0.0 && o.train_fraction < 1.0)) {
    throw ConfigError("bench.train_fraction: must lie in (0, 1)");
  }
  if (o.n_trees < 1) throw ConfigError("bench.n_trees: must be at least 1");
  return o;
}

ParsedConfig parse_config_json(const json& root) {
  ParsedConfig out;
  RunConfig& c = out.run;
  auto idx = [](Index& slot) { return [&slot](const json& v, const std::string& k) { slot = read_index(v, k); }; };
  auto dbl = [](double& slot) { return [&slot](const json& v, const std::string& k) { slot = read_double(v, k); }; };
  const std::map<std::string, Handler> fields = {
      {"active_set_size",
       [&](const json& v, const std::string& k) {
         if (is_auto(v) || v.is_null()) {
           c.active_set_size.reset();
         } else {
           c.active_set_size = read_index(v, k);
         }
       }},
      {"merge_threshold_r", dbl(c.merge_threshold_r)},
      {"hierarchy_m", dbl(c.hierarchy_m)},
      {"lambda_start",
       [&](const json& v, const std::string& k) {
         if (is_auto(v) || v.is_null()) {
           c.lambda_start.reset();
         } else {
           c.lambda_start = read_double(v, k);
         }
       }},
      {"path_multiplier", dbl(c.path_multiplier)},
      {"bootstrap_b", idx(c.bootstrap_b)},
      {"kappa",
       [&](const json& v, const std::string& k) {
         if (is_auto(v) || v.is_null()) {
           c.kappa.reset();
         } else {
           c.kappa = read_double(v, k);
         }
       }},
      {"fdr_level_q", dbl(c.fdr_level_q)},
      {"seed", [&](const json& v, const std::string& k) { c.seed = read_seed(v, k); }},
      {"cv_folds", idx(c.cv_folds)},
      {"nodewise_grid", idx(c.nodewise_grid)},
      {"hidden_size", idx(c.hidden_size)},
      {"epochs_dense", idx(c.epochs_dense)},
      {"epochs_path", idx(c.epochs_path)},
      {"learning_rate", dbl(c.learning_rate)},
      {"momentum", dbl(c.momentum)},
      {"batch_size", idx(c.batch_size)},
      {"patience", idx(c.patience)},
      {"validation_fraction", dbl(c.validation_fraction)},
      {"e0_factor", dbl(c.e0_factor)},
      {"lambda_cap_factor", dbl(c.lambda_cap_factor)},
      {"design", [&](const json& v, const std::string&) { out.design = parse_design(v); }},
      {"bench", [&](const json& v, const std::string&) { out.bench = parse_bench(v); }},
  };
  dispatch(root, "", fields);
  c.validate();
  return out;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* target = &root;
  std::string rest = key;
  for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
    const std::string head = rest.substr(0, dot);
    if (!target->contains(head)) (*target)[head] = json::object();
    target = &(*target)[head];
    if (!target->is_object()) throw ConfigError("override '" + key + "': '" + head + "' is not an object");
    rest = rest.substr(dot + 1);
  }
  (*target)[rest] = value;
}

// ---- reports --------------------------------------------------------------

json one_based(const IndexList& idx) {
  json arr = json::array();
  for (Index i : idx) arr.push_back(i + 1);
  return arr;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json config_json(const RunConfig& c) {
  json j;
  j["active_set_size"] = c.active_set_size ? json(*c.active_set_size) : json("auto");
  j["merge_threshold_r"] = c.merge_threshold_r;
  j["hierarchy_m"] = c.hierarchy_m;
  j["lambda_start"] = c.lambda_start ? json(*c.lambda_start) : json("auto");
  j["path_multiplier"] = c.path_multiplier;
  j["bootstrap_b"] = c.bootstrap_b;
  j["kappa"] = c.kappa ? json(*c.kappa) : json("auto");
  j["fdr_level_q"] = c.fdr_level_q;
  j["seed"] = c.seed;
  j["cv_folds"] = c.cv_folds;
  j["nodewise_grid"] = c.nodewise_grid;
  j["hidden_size"] = c.hidden_size;
  j["epochs_dense"] = c.epochs_dense;
  j["epochs_path"] = c.epochs_path;
  j["learning_rate"] = c.learning_rate;
  j["momentum"] = c.momentum;
  j["batch_size"] = c.batch_size;
  j["patience"] = c.patience;
  j["validation_fraction"] = c.validation_fraction;
  j["e0_factor"] = c.e0_factor;
  j["lambda_cap_factor"] = c.lambda_cap_factor;
  return j;
}

json design_json(const SimDesign& d) {
  json j;
  j["n"] = d.n;
  j["p"] = d.p;
  j["rho"] = d.rho;
  j["link"] = to_string(d.link);
  j["s0"] = one_based(d.support());
  j["beta0"] = d.beta0;
  j["sigma2"] = optional_number(d.sigma2);
  j["snr"] = optional_number(d.snr);
  j["feature_dist"] = to_string(d.feature_dist);
  j["df"] = d.df;
  j["seed"] = d.seed;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw DataError("cannot create output directory '" + dir.string() + "'");
  }
}

std::string feature_label(const Dataset& data, Index f) {
  return data.feature_names.empty() ? "x" + std::to_string(f + 1) : data.feature_names[f];
}

json selection_report(const Dataset& data, const PipelineResult& res, const RunConfig& cfg) {
  json j;
  json clusters = json::array();
  const std::set<Index> chosen(res.selection.selected_cluster_ids.begin(),
                               res.selection.selected_cluster_ids.end());
  for (Index c = 0; c < res.clusters.size(); ++c) {
    json cj;
    cj["id"] = c + 1;
    cj["members"] = one_based(res.clusters.clusters[c]);
    cj["representative"] = res.clusters.representatives[c] + 1;
    cj["representative_name"] = feature_label(data, res.clusters.representatives[c]);
    cj["avg_rank"] = res.ranks.avg_ranks(static_cast<Eigen::Index>(c));
    cj["selected"] = chosen.count(c) > 0;
    clusters.push_back(std::move(cj));
  }
  j["clusters"] = std::move(clusters);
  j["delta_star"] = optional_number(res.selection.delta_star);
  json sel = json::array();
  for (Index c : res.selection.selected_cluster_ids) sel.push_back(c + 1);
  j["selected_clusters"] = std::move(sel);
  const IndexList feats = selected_features(res);
  j["selected_features"] = one_based(feats);
  json names = json::array();
  for (Index f : feats) names.push_back(feature_label(data, f));
  j["selected_feature_names"] = std::move(names);
  json curve = json::array();
  for (const auto& pt : res.selection.curve) {
    curve.push_back({{"delta", pt.delta}, {"n_plus", pt.n_plus}, {"e0_hat", pt.e0_hat}, {"fdr_hat", pt.fdr_hat}});
  }
  j["fdr_curve"] = std::move(curve);
  j["kappa"] = res.selection.kappa_used;
  j["q"] = res.selection.q;
  j["active_set"] = one_based(res.screening.active);
  j["active_set_clamped"] = res.screening.clamped;
  j["hz_bandwidth"] = res.screening.bandwidth;
  j["n"] = data.n();
  j["p"] = data.p();
  j["config"] = config_json(cfg);
  return j;
}

std::string run_summary_text(const Dataset& data, const PipelineResult& res) {
  std::ostringstream s;
  s << "samples: " << data.n() << "\nfeatures: " << data.p() << "\n";
  s << "active set: " << res.screening.active.size() << " features (HZ bandwidth "
    << format_double(res.screening.bandwidth) << ")\n";
  s << "clusters: " << res.clusters.size() << "\n";
  s << "bootstrap replicates: " << res.ranks.b() << "\n";
  s << "kappa: " << format_double(res.selection.kappa_used) << "\n";
  s << "target FDR level q: " << format_double(res.selection.q) << "\n";
  s << "delta*: " << (res.selection.delta_star ? format_double(*res.selection.delta_star) : "none") << "\n";
  s << "selected clusters: " << res.selection.selected_cluster_ids.size() << "\n";
  for (Index c : res.selection.selected_cluster_ids) {
    s << "  cluster " << c + 1 << " (avg rank "
      << format_double(res.ranks.avg_ranks(static_cast<Eigen::Index>(c))) << "): representative "
      << feature_label(data, res.clusters.representatives[c]) << "; members";
    for (Index f : res.clusters.clusters[c]) s << " " << feature_label(data, f);
    s << "\n";
  }
  return s.str();
}

// ---- subcommands ----------------------------------------------------------

void cmd_simulate(const ParsedConfig& cfg, const std::filesystem::path& out) {
  if (!cfg.design) throw ConfigError("design: simulate requires a \"design\" object");
  const Simulation sim = generate(*cfg.design);
  ensure_dir(out);
  write_csv(sim.data, out / "data.csv", "y");
  json truth;
  truth["s0"] = one_based(sim.truth.s0);
  truth["sigma2"] = sim.sigma2;
  std::vector<double> beta(sim.beta.data(), sim.beta.data() + sim.beta.size());
  truth["beta"] = beta;
  truth["design"] = design_json(*cfg.design);
  write_json(out / "truth.json", truth);
}

void cmd_run(const ParsedConfig& cfg, const std::filesystem::path& data_path, const std::string& response,
             const std::filesystem::path& out) {
  const Dataset data = load_csv(data_path, response);
  const PipelineResult res = run_scidnet(data, cfg.run);
  ensure_dir(out);
  write_json(out / "selection_report.json", selection_report(data, res, cfg.run));
  write_ranks_csv(res.ranks, res.clusters.representatives, out / "ranks.csv");
  write_curve_csv(res.selection, out / "curve.csv");
  write_text(out / "summary.txt", run_summary_text(data, res));
}

json mean_sd_json(const MeanSd& m) { return {{"mean", m.mean}, {"sd", m.sd}}; }

void cmd_bench(ParsedConfig cfg, bool paper_scale, const std::filesystem::path& out) {
  if (!cfg.design) throw ConfigError("design: bench requires a \"design\" object");
  if (paper_scale) {
    cfg.design->n = 400;
    cfg.design->p = 1000;
    cfg.bench.replications = 50;
    cfg.run.bootstrap_b = 50;
    cfg.design->validate();
  }
  const ExperimentSummary sum = run_experiment(*cfg.design, cfg.run, cfg.bench);
  ensure_dir(out);

  json j;
  j["power"] = mean_sd_json(sum.power);
  j["fdr"] = mean_sd_json(sum.fdr);
  json models = json::object();
  for (std::size_t k = 0; k < sum.models.size(); ++k) {
    models[to_string(sum.models[k])] = {{"test_mse", mean_sd_json(sum.test_mse[k])},
                                        {"pred_corr", mean_sd_json(sum.pred_corr[k])}};
  }
  j["models"] = std::move(models);
  if (sum.options.baseline_lassonet) {
    j["baseline_lassonet"] = {{"power", mean_sd_json(sum.baseline_power)},
                              {"fdr", mean_sd_json(sum.baseline_fdr)},
                              {"test_mse", mean_sd_json(sum.baseline_mse)}};
  }
  j["n_replications"] = sum.n_replications;
  j["n_failed"] = sum.n_failed;
  j["config"] = config_json(sum.config);
  j["design"] = design_json(sum.design);
  json bench;
  json names = json::array();
  for (auto m : sum.options.models) names.push_back(to_string(m));
  bench["models"] = std::move(names);
  bench["replications"] = sum.options.replications;
  bench["baseline_lassonet"] = sum.options.baseline_lassonet;
  bench["train_fraction"] = sum.options.train_fraction;
  bench["n_trees"] = sum.options.n_trees;
  j["bench"] = std::move(bench);
  write_json(out / "summary.json", j);

  auto model_cell = [&](const ReplicationResult& r, ModelKind kind, bool want_mse) -> std::string {
    for (std::size_t k = 0; k < sum.models.size(); ++k) {
      if (sum.models[k] == kind && k < r.models.size()) {
        return format_double(want_mse ? r.models[k].mse : r.models[k].corr);
      }
    }
    return "";
  };
  std::ostringstream csv;
  csv << "replication_id,power,fdr,mse_mlp,mse_rt,corr_mlp,corr_rt,runtime_s,ok,sure_screening,"
         "n_active,n_clusters,n_selected,kappa,rank_sd_true,rank_sd_null,baseline_power,"
         "baseline_fdr,baseline_mse,baseline_support,error\n";
  for (const auto& r : sum.replications) {
    csv << r.id + 1 << ',';
    if (r.ok) {
      csv << format_double(r.power) << ',' << format_double(r.fdr) << ','
          << model_cell(r, ModelKind::Mlp, true) << ',' << model_cell(r, ModelKind::BaggedTree, true) << ','
          << model_cell(r, ModelKind::Mlp, false) << ',' << model_cell(r, ModelKind::BaggedTree, false)
          << ',' << format_double(r.runtime_s) << ",1," << (r.sure_screening ? 1 : 0) << ','
          << r.n_active << ',' << r.n_clusters << ',' << r.n_selected << ',' << format_double(r.kappa)
          << ',' << format_double(r.rank_sd_true) << ',' << format_double(r.rank_sd_null) << ',';
      if (sum.options.baseline_lassonet) {
        csv << format_double(r.baseline_power) << ',' << format_double(r.baseline_fdr) << ','
            << format_double(r.baseline_mse) << ',' << r.baseline_support;
      } else {
        csv << ",,,";
      }
      csv << ",\n";
    } else {
      std::string msg = r.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
      }
      csv << ",,,,,,,0,,,,,,,,,,,," << msg << "\n";
    }
  }
  write_text(out / "replications.csv", csv.str());
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  return parse_config_json(root);
}

ParsedConfig parse_config(const std::filesystem::path& path) { return parse_config_json(read_json_file(path)); }

ParsedConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json root = read_json_file(path);
  if (!root.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& o : overrides) apply_override(root, o);
  return parse_config_json(root);
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Error-controlled nonlinear feature selection by screening and cleaning"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = all cores)");

  std::string config_path;
  std::string out_dir;
  std::string data_path;
  std::string response = "y";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool paper_scale = false;

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim->add_option("--config", config_path, "Config file with a design object")->required();
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--set", overrides, "Override a config key (key=value)");

  auto* run = app.add_subcommand("run", "Select features on a CSV dataset");
  run->add_option("--config", config_path, "Run config file")->required();
  run->add_option("--data", data_path, "CSV data file with a header row")->required();
  run->add_option("--response", response, "Response column name");
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Root seed (overrides the config)");
  run->add_option("--set", overrides, "Override a config key (key=value)");

  auto* bench = app.add_subcommand("bench", "Monte-Carlo power/FDR/prediction benchmark");
  bench->add_option("--config", config_path, "Config file with design and bench objects")->required();
  bench->add_option("--out", out_dir, "Output directory")->required();
  bench->add_flag("--paper-scale", paper_scale, "n = 400, p = 1000, 50 replications, B = 50");
  bench->add_option("--set", overrides, "Override a config key (key=value)");

  for (auto* sub : {sim, run, bench}) sub->add_option("--threads", threads, "Worker thread cap (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    ThreadLimit limit(threads);
    ParsedConfig cfg = parse_config(config_path, overrides);
    if (seed) cfg.run.seed = *seed;
    if (sim->parsed()) {
      cmd_simulate(cfg, out_dir);
    } else if (run->parsed()) {
      cmd_run(cfg, data_path, response, out_dir);
    } else {
      cmd_bench(cfg, paper_scale, out_dir);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "pipeline failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace scidnet
