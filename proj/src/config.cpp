#include "wfn/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "wfn/data.hpp"
#include "wfn/errors.hpp"
#include "wfn/experiments.hpp"
#include "wfn/metrics.hpp"
#include "wfn/model.hpp"
#include "wfn/train.hpp"

namespace wfn {

const std::map<std::string, std::pair<std::string, std::string>>&
RunConfig::registry() {
  static const std::map<std::string, std::pair<std::string, std::string>> reg = {
      {"dataset.kind", {"moons", "moons|blobs|csv (data)"}},
      {"dataset.path", {"", "CSV path when dataset.kind=csv (data)"}},
      {"dataset.samples", {"400", "generated sample count (data)"}},
      {"dataset.noise", {"0.1", "moons noise / blobs spread (data)"}},
      {"dataset.classes", {"3", "blob count when dataset.kind=blobs (data)"}},
      {"dataset.seed", {"1", "dataset generator seed (data)"}},
      {"model.hidden", {"16,16", "hidden layer widths (model-core)"}},
      {"model.baseline_path", {"baseline.wfnm", "baseline model file (model-core)"}},
      {"model.compressed_path", {"compressed.wfnm", "compressed model file (model-core)"}},
      {"train.eta", {"2e-4", "learning rate (trainer)"}},
      {"train.alpha", {"0.4", "regularisation weighting (trainer)"}},
      {"train.epochs_per_iteration", {"3", "training epochs per fixing iteration (trainer)"}},
      {"train.baseline_epochs", {"80", "epochs for train-baseline (trainer)"}},
      {"train.batch_size", {"32", "minibatch size (trainer)"}},
      {"train.seed", {"7", "training seed (trainer)"}},
      {"train.adam.beta1", {"0.9", "Adam beta1 (trainer)"}},
      {"train.adam.beta2", {"0.999", "Adam beta2 (trainer)"}},
      {"train.adam.eps", {"1e-8", "Adam epsilon (trainer)"}},
      {"train.fix_norm_params", {"true", "norm parameters join fixing (trainer)"}},
      {"fix.T", {"10", "fixing iteration count (fixer)"}},
      {"fix.delta", {"0.01", "relative distance budget delta (cluster-gen)"}},
      {"fix.delta0", {"0.001", "prune threshold delta0 (cluster-gen)"}},
      {"fix.omega_max", {"12", "maximum additive order (apot)"}},
      {"fix.p_schedule", {"", "explicit fixed fractions, empty = linear (fixer)"}},
      {"out.dir", {".", "artifact output directory (cli)"}},
      {"noise.betas", {"0,0.1,0.25,0.5,1.0", "noise scale grid (experiments)"}},
      {"noise.repeats", {"20", "trials per noise cell (experiments)"}},
      {"noise.seed", {"99", "noise trial seed (experiments)"}},
      {"prune.p", {"0.3", "prune-at-init fraction (experiments)"}},
      {"prune.seed", {"17", "prune selection seed (experiments)"}},
      {"sweep.deltas", {"0.005,0.0075,0.01,0.015", "delta sweep grid (experiments)"}},
  };
  return reg;
}

std::string RunConfig::help_text() {
  std::ostringstream os;
  os << "Configuration keys (file < WFN_* environment < command line):\n";
  for (const auto& [key, entry] : registry()) {
    os << "  " << key;
    for (std::size_t i = key.size(); i < 28; ++i) os << ' ';
    os << "default=" << (entry.first.empty() ? "<none>" : entry.first) << "  "
       << entry.second << '\n';
  }
  return os.str();
}

RunConfig::RunConfig() {
  for (const auto& [key, entry] : registry()) values_[key] = entry.first;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!registry().count(key))
    throw ConfigError("unknown configuration key '" + key + "'");
  values_[key] = value;
}

namespace {

void flatten_json(const nlohmann::json& j, const std::string& prefix,
                  std::map<std::string, std::string>& out) {
  for (const auto& [key, value] : j.items()) {
    const std::string full = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_json(value, full, out);
    } else if (value.is_string()) {
      out[full] = value.get<std::string>();
    } else {
      out[full] = value.dump();
    }
  }
}

}  // namespace

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  std::map<std::string, std::string> flat;
  flatten_json(j, "", flat);
  for (const auto& [key, value] : flat) set(key, value);
}

void RunConfig::apply_env(const std::string& prefix) {
  // Environment names: prefix + key with dots replaced by double underscore,
  // upper-cased. e.g. fix.delta -> WFN_FIX__DELTA.
  for (const auto& [key, entry] : registry()) {
    std::string env_name = prefix;
    for (char c : key)
      env_name += c == '.' ? std::string("__")
                           : std::string(1, static_cast<char>(std::toupper(c)));
    if (const char* v = std::getenv(env_name.c_str())) values_[key] = v;
  }
}

const std::string& RunConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end())
    throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

double RunConfig::get_double(const std::string& key) const {
  try {
    return std::stod(get(key));
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' is not a number: '" + get(key) + "'");
  }
}

std::size_t RunConfig::get_size(const std::string& key) const {
  try {
    const long long v = std::stoll(get(key));
    if (v < 0) throw std::out_of_range("negative");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' is not a non-negative integer: '" +
                      get(key) + "'");
  }
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get(key));
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' is not an integer: '" + get(key) + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> RunConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(get(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': cannot parse '" + cell + "'");
    }
  }
  return out;
}

std::vector<std::size_t> RunConfig::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  for (double v : get_double_list(key)) out.push_back(static_cast<std::size_t>(v));
  return out;
}

namespace {

Dataset dataset_from_config(const RunConfig& cfg) {
  const std::string kind = cfg.get("dataset.kind");
  if (kind == "moons")
    return make_two_moons(cfg.get_size("dataset.samples"),
                          cfg.get_double("dataset.noise"),
                          cfg.get_u64("dataset.seed"));
  if (kind == "blobs")
    return make_blobs(cfg.get_size("dataset.samples"),
                      cfg.get_size("dataset.classes"),
                      cfg.get_double("dataset.noise"),
                      cfg.get_u64("dataset.seed"));
  if (kind == "csv") {
    const std::string path = cfg.get("dataset.path");
    if (path.empty()) throw ConfigError("dataset.kind=csv requires dataset.path");
    return load_csv(path);
  }
  throw ConfigError("unknown dataset.kind '" + kind + "'");
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig tc;
  tc.eta = cfg.get_double("train.eta");
  tc.alpha = cfg.get_double("train.alpha");
  tc.epochs_per_iteration = cfg.get_size("train.epochs_per_iteration");
  tc.batch_size = cfg.get_size("train.batch_size");
  tc.seed = cfg.get_u64("train.seed");
  tc.adam.beta1 = cfg.get_double("train.adam.beta1");
  tc.adam.beta2 = cfg.get_double("train.adam.beta2");
  tc.adam.eps = cfg.get_double("train.adam.eps");
  tc.fix_norm_params = cfg.get_bool("train.fix_norm_params");
  tc.validate();
  return tc;
}

Schedule schedule_from(const RunConfig& cfg) {
  const std::size_t T = cfg.get_size("fix.T");
  const double delta = cfg.get_double("fix.delta");
  Schedule s = Schedule::linear(T, delta);
  const auto explicit_p = cfg.get_double_list("fix.p_schedule");
  if (!explicit_p.empty()) s.p_schedule = explicit_p;
  s.validate();
  return s;
}

std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  const std::filesystem::path dir = cfg.get("out.dir");
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

double max_abs_weight(const Network& net) {
  double w_max = 0.0;
  for (const auto& e : flatten_weights(net))
    w_max = std::max(w_max, std::abs(e.value));
  if (w_max == 0.0) throw PipelineError("network has no nonzero weights");
  return w_max;
}

}  // namespace

void cmd_train_baseline(const RunConfig& cfg) {
  const Dataset data = dataset_from_config(cfg);
  std::vector<std::size_t> sizes{data.features};
  for (std::size_t h : cfg.get_size_list("model.hidden")) sizes.push_back(h);
  sizes.push_back(data.classes);

  TrainConfig tc = train_config_from(cfg);
  Network net = make_mlp(sizes, tc.seed);
  train_baseline(net, data, tc, cfg.get_size("train.baseline_epochs"));

  const auto model_path = out_path(cfg, cfg.get("model.baseline_path"));
  save_model(net, model_path.string());
  std::ostringstream log;
  log << "baseline_accuracy=" << evaluate_accuracy(net, data) << "\n"
      << "weights=" << net.total_weights() << "\n";
  write_text(out_path(cfg, "baseline_log.txt"), log.str());
}

void cmd_compress(const RunConfig& cfg) {
  const Dataset data = dataset_from_config(cfg);
  const auto baseline_path = out_path(cfg, cfg.get("model.baseline_path"));
  const Network baseline = load_model(baseline_path.string());
  Network net = baseline;

  const TrainConfig tc = train_config_from(cfg);
  const Schedule schedule = schedule_from(cfg);
  const ProposalSet proposals =
      generate_proposals(cfg.get_double("fix.delta"),
                         cfg.get_double("fix.delta0"), max_abs_weight(net));

  WfnRunResult run =
      run_wfn(net, data, proposals, schedule, tc, cfg.get_size("fix.omega_max"));

  save_model(net, out_path(cfg, cfg.get("model.compressed_path")).string());
  write_text(out_path(cfg, "fixing_log.json"), run.state.to_json());
  std::ostringstream log;
  log << "baseline_accuracy=" << evaluate_accuracy(baseline, data) << "\n"
      << "final_accuracy=" << run.final_accuracy << "\n";
  for (std::size_t i = 0; i < run.accuracy_history.size(); ++i)
    log << "iteration_" << i + 1 << "_accuracy=" << run.accuracy_history[i]
        << "\n";
  write_text(out_path(cfg, "compress_log.txt"), log.str());
  const MetricsReport report = build_report(baseline, net, &run.state);
  write_text(out_path(cfg, "report.json"), report.to_json());

  for (bool fixed : net.fix_mask)
    if (!fixed && tc.fix_norm_params)
      throw PipelineError("compression finished with unfixed weights");
}

void cmd_analyze(const std::string& model_path, const std::string& baseline_path,
                 const std::string& report_out) {
  const Network model = load_model(model_path);
  const Network baseline = load_model(baseline_path);
  const MetricsReport report = build_report(baseline, model, nullptr);
  if (!report_out.empty()) write_text(report_out, report.to_json());
}

std::string cmd_gen_clusters(double delta, double delta0, double w_max,
                             std::size_t omega) {
  const ProposalSet proposals = generate_proposals(delta, delta0, w_max);
  std::ostringstream os;
  os << "# proposals delta=" << delta << " delta0=" << delta0
     << " wmax=" << w_max << "\n";
  for (double v : proposals.values) os << v << "\n";
  if (omega >= 1) {
    os << "# apot order " << omega << " (value, terms, order)\n";
    for (const auto& a : approximate_set(proposals, omega, delta))
      os << a.value << "\t" << a.term_string() << "\t" << a.order() << "\n";
  }
  return os.str();
}

void cmd_noise_exp(const RunConfig& cfg) {
  const Dataset data = dataset_from_config(cfg);
  const Network net =
      load_model(out_path(cfg, cfg.get("model.baseline_path")).string());
  const auto rows =
      noise_experiment(net, data, cfg.get_double_list("noise.betas"),
                       cfg.get_size("noise.repeats"), cfg.get_u64("noise.seed"));
  write_text(out_path(cfg, "noise_experiment.csv"), noise_rows_to_csv(rows));
}

void cmd_prune_exp(const RunConfig& cfg) {
  const Dataset data = dataset_from_config(cfg);
  const Network baseline =
      load_model(out_path(cfg, cfg.get("model.baseline_path")).string());
  Network net = baseline;
  const TrainConfig tc = train_config_from(cfg);
  const Schedule schedule = schedule_from(cfg);
  const ProposalSet proposals =
      generate_proposals(cfg.get_double("fix.delta"),
                         cfg.get_double("fix.delta0"), max_abs_weight(net));
  const PruneInitReport report =
      prune_init_experiment(std::move(net), data, cfg.get_double("prune.p"),
                            proposals, schedule, tc, cfg.get_u64("prune.seed"));
  std::ostringstream os;
  os << "p,pruned_count,final_accuracy,entropy_bits,unique_nonzero\n"
     << report.prune_fraction << ',' << report.pruned_count << ','
     << report.final_accuracy << ',' << report.entropy_bits << ','
     << report.unique_nonzero << '\n';
  write_text(out_path(cfg, "prune_experiment.csv"), os.str());
}

void cmd_delta_sweep(const RunConfig& cfg) {
  const Dataset data = dataset_from_config(cfg);
  const Network baseline =
      load_model(out_path(cfg, cfg.get("model.baseline_path")).string());
  const auto rows =
      delta_sweep(baseline, data, cfg.get_double_list("sweep.deltas"),
                  cfg.get_double("fix.delta0"), schedule_from(cfg),
                  train_config_from(cfg));
  write_text(out_path(cfg, "delta_sweep.csv"), sweep_rows_to_csv(rows));
}

}  // namespace wfn
