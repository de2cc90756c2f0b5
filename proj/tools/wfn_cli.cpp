// Command-line front end. Talks to the library exclusively through the
// C API in wfn.h; exit codes mirror wfn_status (0 ok, 2 config, 3 data,
// 4 pipeline).
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfn.h"

namespace {

struct ConfigDeleter {
  void operator()(wfn_config* cfg) const { wfn_config_free(cfg); }
};
using ConfigPtr = std::unique_ptr<wfn_config, ConfigDeleter>;

int report(wfn_status status) {
  if (status != WFN_OK) std::fprintf(stderr, "error: %s\n", wfn_last_error());
  return static_cast<int>(status);
}

// Precedence: defaults < config file < WFN_* environment < --set flags.
int build_config(ConfigPtr& out, const std::string& config_file,
                 const std::vector<std::string>& overrides) {
  out.reset(wfn_config_new());
  if (!out) {
    std::fprintf(stderr, "error: out of memory\n");
    return WFN_ERR_PIPELINE;
  }
  if (!config_file.empty()) {
    if (auto s = wfn_config_load_file(out.get(), config_file.c_str()); s != WFN_OK)
      return report(s);
  }
  if (auto s = wfn_config_apply_env(out.get()); s != WFN_OK) return report(s);
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: override '%s' is not key=value\n", kv.c_str());
      return WFN_ERR_CONFIG;
    }
    if (auto s = wfn_config_set(out.get(), kv.substr(0, eq).c_str(),
                                kv.substr(eq + 1).c_str());
        s != WFN_OK)
      return report(s);
  }
  return WFN_OK;
}

std::string config_keys_help() {
  char* text = nullptr;
  if (wfn_config_help(&text) != WFN_OK || !text) return {};
  std::string out(text);
  wfn_string_free(text);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weight-fixing network compression pipeline"};
  app.require_subcommand(1);
  app.fallthrough();  // parent -c/-s flags may follow the subcommand
  app.footer(config_keys_help());

  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("-c,--config", config_file, "JSON config file");
  app.add_option("-s,--set", overrides, "config override key=value (repeatable)");

  auto* train = app.add_subcommand("train-baseline",
                                   "Train and save a float baseline model");
  auto* compress = app.add_subcommand(
      "compress", "Run the full weight-fixing pipeline on a baseline model");
  auto* noise = app.add_subcommand("noise-exp",
                                   "Relative vs absolute noise robustness study");
  auto* prune = app.add_subcommand("prune-exp", "Pruning-at-init interaction study");
  auto* sweep = app.add_subcommand("delta-sweep",
                                   "Accuracy/compression trade-off across deltas");

  auto* analyze = app.add_subcommand("analyze", "Metrics report for a model file");
  std::string model_path, baseline_path, report_out = "report.json";
  analyze->add_option("model", model_path, "model file (.wfnm)")->required();
  analyze->add_option("baseline", baseline_path, "baseline model file")->required();
  analyze->add_option("-o,--output", report_out, "report output path");

  auto* gen = app.add_subcommand("gen-clusters",
                                 "Dump the proposal set and its APoT codebook");
  double delta = 0.01, delta0 = 0.001, wmax = 1.0;
  std::size_t omega = 1;
  gen->add_option("--delta", delta, "relative distance budget")->required();
  gen->add_option("--delta0", delta0, "prune threshold")->required();
  gen->add_option("--wmax", wmax, "maximum weight magnitude")->required();
  gen->add_option("--omega", omega, "APoT order to dump (0 = proposals only)");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    char* text = nullptr;
    const auto status = wfn_cmd_gen_clusters(delta, delta0, wmax, omega, &text);
    if (status == WFN_OK && text) {
      std::fputs(text, stdout);
      wfn_string_free(text);
    }
    return report(status);
  }
  if (analyze->parsed()) {
    const auto status = wfn_cmd_analyze(model_path.c_str(), baseline_path.c_str(),
                                        report_out.c_str());
    if (status == WFN_OK)
      std::printf("report written to %s\n", report_out.c_str());
    return report(status);
  }

  ConfigPtr cfg;
  if (int s = build_config(cfg, config_file, overrides); s != WFN_OK) return s;

  wfn_status status = WFN_OK;
  if (train->parsed()) status = wfn_cmd_train_baseline(cfg.get());
  if (compress->parsed()) status = wfn_cmd_compress(cfg.get());
  if (noise->parsed()) status = wfn_cmd_noise_exp(cfg.get());
  if (prune->parsed()) status = wfn_cmd_prune_exp(cfg.get());
  if (sweep->parsed()) status = wfn_cmd_delta_sweep(cfg.get());
  return report(status);
}
