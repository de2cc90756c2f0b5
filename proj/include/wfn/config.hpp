#pragma once

#include <map>
#include <string>
#include <vector>

namespace wfn {

// Flat key/value run configuration. Precedence: built-in defaults < config
// file < environment (WFN_ prefix) < explicit overrides (CLI flags).
class RunConfig {
 public:
  RunConfig();  // all keys at their defaults

  void load_file(const std::string& path);       // JSON object, may nest
  void apply_env(const std::string& prefix = "WFN_");
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;

  // key -> (default value, help text incl. consuming module)
  static const std::map<std::string, std::pair<std::string, std::string>>&
  registry();
  static std::string help_text();

 private:
  std::map<std::string, std::string> values_;
};

// Command entry points shared by the C API and tests. Each reads its
// parameters from the config and writes artifacts under out.dir.
void cmd_train_baseline(const RunConfig& cfg);
void cmd_compress(const RunConfig& cfg);
void cmd_analyze(const std::string& model_path, const std::string& baseline_path,
                 const std::string& report_out);
std::string cmd_gen_clusters(double delta, double delta0, double w_max,
                             std::size_t omega);
void cmd_noise_exp(const RunConfig& cfg);
void cmd_prune_exp(const RunConfig& cfg);
void cmd_delta_sweep(const RunConfig& cfg);

}  // namespace wfn
