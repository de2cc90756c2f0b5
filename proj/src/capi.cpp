#include "wfn.h"

#include <cstring>
#include <functional>
#include <string>

#include "wfn/config.hpp"
#include "wfn/errors.hpp"

struct wfn_config {
  wfn::RunConfig cfg;
};

namespace {

thread_local std::string g_last_error;

wfn_status run_guarded(const std::function<void()>& fn) {
  try {
    fn();
    g_last_error.clear();
    return WFN_OK;
  } catch (const wfn::ConfigError& e) {
    g_last_error = e.what();
    return WFN_ERR_CONFIG;
  } catch (const wfn::DataError& e) {
    g_last_error = e.what();
    return WFN_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return WFN_ERR_PIPELINE;
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* wfn_version(void) { return "1.0.0"; }

const char* wfn_last_error(void) { return g_last_error.c_str(); }

wfn_config* wfn_config_new(void) {
  try {
    return new wfn_config{};
  } catch (...) {
    return nullptr;
  }
}

void wfn_config_free(wfn_config* cfg) { delete cfg; }

wfn_status wfn_config_load_file(wfn_config* cfg, const char* path) {
  if (!cfg || !path) {
    g_last_error = "null argument";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { cfg->cfg.load_file(path); });
}

wfn_status wfn_config_apply_env(wfn_config* cfg) {
  if (!cfg) {
    g_last_error = "null argument";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { cfg->cfg.apply_env(); });
}

wfn_status wfn_config_set(wfn_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) {
    g_last_error = "null argument";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { cfg->cfg.set(key, value); });
}

wfn_status wfn_config_help(char** out_text) {
  if (!out_text) {
    g_last_error = "null argument";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { *out_text = dup_string(wfn::RunConfig::help_text()); });
}

wfn_status wfn_cmd_train_baseline(const wfn_config* cfg) {
  if (!cfg) {
    g_last_error = "null config";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { wfn::cmd_train_baseline(cfg->cfg); });
}

wfn_status wfn_cmd_compress(const wfn_config* cfg) {
  if (!cfg) {
    g_last_error = "null config";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { wfn::cmd_compress(cfg->cfg); });
}

wfn_status wfn_cmd_analyze(const char* model_path, const char* baseline_path,
                           const char* report_out) {
  if (!model_path || !baseline_path) {
    g_last_error = "null path";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] {
    wfn::cmd_analyze(model_path, baseline_path,
                     report_out ? report_out : std::string());
  });
}

wfn_status wfn_cmd_gen_clusters(double delta, double delta0, double w_max,
                                size_t omega, char** out_text) {
  if (!out_text) {
    g_last_error = "null output pointer";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] {
    *out_text = dup_string(wfn::cmd_gen_clusters(delta, delta0, w_max, omega));
  });
}

wfn_status wfn_cmd_noise_exp(const wfn_config* cfg) {
  if (!cfg) {
    g_last_error = "null config";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { wfn::cmd_noise_exp(cfg->cfg); });
}

wfn_status wfn_cmd_prune_exp(const wfn_config* cfg) {
  if (!cfg) {
    g_last_error = "null config";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { wfn::cmd_prune_exp(cfg->cfg); });
}

wfn_status wfn_cmd_delta_sweep(const wfn_config* cfg) {
  if (!cfg) {
    g_last_error = "null config";
    return WFN_ERR_CONFIG;
  }
  return run_guarded([&] { wfn::cmd_delta_sweep(cfg->cfg); });
}

void wfn_string_free(char* s) { delete[] s; }

}  // extern "C"
