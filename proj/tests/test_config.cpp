#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <doctest.h>

#include "wfn/config.hpp"
#include "wfn/errors.hpp"

using namespace wfn;

TEST_CASE("defaults cover every registered key") {
  RunConfig cfg;
  CHECK(cfg.get("dataset.kind") == "moons");
  CHECK(cfg.get_size("fix.T") == 10);
  CHECK(cfg.get_double("fix.delta") == 0.01);
  CHECK(cfg.get_double("train.alpha") == 0.4);
  CHECK(cfg.get_bool("train.fix_norm_params"));
  CHECK(cfg.get_size_list("model.hidden") ==
        std::vector<std::size_t>{16, 16});
  CHECK(cfg.get_double_list("sweep.deltas").size() == 4);
}

TEST_CASE("unknown keys are rejected") {
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.set("fix.deltaa", "0.1"), ConfigError);
  CHECK_THROWS_AS(cfg.get("nope"), ConfigError);
}

TEST_CASE("malformed numeric values are rejected on read") {
  RunConfig cfg;
  cfg.set("fix.delta", "squirrel");
  CHECK_THROWS_AS(cfg.get_double("fix.delta"), ConfigError);
}

TEST_CASE("json files override defaults, nested or flat") {
  const std::string path = "config_test.json";
  {
    std::ofstream out(path);
    out << R"({"fix": {"delta": 0.02, "T": 4}, "dataset.samples": 128})";
  }
  RunConfig cfg;
  cfg.load_file(path);
  CHECK(cfg.get_double("fix.delta") == 0.02);
  CHECK(cfg.get_size("fix.T") == 4);
  CHECK(cfg.get_size("dataset.samples") == 128);
  CHECK(cfg.get_double("train.alpha") == 0.4);  // untouched default
  std::remove(path.c_str());
}

TEST_CASE("unknown keys in a config file are a config error") {
  const std::string path = "config_bad.json";
  {
    std::ofstream out(path);
    out << R"({"fix": {"dleta": 0.02}})";
  }
  RunConfig cfg;
  CHECK_THROWS_AS(cfg.load_file(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("environment variables override files; set overrides both") {
  const std::string path = "config_prec.json";
  {
    std::ofstream out(path);
    out << R"({"fix": {"delta": 0.02}, "train": {"alpha": 0.3}})";
  }
  setenv("WFN_FIX__DELTA", "0.03", 1);
  RunConfig cfg;
  cfg.load_file(path);
  cfg.apply_env();
  CHECK(cfg.get_double("fix.delta") == 0.03);
  CHECK(cfg.get_double("train.alpha") == 0.3);  // file value survives

  cfg.set("fix.delta", "0.04");
  CHECK(cfg.get_double("fix.delta") == 0.04);
  unsetenv("WFN_FIX__DELTA");
  std::remove(path.c_str());
}

TEST_CASE("help text names keys, defaults and consuming modules") {
  const std::string help = RunConfig::help_text();
  CHECK(help.find("fix.delta") != std::string::npos);
  CHECK(help.find("noise.betas") != std::string::npos);
  CHECK(help.find("trainer") != std::string::npos);
}
