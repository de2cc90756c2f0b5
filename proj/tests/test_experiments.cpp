#include <cmath>

#include <doctest.h>

#include "wfn/errors.hpp"
#include "wfn/experiments.hpp"

using namespace wfn;

namespace {

struct Desk {
  Dataset data;
  Network baseline;
};

// Shared small trained model; built once since training dominates runtime.
const Desk& desk() {
  static const Desk d = [] {
    Desk out{make_two_moons(200, 0.15, 3), make_mlp({2, 8, 8, 2}, 7)};
    TrainConfig cfg;
    cfg.eta = 2e-3;
    train_baseline(out.baseline, out.data, cfg, 80);
    return out;
  }();
  return d;
}

}  // namespace

TEST_CASE("zero-scale noise leaves the network unchanged") {
  NoiseSpec spec;
  spec.layer_index = 0;
  spec.beta = 0.0;
  spec.seed = 4;
  for (NoiseMode mode : {NoiseMode::Relative, NoiseMode::Absolute}) {
    spec.mode = mode;
    const Network noisy = inject_noise(desk().baseline, spec);
    CHECK(serialize_model(noisy) == serialize_model(desk().baseline));
  }
}

TEST_CASE("relative noise cannot move a zero weight") {
  Network net = desk().baseline;
  net.weight_at(0) = 0.0;
  net.weight_at(5) = 0.0;
  NoiseSpec spec;
  spec.layer_index = 0;
  spec.beta = 2.0;
  spec.mode = NoiseMode::Relative;
  spec.seed = 9;
  const Network noisy = inject_noise(net, spec);
  CHECK(noisy.weight_at(0) == 0.0);
  CHECK(noisy.weight_at(5) == 0.0);
  // Absolute noise does move it.
  spec.mode = NoiseMode::Absolute;
  CHECK(inject_noise(net, spec).weight_at(0) != 0.0);
}

TEST_CASE("noise injection is deterministic per seed and touches one layer") {
  NoiseSpec spec;
  spec.layer_index = 1;
  spec.beta = 0.5;
  spec.mode = NoiseMode::Relative;
  spec.seed = 123;
  const Network a = inject_noise(desk().baseline, spec);
  const Network b = inject_noise(desk().baseline, spec);
  CHECK(serialize_model(a) == serialize_model(b));
  spec.seed = 124;
  const Network c = inject_noise(desk().baseline, spec);
  CHECK(serialize_model(a) != serialize_model(c));

  CHECK(a.layers[0].weights == desk().baseline.layers[0].weights);
  CHECK(a.layers[2].weights == desk().baseline.layers[2].weights);
  CHECK(a.layers[1].weights != desk().baseline.layers[1].weights);
}

TEST_CASE("out-of-range layer index is a data error") {
  NoiseSpec spec;
  spec.layer_index = 99;
  CHECK_THROWS_AS(inject_noise(desk().baseline, spec), DataError);
}

TEST_CASE("noise study rows behave at the extremes") {
  const auto rows =
      noise_experiment(desk().baseline, desk().data, {0.0, 100.0}, 10, 42);
  REQUIRE(rows.size() == desk().baseline.layers.size() * 2 * 2);
  const double base_acc = evaluate_accuracy(desk().baseline, desk().data);
  for (const auto& row : rows) {
    if (row.beta == 0.0) {
      CHECK(row.mean_accuracy == doctest::Approx(base_acc));
      CHECK(row.ci95 < 1e-12);
    } else {
      // Scrambling one layer with huge noise drops towards chance level.
      CHECK(row.mean_accuracy < 0.8);
    }
  }
}

TEST_CASE("noise csv has the documented header") {
  const auto rows = noise_experiment(desk().baseline, desk().data, {0.0}, 2, 1);
  const std::string csv = noise_rows_to_csv(rows);
  CHECK(csv.rfind("layer,beta,mode,mean_accuracy,ci95\n", 0) == 0);
}

TEST_CASE("pruned weights stay exactly zero in the final artifact") {
  Network net = desk().baseline;
  const ProposalSet proposals = [&] {
    double w_max = 0.0;
    for (const auto& e : flatten_weights(net))
      w_max = std::max(w_max, std::abs(e.value));
    return generate_proposals(0.02, 0.005, w_max);
  }();
  const Schedule schedule = Schedule::linear(3, 0.02);
  TrainConfig cfg;
  cfg.eta = 2e-3;
  cfg.epochs_per_iteration = 2;

  const PruneInitReport report = prune_init_experiment(
      net, desk().data, 0.3, proposals, schedule, cfg, 17);
  CHECK(report.prune_fraction == 0.3);
  CHECK(report.pruned_count == report.pruned_ids.size());
  CHECK(report.pruned_count > 0);
  for (std::size_t id : report.pruned_ids) {
    CHECK(report.net.weight_at(id) == 0.0);
    CHECK(report.net.fix_mask[id]);
  }
  CHECK(report.state.fixed_count() == net.total_weights());
  CHECK(report.unique_nonzero > 0);
}

TEST_CASE("zero pruning reproduces the plain pipeline") {
  Network for_prune = desk().baseline;
  Network for_plain = desk().baseline;
  const ProposalSet proposals = generate_proposals(0.02, 0.005, 2.0);
  const Schedule schedule = Schedule::linear(2, 0.02);
  TrainConfig cfg;
  cfg.eta = 2e-3;
  cfg.epochs_per_iteration = 1;

  const PruneInitReport report = prune_init_experiment(
      for_prune, desk().data, 0.0, proposals, schedule, cfg, 17);
  run_wfn(for_plain, desk().data, proposals, schedule, cfg);
  CHECK(serialize_model(report.net) == serialize_model(for_plain));
}

TEST_CASE("invalid prune fractions are rejected") {
  TrainConfig cfg;
  const ProposalSet proposals = generate_proposals(0.02, 0.005, 1.0);
  const Schedule schedule = Schedule::linear(2, 0.02);
  CHECK_THROWS_AS(prune_init_experiment(desk().baseline, desk().data, 1.0,
                                        proposals, schedule, cfg, 1),
                  ConfigError);
  CHECK_THROWS_AS(prune_init_experiment(desk().baseline, desk().data, -0.1,
                                        proposals, schedule, cfg, 1),
                  ConfigError);
}

TEST_CASE("delta sweep rows are sorted and internally consistent") {
  TrainConfig cfg;
  cfg.eta = 2e-3;
  cfg.epochs_per_iteration = 1;
  const Schedule schedule = Schedule::linear(2, 0.01);
  const auto rows =
      delta_sweep(desk().baseline, desk().data, {0.02, 0.005}, 0.002, schedule, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].delta == 0.005);
  CHECK(rows[1].delta == 0.02);
  for (const auto& row : rows) {
    CHECK(row.unique_count > 0);
    CHECK(row.entropy_bits <=
          std::log2(static_cast<double>(row.unique_count)) + 1e-9);
    CHECK(row.compression_ratio > 0.0);
  }
  const std::string csv = sweep_rows_to_csv(rows);
  CHECK(csv.rfind("delta,accuracy,compression_ratio,entropy_bits,unique_count\n",
                  0) == 0);
  CHECK_THROWS_AS(
      delta_sweep(desk().baseline, desk().data, {}, 0.002, schedule, cfg),
      ConfigError);
}
