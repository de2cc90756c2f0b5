#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wfn/data.hpp"
#include "wfn/fixer.hpp"
#include "wfn/metrics.hpp"
#include "wfn/model.hpp"
#include "wfn/train.hpp"

namespace wfn {

enum class NoiseMode { Relative, Absolute };

struct NoiseSpec {
  std::size_t layer_index = 0;
  double beta = 0.0;
  NoiseMode mode = NoiseMode::Relative;
  std::size_t repeats = 20;
  std::uint64_t seed = 0;
};

// Perturbs exactly one layer:
//   relative: w += beta * |w| * eps
//   absolute: w += beta * mean|w_layer| * eps,  eps ~ N(0,1)
Network inject_noise(const Network& net, const NoiseSpec& spec);

struct NoiseRow {
  std::size_t layer_index;
  double beta;
  NoiseMode mode;
  double mean_accuracy;
  double ci95;  // normal-approximation half-width
};

std::vector<NoiseRow> noise_experiment(const Network& net, const Dataset& data,
                                       const std::vector<double>& betas,
                                       std::size_t repeats, std::uint64_t seed);

std::string noise_rows_to_csv(const std::vector<NoiseRow>& rows);

struct PruneInitReport {
  double prune_fraction = 0.0;
  std::size_t pruned_count = 0;
  std::vector<std::size_t> pruned_ids;
  double final_accuracy = 0.0;
  double entropy_bits = 0.0;
  std::size_t unique_nonzero = 0;
  FixingState state;
  Network net;  // final artifact
};

// Randomly fixes p of each layer's weights to zero before iteration 1,
// then runs the normal schedule starting from p_1 = max(p, schedule p_1).
PruneInitReport prune_init_experiment(Network net, const Dataset& data,
                                      double p, const ProposalSet& proposals,
                                      const Schedule& schedule,
                                      const TrainConfig& cfg,
                                      std::uint64_t prune_seed);

struct SweepRow {
  double delta;
  double accuracy;
  double compression_ratio;
  double entropy_bits;
  std::size_t unique_count;
};

// One full compression run per delta, rows sorted by delta.
std::vector<SweepRow> delta_sweep(const Network& baseline, const Dataset& data,
                                  const std::vector<double>& deltas,
                                  double delta0, const Schedule& schedule,
                                  const TrainConfig& cfg);

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);

}  // namespace wfn
