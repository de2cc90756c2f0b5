#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wfn/apot.hpp"
#include "wfn/clusters.hpp"
#include "wfn/model.hpp"

namespace wfn {

struct Schedule {
  std::size_t T = 10;
  double base_delta = 0.01;
  std::vector<double> p_schedule;  // strictly increasing, ends at 1.0

  static Schedule linear(std::size_t T, double base_delta);
  void validate() const;
};

// delta^t = delta * (T - t + 1), t in 1..T.
double delta_schedule(double delta, std::size_t T, std::size_t t);

// Largest n such that the first n sorted distances have mean <= delta_t.
std::size_t select_batch(const std::vector<double>& sorted_dists, double delta_t);

struct FixedBatch {
  double centre = 0.0;
  std::size_t omega = 0;
  std::size_t size = 0;
  double mean_distance = 0.0;
  bool fallback = false;  // omega escalation exhausted, full-precision assign
};

struct IterationRecord {
  std::size_t t = 0;
  double delta_t = 0.0;
  double p_t = 0.0;
  std::size_t fixed_count = 0;  // cumulative after this iteration
  std::size_t max_omega = 0;
  std::vector<FixedBatch> batches;
};

struct Assignment {
  double centre = 0.0;
  std::size_t omega = 0;
};

struct FixingState {
  double delta0 = 0.001;
  std::size_t omega_max = 12;
  std::vector<std::optional<Assignment>> assignments;  // by weight id
  std::vector<IterationRecord> history;

  std::size_t fixed_count() const;
  std::string to_json() const;
};

// One clustering pass (modal centre, distance sort, batch fix) repeated
// until the fixed fraction reaches p_t. Mutates net weights/fix state.
void fixing_iteration(Network& net, FixingState& state,
                      const ProposalSet& proposals, const Schedule& schedule,
                      std::size_t t, bool fix_norm_params);

using TrainerHook = std::function<void(Network&, const FixingState&, std::size_t t)>;

// Full T-iteration schedule; trainer_hook runs the training stage before
// each clustering stage (pass a no-op for pure post-training quantisation).
FixingState run_fixing_schedule(Network& net, const ProposalSet& proposals,
                                const Schedule& schedule,
                                const TrainerHook& trainer_hook,
                                bool fix_norm_params = true,
                                std::size_t omega_max = 12);

}  // namespace wfn
