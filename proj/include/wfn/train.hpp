#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "wfn/data.hpp"
#include "wfn/fixer.hpp"
#include "wfn/model.hpp"

namespace wfn {

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct TrainConfig {
  double eta = 2e-4;
  double alpha = 0.4;
  std::size_t epochs_per_iteration = 3;
  std::size_t batch_size = 32;
  std::uint64_t seed = 7;
  AdamParams adam;
  bool fix_norm_params = true;

  void validate() const;
};

// Centres and free-weight set feeding the cluster-attraction regulariser.
struct RegContext {
  std::vector<double> centres;
  double delta0 = 0.001;
  std::vector<std::size_t> free_ids;
};

// Minibatch view into a Dataset.
struct Batch {
  std::vector<double> x;  // rows * features
  std::vector<int> y;
  std::size_t rows = 0;
  std::size_t features = 0;
};

// Forward pass with cached activations, enough for exact backprop.
// Hidden layers use ReLU; the last layer emits raw logits.
struct ForwardCache {
  std::vector<std::vector<double>> pre;   // per layer, pre-activation
  std::vector<std::vector<double>> post;  // per layer, post-activation
  std::vector<double> logits;             // rows * classes
};

ForwardCache forward(const Network& net, const Batch& batch);

// Mean softmax cross-entropy over the batch, in nats.
double loss_ce(const std::vector<double>& logits, const std::vector<int>& labels,
               std::size_t classes);

struct Gradients {
  std::vector<std::vector<double>> weights;  // per layer
  std::vector<std::vector<double>> bias;
};

// Cross-entropy loss and its exact gradients in one backward pass.
double ce_loss_and_grads(const Network& net, const Batch& batch, Gradients& grads);

// Expected relative distance to the codebook under a softmin posterior;
// sub-delta0 weights contribute zero.
double reg_loss(const Network& net, const RegContext& ctx);
double reg_loss_and_grads(const Network& net, const RegContext& ctx,
                          std::vector<double>& grad_by_weight_id);

struct AdamState {
  std::vector<std::vector<double>> m_w, v_w, m_b, v_b;
  std::size_t step = 0;

  static AdamState init(const Network& net);
};

// Per-step probe for invariant tests: gamma plus the three gradient values
// for each probed weight id.
struct StepProbe {
  double gamma = 0.0;
  double loss_ce = 0.0;
  double loss_reg = 0.0;
  std::vector<std::size_t> probe_ids;
  std::vector<double> g_ce, g_reg, g_combined;
};

// One Adam step on the combined gradient g_ce + gamma * g_reg with
// gamma = alpha * L_ce / L_reg taken as a scalar constant (0 when L_reg
// vanishes). Fixed weights are left bit-identical.
void combined_step(Network& net, const Batch& batch, const RegContext& ctx,
                   const TrainConfig& cfg, AdamState& state,
                   StepProbe* probe = nullptr);

double evaluate_accuracy(const Network& net, const Dataset& data);

// Plain cross-entropy Adam training (no regulariser, no fixing).
void train_baseline(Network& net, const Dataset& data, const TrainConfig& cfg,
                    std::size_t epochs);

struct WfnRunResult {
  FixingState state;
  std::vector<double> accuracy_history;  // per fixing iteration
  double final_accuracy = 0.0;
};

using StepObserver = std::function<void(const Network&, const StepProbe&)>;

// Full pipeline: alternate training stages (combined_step epochs) and
// clustering stages for t = 1..T.
WfnRunResult run_wfn(Network& net, const Dataset& data,
                     const ProposalSet& proposals, const Schedule& schedule,
                     const TrainConfig& cfg, std::size_t omega_max = 12,
                     const StepObserver& observer = nullptr);

// Seeded builder for fresh MLPs (dense layers, sizes like {2,16,16,2}).
Network make_mlp(const std::vector<std::size_t>& sizes, std::uint64_t seed);

}  // namespace wfn
