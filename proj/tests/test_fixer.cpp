#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "wfn/errors.hpp"
#include "wfn/fixer.hpp"

using namespace wfn;

namespace {

// Single dense layer holding the given weights, bias-free.
Network weight_bag(std::vector<double> weights) {
  Network net;
  Layer layer;
  layer.kind = LayerKind::Dense;
  layer.shape = {1, weights.size()};
  layer.weights = std::move(weights);
  layer.tags = {LayerTag::First, LayerTag::Last};
  net.input_shape = {layer.shape[1]};
  net.layers.push_back(std::move(layer));
  net.fix_mask.assign(net.total_weights(), false);
  net.fixed_value_index.assign(net.total_weights(), -1);
  net.validate();
  return net;
}

}  // namespace

TEST_CASE("delta schedule shrinks linearly towards the base delta") {
  CHECK(delta_schedule(0.01, 10, 1) == doctest::Approx(0.10));
  CHECK(delta_schedule(0.01, 10, 10) == doctest::Approx(0.01));
  CHECK(delta_schedule(0.015, 10, 5) == doctest::Approx(0.09));
  CHECK_THROWS_AS(delta_schedule(0.01, 10, 0), ConfigError);
  CHECK_THROWS_AS(delta_schedule(0.01, 10, 11), ConfigError);
}

TEST_CASE("batch selection keeps the running mean within budget") {
  CHECK(select_batch({0.01, 0.02, 0.09, 0.20}, 0.04) == 3);
  CHECK(select_batch({0.05}, 0.04) == 0);
  CHECK(select_batch({0.0, 0.0, 0.0}, 0.01) == 3);
  CHECK(select_batch({}, 0.04) == 0);
}

TEST_CASE("batch selection agrees with the brute-force rule") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> draw(0.0, 0.2);
  std::uniform_int_distribution<std::size_t> len(0, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> dists(len(rng));
    for (double& d : dists) d = draw(rng);
    std::sort(dists.begin(), dists.end());
    const double delta_t = draw(rng) + 1e-4;

    // Oracle: largest n with sum of the first n distances <= n * delta_t.
    std::size_t expect = 0;
    double sum = 0.0;
    for (std::size_t n = 1; n <= dists.size(); ++n) {
      sum += dists[n - 1];
      if (sum <= static_cast<double>(n) * delta_t) expect = n;
    }
    CHECK(select_batch(dists, delta_t) == expect);
  }
}

TEST_CASE("schedule validation rejects malformed fraction sequences") {
  CHECK_NOTHROW(Schedule::linear(5, 0.01).validate());

  Schedule s = Schedule::linear(3, 0.01);
  s.p_schedule = {0.5, 0.4, 1.0};  // not increasing
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.p_schedule = {0.3, 0.6, 0.9};  // does not reach 1
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s.p_schedule = {0.3, 0.6};  // wrong length
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = Schedule::linear(3, 0.0);  // delta out of range
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("the linear schedule ends at one") {
  const Schedule s = Schedule::linear(4, 0.01);
  CHECK(s.p_schedule == std::vector<double>{0.25, 0.5, 0.75, 1.0});
}

TEST_CASE("two clusters: the modal power-of-two centre wins the first batch") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> near_a(0.0625, 0.001);
  std::normal_distribution<double> near_b(-0.125, 0.002);
  std::vector<double> weights;
  for (int i = 0; i < 100; ++i) weights.push_back(near_a(rng));
  for (int i = 0; i < 50; ++i) weights.push_back(near_b(rng));

  Network net = weight_bag(weights);
  const ProposalSet proposals = generate_proposals(0.05, 0.01, 0.13);

  Schedule schedule;
  schedule.T = 1;
  schedule.base_delta = 0.05;
  schedule.p_schedule = {1.0};

  FixingState state;
  state.delta0 = 0.01;
  state.assignments.assign(net.total_weights(), std::nullopt);
  fixing_iteration(net, state, proposals, schedule, 1, true);

  REQUIRE(state.history.size() == 1);
  const auto& batches = state.history[0].batches;
  REQUIRE(!batches.empty());
  CHECK(batches[0].centre == 0.0625);
  CHECK(batches[0].omega == 1);
  CHECK(batches[0].size == 100);  // all 100 draws sit well inside delta_t
}

TEST_CASE("single-shot schedule quantises every weight") {
  Network net = weight_bag({0.06, -0.12, 0.05, 0.07, -0.13, 0.001});
  const ProposalSet proposals = generate_proposals(0.05, 0.01, 0.15);

  Schedule schedule;
  schedule.T = 1;
  schedule.base_delta = 0.05;
  schedule.p_schedule = {1.0};

  const FixingState state =
      run_fixing_schedule(net, proposals, schedule, TrainerHook{});
  CHECK(state.fixed_count() == net.total_weights());
  for (std::size_t id = 0; id < net.total_weights(); ++id) {
    CHECK(net.fix_mask[id]);
    CHECK(net.fixed_value_index[id] >= 0);
    CHECK(net.codebook[net.fixed_value_index[id]] == net.weight_at(id));
  }
}

TEST_CASE("fixed weights never change across later iterations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> draw(-0.2, 0.2);
  std::vector<double> weights(120);
  for (double& w : weights) w = draw(rng);

  Network net = weight_bag(weights);
  const ProposalSet proposals = generate_proposals(0.02, 0.005, 0.25);
  const Schedule schedule = Schedule::linear(4, 0.02);

  std::vector<std::pair<std::size_t, double>> fixed_seen;
  const auto hook = [&](Network& n, const FixingState&, std::size_t) {
    for (const auto& [id, value] : fixed_seen) {
      CHECK(n.fix_mask[id]);
      CHECK(n.weight_at(id) == value);  // bit-identical
    }
    for (std::size_t id = 0; id < n.total_weights(); ++id)
      if (n.fix_mask[id] &&
          std::none_of(fixed_seen.begin(), fixed_seen.end(),
                       [&](const auto& p) { return p.first == id; }))
        fixed_seen.push_back({id, n.weight_at(id)});
  };

  const FixingState state = run_fixing_schedule(net, proposals, schedule, hook);
  CHECK(state.fixed_count() == net.total_weights());
  for (const auto& [id, value] : fixed_seen) CHECK(net.weight_at(id) == value);
}

TEST_CASE("fixed counts grow monotonically and end at N") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> draw(-0.3, 0.3);
  std::vector<double> weights(80);
  for (double& w : weights) w = draw(rng);

  Network net = weight_bag(weights);
  const ProposalSet proposals = generate_proposals(0.01, 0.002, 0.35);
  const Schedule schedule = Schedule::linear(5, 0.01);
  const FixingState state =
      run_fixing_schedule(net, proposals, schedule, TrainerHook{});

  REQUIRE(state.history.size() == 5);
  std::size_t prev = 0;
  double prev_delta = std::numeric_limits<double>::infinity();
  for (const auto& rec : state.history) {
    CHECK(rec.fixed_count >= prev);
    CHECK(rec.delta_t < prev_delta);
    prev = rec.fixed_count;
    prev_delta = rec.delta_t;
  }
  CHECK(prev == net.total_weights());
}

TEST_CASE("two-cluster pipeline lands on few unique values") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> near_a(0.0625, 0.001);
  std::normal_distribution<double> near_b(-0.125, 0.002);
  std::vector<double> weights;
  for (int i = 0; i < 100; ++i) weights.push_back(near_a(rng));
  for (int i = 0; i < 50; ++i) weights.push_back(near_b(rng));

  Network net = weight_bag(weights);
  const ProposalSet proposals = generate_proposals(0.05, 0.01, 0.13);
  const Schedule schedule = Schedule::linear(3, 0.05);
  run_fixing_schedule(net, proposals, schedule, TrainerHook{});

  std::set<double> unique;
  for (const auto& e : flatten_weights(net))
    if (e.value != 0.0) unique.insert(e.value);
  CHECK(unique.size() <= 4);
}

TEST_CASE("exhausted order escalation falls back to a full-precision centre") {
  // delta0 == proposals start, single far-off weight, omega_max 1 and a tight
  // budget: no power-of-two centre can satisfy the batch rule.
  Network net = weight_bag({0.011});
  const ProposalSet proposals = generate_proposals(0.001, 0.01, 0.012);

  Schedule schedule;
  schedule.T = 1;
  schedule.base_delta = 0.001;
  schedule.p_schedule = {1.0};

  const FixingState state = run_fixing_schedule(net, proposals, schedule,
                                                TrainerHook{}, true,
                                                /*omega_max=*/1);
  REQUIRE(state.history.size() == 1);
  REQUIRE(!state.history[0].batches.empty());
  bool saw_fallback = false;
  for (const auto& b : state.history[0].batches)
    if (b.fallback) {
      saw_fallback = true;
      CHECK(b.size == 1);
      // Full-precision proposal, not an APoT value.
      CHECK(std::count(proposals.values.begin(), proposals.values.end(),
                       b.centre) == 1);
    }
  CHECK(saw_fallback);
  CHECK(net.fix_mask[0]);
}

TEST_CASE("fixing state serialises its history") {
  Network net = weight_bag({0.06, 0.07});
  const ProposalSet proposals = generate_proposals(0.05, 0.01, 0.08);
  Schedule schedule;
  schedule.T = 1;
  schedule.base_delta = 0.05;
  schedule.p_schedule = {1.0};
  const FixingState state =
      run_fixing_schedule(net, proposals, schedule, TrainerHook{});
  const std::string json = state.to_json();
  CHECK(json.find("wfn-fixing-log/1") != std::string::npos);
  CHECK(json.find("\"iterations\"") != std::string::npos);
}
