#include "wfn/fixer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <json.hpp>

#include "wfn/errors.hpp"

namespace wfn {

Schedule Schedule::linear(std::size_t T, double base_delta) {
  Schedule s;
  s.T = T;
  s.base_delta = base_delta;
  s.p_schedule.resize(T);
  for (std::size_t t = 1; t <= T; ++t)
    s.p_schedule[t - 1] = static_cast<double>(t) / static_cast<double>(T);
  return s;
}

void Schedule::validate() const {
  if (T == 0 || p_schedule.size() != T)
    throw ConfigError("schedule must provide one target fraction per iteration");
  if (!(base_delta > 0.0 && base_delta < 1.0))
    throw ConfigError("base delta must lie in (0,1)");
  for (std::size_t i = 0; i < T; ++i) {
    if (p_schedule[i] <= 0.0 || p_schedule[i] > 1.0 ||
        (i > 0 && p_schedule[i] <= p_schedule[i - 1]))
      throw ConfigError("p schedule must be strictly increasing in (0,1]");
  }
  if (p_schedule.back() != 1.0)
    throw ConfigError("p schedule must end at 1.0");
}

double delta_schedule(double delta, std::size_t T, std::size_t t) {
  if (t < 1 || t > T) throw ConfigError("iteration index out of range");
  return delta * static_cast<double>(T - t + 1);
}

std::size_t select_batch(const std::vector<double>& sorted_dists, double delta_t) {
  double prefix = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < sorted_dists.size(); ++i) {
    prefix += sorted_dists[i];
    if (prefix <= static_cast<double>(i + 1) * delta_t)
      n = i + 1;
    else
      break;  // sorted input: once the mean is exceeded it stays exceeded
  }
  return n;
}

std::size_t FixingState::fixed_count() const {
  std::size_t n = 0;
  for (const auto& a : assignments)
    if (a) ++n;
  return n;
}

std::string FixingState::to_json() const {
  nlohmann::json j;
  j["schema"] = "wfn-fixing-log/1";
  j["delta0"] = delta0;
  j["omega_max"] = omega_max;
  j["iterations"] = nlohmann::json::array();
  for (const auto& rec : history) {
    nlohmann::json jr;
    jr["t"] = rec.t;
    jr["delta_t"] = rec.delta_t;
    jr["p_t"] = rec.p_t;
    jr["fixed_count"] = rec.fixed_count;
    jr["max_omega"] = rec.max_omega;
    jr["batches"] = nlohmann::json::array();
    for (const auto& b : rec.batches) {
      jr["batches"].push_back({{"centre", b.centre},
                               {"omega", b.omega},
                               {"size", b.size},
                               {"mean_distance", b.mean_distance},
                               {"fallback", b.fallback}});
    }
    j["iterations"].push_back(jr);
  }
  return j.dump(2);
}

namespace {

// Weight ids eligible for fixing (norm parameters optionally excluded).
std::vector<std::size_t> eligible_ids(const Network& net, bool fix_norm_params) {
  std::vector<std::size_t> ids;
  std::size_t id = 0;
  for (const auto& layer : net.layers) {
    const bool eligible = fix_norm_params || layer.kind != LayerKind::Norm;
    for (std::size_t i = 0; i < layer.weight_count(); ++i, ++id)
      if (eligible) ids.push_back(id);
  }
  return ids;
}

std::int32_t codebook_index(Network& net, double centre) {
  for (std::size_t i = 0; i < net.codebook.size(); ++i)
    if (net.codebook[i] == centre) return static_cast<std::int32_t>(i);
  net.codebook.push_back(centre);
  return static_cast<std::int32_t>(net.codebook.size() - 1);
}

void commit(Network& net, FixingState& state, std::size_t weight_id,
            double centre, std::size_t omega) {
  net.weight_at(weight_id) = centre;
  net.fix_mask[weight_id] = true;
  net.fixed_value_index[weight_id] = codebook_index(net, centre);
  state.assignments[weight_id] = Assignment{centre, omega};
}

}  // namespace

void fixing_iteration(Network& net, FixingState& state,
                      const ProposalSet& proposals, const Schedule& schedule,
                      std::size_t t, bool fix_norm_params) {
  schedule.validate();
  const double delta_t = delta_schedule(schedule.base_delta, schedule.T, t);
  const double p_t = schedule.p_schedule[t - 1];
  const double delta0 = state.delta0;

  const auto eligible = eligible_ids(net, fix_norm_params);
  const double target = static_cast<double>(eligible.size()) * p_t;

  IterationRecord rec;
  rec.t = t;
  rec.delta_t = delta_t;
  rec.p_t = p_t;

  // Codebooks per order are stable within the iteration.
  struct Codebook {
    std::vector<double> values;
    std::vector<std::size_t> orders;
  };
  std::map<std::size_t, Codebook> centres_by_omega;
  auto centres_for = [&](std::size_t omega) -> const Codebook& {
    auto it = centres_by_omega.find(omega);
    if (it == centres_by_omega.end()) {
      Codebook cb;
      for (const auto& a : approximate_set(proposals, omega, delta_t)) {
        cb.values.push_back(a.value);
        cb.orders.push_back(a.order());
      }
      it = centres_by_omega.emplace(omega, std::move(cb)).first;
    }
    return it->second;
  };

  auto count_fixed = [&] {
    std::size_t n = 0;
    for (std::size_t id : eligible)
      if (net.fix_mask[id]) ++n;
    return n;
  };

  std::size_t fixed = count_fixed();
  while (static_cast<double>(fixed) <= target) {
    std::vector<std::size_t> free;
    for (std::size_t id : eligible)
      if (!net.fix_mask[id]) free.push_back(id);
    if (free.empty()) break;

    bool batch_fixed = false;
    for (std::size_t omega = 1; omega <= state.omega_max && !batch_fixed; ++omega) {
      const auto& cb = centres_for(omega);
      const auto& centres = cb.values;

      std::vector<NearestCentre> nearest(free.size());
      std::vector<std::size_t> counts(centres.size(), 0);
      for (std::size_t i = 0; i < free.size(); ++i) {
        nearest[i] = nearest_centre(net.weight_at(free[i]), centres, delta0);
        ++counts[nearest[i].index];
      }

      // Modal centre; count ties break to the larger-magnitude centre,
      // then to the smaller index.
      std::size_t modal = 0;
      for (std::size_t k = 1; k < centres.size(); ++k) {
        if (counts[k] > counts[modal] ||
            (counts[k] == counts[modal] &&
             std::abs(centres[k]) > std::abs(centres[modal])))
          modal = k;
      }
      if (counts[modal] == 0) continue;

      struct Cand {
        std::size_t id;
        double dist;
      };
      std::vector<Cand> cands;
      for (std::size_t i = 0; i < free.size(); ++i)
        if (nearest[i].index == modal)
          cands.push_back({free[i], nearest[i].distance});
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        return a.dist != b.dist ? a.dist < b.dist : a.id < b.id;
      });

      std::vector<double> dists(cands.size());
      for (std::size_t i = 0; i < cands.size(); ++i) dists[i] = cands[i].dist;
      const std::size_t n = select_batch(dists, delta_t);
      if (n == 0) continue;  // escalate omega

      const double centre = centres[modal];
      const std::size_t order = cb.orders[modal];
      double dist_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        commit(net, state, cands[i].id, centre, order);
        dist_sum += cands[i].dist;
      }
      rec.batches.push_back({centre, order, n, dist_sum / static_cast<double>(n),
                             /*fallback=*/false});
      rec.max_omega = std::max(rec.max_omega, order);
      fixed += n;
      batch_fixed = true;
    }

    if (!batch_fixed) {
      // Order escalation exhausted: assign the single closest weight/centre
      // pair at the full-precision proposal value so progress is guaranteed.
      std::size_t best_id = free[0];
      double best_centre = 0.0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t id : free) {
        const auto nc = nearest_centre(net.weight_at(id), proposals.values, delta0);
        if (nc.distance < best_dist) {
          best_dist = nc.distance;
          best_id = id;
          best_centre = proposals.values[nc.index];
        }
      }
      commit(net, state, best_id, best_centre, 0);
      rec.batches.push_back({best_centre, 0, 1, best_dist, /*fallback=*/true});
      ++fixed;
    }
  }

  rec.fixed_count = fixed;
  state.history.push_back(std::move(rec));
}

FixingState run_fixing_schedule(Network& net, const ProposalSet& proposals,
                                const Schedule& schedule,
                                const TrainerHook& trainer_hook,
                                bool fix_norm_params, std::size_t omega_max) {
  schedule.validate();
  FixingState state;
  state.delta0 = proposals.delta0;
  state.omega_max = omega_max;
  state.assignments.assign(net.total_weights(), std::nullopt);
  // Carry over assignments already present (e.g. pruning at init).
  for (std::size_t id = 0; id < net.total_weights(); ++id)
    if (net.fix_mask[id])
      state.assignments[id] = Assignment{net.weight_at(id), 0};

  for (std::size_t t = 1; t <= schedule.T; ++t) {
    if (trainer_hook) trainer_hook(net, state, t);
    fixing_iteration(net, state, proposals, schedule, t, fix_norm_params);
  }
  return state;
}

}  // namespace wfn
