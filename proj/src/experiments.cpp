#include "wfn/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "wfn/errors.hpp"

namespace wfn {

Network inject_noise(const Network& net, const NoiseSpec& spec) {
  if (spec.layer_index >= net.layers.size())
    throw DataError("noise layer index out of range");

  Network out = net;
  Layer& layer = out.layers[spec.layer_index];
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  double mean_abs = 0.0;
  if (spec.mode == NoiseMode::Absolute) {
    for (double w : layer.weights) mean_abs += std::abs(w);
    mean_abs /= static_cast<double>(layer.weights.size());
  }
  for (double& w : layer.weights) {
    const double eps = gauss(rng);
    w += spec.mode == NoiseMode::Relative ? spec.beta * std::abs(w) * eps
                                          : spec.beta * mean_abs * eps;
  }
  return out;
}

std::vector<NoiseRow> noise_experiment(const Network& net, const Dataset& data,
                                       const std::vector<double>& betas,
                                       std::size_t repeats, std::uint64_t seed) {
  std::vector<NoiseRow> rows;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    for (double beta : betas) {
      for (NoiseMode mode : {NoiseMode::Relative, NoiseMode::Absolute}) {
        std::vector<double> accs;
        accs.reserve(repeats);
        for (std::size_t r = 0; r < repeats; ++r) {
          NoiseSpec spec;
          spec.layer_index = li;
          spec.beta = beta;
          spec.mode = mode;
          // Trial seeds depend on the cell so modes see matched draws.
          spec.seed = seed + 1000003 * li + 613 * r;
          accs.push_back(evaluate_accuracy(inject_noise(net, spec), data));
        }
        double mean = 0.0;
        for (double a : accs) mean += a;
        mean /= static_cast<double>(repeats);
        double var = 0.0;
        for (double a : accs) var += (a - mean) * (a - mean);
        var = repeats > 1 ? var / static_cast<double>(repeats - 1) : 0.0;
        const double ci =
            1.96 * std::sqrt(var / static_cast<double>(repeats));
        rows.push_back({li, beta, mode, mean, ci});
      }
    }
  }
  return rows;
}

std::string noise_rows_to_csv(const std::vector<NoiseRow>& rows) {
  std::ostringstream os;
  os << "layer,beta,mode,mean_accuracy,ci95\n";
  for (const auto& r : rows)
    os << r.layer_index << ',' << r.beta << ','
       << (r.mode == NoiseMode::Relative ? "relative" : "absolute") << ','
       << r.mean_accuracy << ',' << r.ci95 << '\n';
  return os.str();
}

PruneInitReport prune_init_experiment(Network net, const Dataset& data,
                                      double p, const ProposalSet& proposals,
                                      const Schedule& schedule,
                                      const TrainConfig& cfg,
                                      std::uint64_t prune_seed) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("prune fraction must be in [0,1)");

  PruneInitReport report;
  report.prune_fraction = p;

  // Per-layer uniform selection, fixed to the zero centre before iteration 1.
  std::mt19937_64 rng(prune_seed);
  std::size_t base_id = 0;
  for (auto& layer : net.layers) {
    const std::size_t count = layer.weight_count();
    std::vector<std::size_t> ids(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = base_id + i;
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto n_prune =
        static_cast<std::size_t>(p * static_cast<double>(count));
    for (std::size_t i = 0; i < n_prune; ++i) {
      net.weight_at(ids[i]) = 0.0;
      net.fix_mask[ids[i]] = true;
      auto it = std::find(net.codebook.begin(), net.codebook.end(), 0.0);
      if (it == net.codebook.end()) {
        net.codebook.push_back(0.0);
        it = net.codebook.end() - 1;
      }
      net.fixed_value_index[ids[i]] =
          static_cast<std::int32_t>(it - net.codebook.begin());
      report.pruned_ids.push_back(ids[i]);
      ++report.pruned_count;
    }
    base_id += count;
  }

  // The schedule starts no lower than the pruned fraction; remaining mass
  // spreads evenly so the sequence stays strictly increasing and ends at 1.
  Schedule adjusted = schedule;
  const auto T = static_cast<double>(adjusted.p_schedule.size());
  for (std::size_t i = 0; i < adjusted.p_schedule.size(); ++i) {
    const double floor_i = p + (1.0 - p) * static_cast<double>(i + 1) / T;
    adjusted.p_schedule[i] = std::max(adjusted.p_schedule[i], floor_i);
  }

  WfnRunResult run = run_wfn(net, data, proposals, adjusted, cfg);
  report.final_accuracy = run.final_accuracy;
  report.state = std::move(run.state);

  std::vector<double> values;
  for (const auto& e : flatten_weights(net)) values.push_back(e.value);
  report.entropy_bits = weight_entropy(values);
  std::vector<double> nonzero;
  for (double v : values)
    if (v != 0.0) nonzero.push_back(v);
  std::sort(nonzero.begin(), nonzero.end());
  report.unique_nonzero =
      std::unique(nonzero.begin(), nonzero.end()) - nonzero.begin();
  report.net = std::move(net);
  return report;
}

std::vector<SweepRow> delta_sweep(const Network& baseline, const Dataset& data,
                                  const std::vector<double>& deltas,
                                  double delta0, const Schedule& schedule,
                                  const TrainConfig& cfg) {
  if (deltas.empty()) throw ConfigError("delta sweep needs at least one delta");
  std::vector<double> sorted = deltas;
  std::sort(sorted.begin(), sorted.end());

  double w_max = 0.0;
  for (const auto& e : flatten_weights(baseline))
    w_max = std::max(w_max, std::abs(e.value));

  std::vector<SweepRow> rows;
  for (double delta : sorted) {
    Network net = baseline;
    const ProposalSet proposals = generate_proposals(delta, delta0, w_max);
    Schedule sched = schedule;
    sched.base_delta = delta;
    WfnRunResult run = run_wfn(net, data, proposals, sched, cfg);
    const MetricsReport report = build_report(baseline, net, &run.state);
    rows.push_back({delta, run.final_accuracy, report.compression_ratio,
                    report.entropy_bits, report.unique_counts.at("full")});
  }
  return rows;
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << "delta,accuracy,compression_ratio,entropy_bits,unique_count\n";
  for (const auto& r : rows)
    os << r.delta << ',' << r.accuracy << ',' << r.compression_ratio << ','
       << r.entropy_bits << ',' << r.unique_count << '\n';
  return os.str();
}

}  // namespace wfn
