#include "wfn/clusters.hpp"

#include <algorithm>
#include <cmath>

#include "wfn/errors.hpp"

namespace wfn {

double relative_distance(double w, double c, double delta0) {
  if (std::abs(w) < delta0) return 0.0;
  return std::abs(w - c) / std::abs(w);
}

ProposalSet generate_proposals(double delta, double delta0, double w_max) {
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("delta must lie in (0,1)");
  if (!(delta0 > 0.0)) throw ConfigError("delta0 must be positive");
  if (delta0 > w_max)
    throw ConfigError("delta0 exceeds the maximum weight magnitude");

  const double ratio = (1.0 + delta) / (1.0 - delta);
  std::vector<double> chain;
  for (double c = delta0; c <= w_max; c *= ratio) chain.push_back(c);

  ProposalSet set;
  set.delta = delta;
  set.delta0 = delta0;
  set.values.reserve(2 * chain.size() + 1);
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    set.values.push_back(-*it);
  set.values.push_back(0.0);
  set.values.insert(set.values.end(), chain.begin(), chain.end());
  return set;
}

NearestCentre nearest_centre(double w, const std::vector<double>& centres,
                             double delta0) {
  if (centres.empty()) throw ConfigError("empty centre set");
  if (std::abs(w) < delta0) {
    // All distances are zero; the zero centre encodes pruning.
    auto it = std::find(centres.begin(), centres.end(), 0.0);
    const std::size_t idx =
        it != centres.end() ? static_cast<std::size_t>(it - centres.begin()) : 0;
    return {idx, 0.0};
  }
  std::size_t best = 0;
  double best_dist = relative_distance(w, centres[0], delta0);
  for (std::size_t i = 1; i < centres.size(); ++i) {
    const double d = relative_distance(w, centres[i], delta0);
    // Ties break toward the smaller-magnitude centre.
    if (d < best_dist ||
        (d == best_dist && std::abs(centres[i]) < std::abs(centres[best]))) {
      best = i;
      best_dist = d;
    }
  }
  return {best, best_dist};
}

}  // namespace wfn
