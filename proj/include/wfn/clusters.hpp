#pragma once

#include <cstddef>
#include <vector>

namespace wfn {

// Full-precision proposal centres: 0 plus the chain
// {+/- delta0 * ((1+delta)/(1-delta))^j} truncated at w_max.
struct ProposalSet {
  double delta = 0.0;
  double delta0 = 0.0;
  std::vector<double> values;  // sorted ascending, symmetric about 0

  std::size_t size() const { return values.size(); }
  double max_positive() const { return values.back(); }
};

// Amended relative distance D+_rel: |w-c|/|w| when |w| >= delta0, else 0.
double relative_distance(double w, double c, double delta0);

ProposalSet generate_proposals(double delta, double delta0, double w_max);

struct NearestCentre {
  std::size_t index;
  double distance;
};

// Centre minimising D+_rel. Sub-threshold weights (all distances 0) resolve
// to the zero centre; midpoint ties resolve to the smaller-magnitude centre.
NearestCentre nearest_centre(double w, const std::vector<double>& centres,
                             double delta0);

}  // namespace wfn
