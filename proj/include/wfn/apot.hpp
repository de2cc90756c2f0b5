#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "wfn/clusters.hpp"

namespace wfn {

// A value expressed as a short sum of signed powers of two.
// Zero is represented with no terms (order 0).
struct ApotValue {
  double value = 0.0;
  std::vector<double> terms;  // each exactly +/- 2^e

  std::size_t order() const { return terms.size(); }
  std::string term_string() const;  // e.g. "+2^-6 -2^-8"
};

// sgn(x) * 2^round(log2|x|), ties round half-up. x must be nonzero.
double pow2_round(double x);

// Greedy residual rounding: start from pow2_round(c), keep adding the
// rounded residual while |c - c'| >= delta*|c| and fewer than omega terms
// have been used. An optional exponent clamp keeps |e| <= exp_clamp.
ApotValue apot_approximate(double c, std::size_t omega, double delta,
                           std::optional<int> exp_clamp = std::nullopt);

// Order-omega codebook: every nonzero proposal mapped through
// apot_approximate, duplicates merged, zero preserved, sorted by value.
std::vector<ApotValue> approximate_set(const ProposalSet& proposals,
                                       std::size_t omega, double delta,
                                       std::optional<int> exp_clamp = std::nullopt);

}  // namespace wfn
