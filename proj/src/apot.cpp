#include "wfn/apot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "wfn/errors.hpp"

namespace wfn {

double pow2_round(double x) {
  if (x == 0.0) throw ConfigError("pow2_round is undefined at 0");
  const double e = std::floor(std::log2(std::abs(x)) + 0.5);  // ties half-up
  return std::copysign(std::ldexp(1.0, static_cast<int>(e)), x);
}

namespace {

double pow2_round_clamped(double x, std::optional<int> exp_clamp) {
  if (!exp_clamp) return pow2_round(x);
  double e = std::floor(std::log2(std::abs(x)) + 0.5);
  e = std::clamp(e, -static_cast<double>(*exp_clamp),
                 static_cast<double>(*exp_clamp));
  return std::copysign(std::ldexp(1.0, static_cast<int>(e)), x);
}

}  // namespace

ApotValue apot_approximate(double c, std::size_t omega, double delta,
                           std::optional<int> exp_clamp) {
  if (c == 0.0) throw ConfigError("apot_approximate requires a nonzero centre");
  if (omega < 1) throw ConfigError("omega must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");

  ApotValue out;
  double term = pow2_round_clamped(c, exp_clamp);
  out.terms.push_back(term);
  out.value = term;
  // Keep absorbing the residual while it still violates the relative
  // tolerance and the order budget allows another term.
  while (out.terms.size() < omega) {
    const double residual = c - out.value;
    if (std::abs(residual) < delta * std::abs(c)) break;
    term = pow2_round_clamped(residual, exp_clamp);
    out.terms.push_back(term);
    out.value += term;
  }
  return out;
}

std::vector<ApotValue> approximate_set(const ProposalSet& proposals,
                                       std::size_t omega, double delta,
                                       std::optional<int> exp_clamp) {
  std::map<double, ApotValue> by_value;
  by_value[0.0] = ApotValue{};  // zero stays, order 0
  for (double c : proposals.values) {
    if (c == 0.0) continue;
    ApotValue approx = apot_approximate(c, omega, delta, exp_clamp);
    auto it = by_value.find(approx.value);
    // Many-to-one merge; keep the lowest-order representation on collision.
    if (it == by_value.end() || approx.order() < it->second.order())
      by_value[approx.value] = std::move(approx);
  }
  std::vector<ApotValue> out;
  out.reserve(by_value.size());
  for (auto& [value, apot] : by_value) out.push_back(std::move(apot));
  return out;
}

std::string ApotValue::term_string() const {
  if (terms.empty()) return "0";
  std::ostringstream os;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const double t = terms[i];
    const int e = static_cast<int>(std::lround(std::log2(std::abs(t))));
    if (i > 0) os << ' ';
    os << (t < 0 ? '-' : '+') << "2^" << e;
  }
  return os.str();
}

}  // namespace wfn
