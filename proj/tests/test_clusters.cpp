#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "wfn/clusters.hpp"

using namespace wfn;

TEST_CASE("relative distance formula") {
  CHECK(relative_distance(0.5, 0.45, 0.01) == doctest::Approx(0.1));
  CHECK(relative_distance(1.0, 1.0, 0.01) == 0.0);
  // Sub-threshold weights are free to move to any centre at zero cost.
  CHECK(relative_distance(0.005, 0.25, 0.01) == 0.0);
  CHECK(relative_distance(-0.5, -0.45, 0.01) == doctest::Approx(0.1));
}

TEST_CASE("proposal chain matches the hand-iterated recurrence") {
  const ProposalSet set = generate_proposals(0.05, 0.01, 0.02);

  std::vector<double> positive;
  for (double v : set.values)
    if (v > 0.0) positive.push_back(v);

  const std::vector<double> expected = {0.01,      0.0110526, 0.0122171,
                                        0.0135031, 0.0149245, 0.0164955,
                                        0.0182320};
  REQUIRE(positive.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(positive[i] == doctest::Approx(expected[i]).epsilon(1e-5));
  CHECK(set.size() == 15);  // 7 positive + 7 mirrored + zero
}

TEST_CASE("proposal set is sorted and symmetric about zero") {
  const ProposalSet set = generate_proposals(0.02, 0.005, 1.0);
  CHECK(std::is_sorted(set.values.begin(), set.values.end()));
  CHECK(std::count(set.values.begin(), set.values.end(), 0.0) == 1);
  for (double v : set.values)
    CHECK(std::count(set.values.begin(), set.values.end(), -v) == 1);
}

TEST_CASE("chain stops immediately when delta0 reaches w_max") {
  const ProposalSet set = generate_proposals(0.01, 0.001, 0.001);
  REQUIRE(set.size() == 3);
  CHECK(set.values[0] == doctest::Approx(-0.001));
  CHECK(set.values[1] == 0.0);
  CHECK(set.values[2] == doctest::Approx(0.001));
}

TEST_CASE("successive proposals grow by (1+delta)/(1-delta)") {
  const ProposalSet set = generate_proposals(0.01, 0.001, 0.1);
  std::vector<double> positive;
  for (double v : set.values)
    if (v > 0.0) positive.push_back(v);
  REQUIRE(positive.size() >= 2);
  for (std::size_t i = 0; i + 1 < positive.size(); ++i)
    CHECK(positive[i + 1] / positive[i] ==
          doctest::Approx(1.01 / 0.99).epsilon(1e-12));
}

TEST_CASE("nearest centre picks the minimal relative distance") {
  const ProposalSet set = generate_proposals(0.05, 0.01, 0.02);
  const auto hit = nearest_centre(0.012, set.values, 0.01);
  CHECK(set.values[hit.index] == doctest::Approx(0.0122171).epsilon(1e-5));
  CHECK(hit.distance == doctest::Approx(0.0181).epsilon(1e-2));
}

TEST_CASE("sub-threshold weights resolve to the zero centre") {
  const ProposalSet set = generate_proposals(0.05, 0.01, 0.02);
  const auto hit = nearest_centre(0.005, set.values, 0.01);
  CHECK(set.values[hit.index] == 0.0);
  CHECK(hit.distance == 0.0);
}

TEST_CASE("a weight equal to a centre has distance zero") {
  const std::vector<double> centres = {-0.5, 0.0, 0.25, 0.5};
  const auto hit = nearest_centre(0.25, centres, 0.01);
  CHECK(centres[hit.index] == 0.25);
  CHECK(hit.distance == 0.0);
}

TEST_CASE("nearest centre agrees with a brute-force oracle") {
  const ProposalSet set = generate_proposals(0.03, 0.002, 0.5);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> draw(-0.5, 0.5);
  for (int i = 0; i < 2000; ++i) {
    const double w = draw(rng);
    const auto hit = nearest_centre(w, set.values, 0.002);
    double best = std::numeric_limits<double>::infinity();
    for (double c : set.values)
      best = std::min(best, relative_distance(w, c, 0.002));
    CHECK(hit.distance == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("every in-range weight lies within delta of some proposal") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> draw_delta(0.005, 0.05);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double delta = draw_delta(rng);
    const double delta0 = 1e-4 + 1e-3 * unit(rng);
    const ProposalSet set = generate_proposals(delta, delta0, 1.0);
    const double hi = set.max_positive();
    const double mag = delta0 + (hi - delta0) * unit(rng);
    const double w = unit(rng) < 0.5 ? mag : -mag;
    const auto hit = nearest_centre(w, set.values, delta0);
    CHECK(hit.distance <= delta + 1e-12);
  }
}
