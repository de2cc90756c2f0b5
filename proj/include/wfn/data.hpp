#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wfn {

// Row-major feature matrix plus integer labels.
struct Dataset {
  std::size_t features = 0;
  std::size_t classes = 0;
  std::vector<double> x;  // rows * features
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  const double* row(std::size_t i) const { return x.data() + i * features; }
};

// Two interleaved half-circles with Gaussian noise (see README for the
// exact construction). Deterministic for a given seed.
Dataset make_two_moons(std::size_t samples, double noise, std::uint64_t seed);

// k isotropic Gaussian blobs in 2-D with seeded centres.
Dataset make_blobs(std::size_t samples, std::size_t classes, double spread,
                   std::uint64_t seed);

// CSV rows: feature values then an integer label in the last column.
Dataset load_csv(const std::string& path);

}  // namespace wfn
