#include "wfn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "wfn/errors.hpp"

namespace wfn {

Dataset make_two_moons(std::size_t samples, double noise, std::uint64_t seed) {
  if (samples < 4) throw ConfigError("two-moons needs at least 4 samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const std::size_t n0 = samples / 2;
  const std::size_t n1 = samples - n0;

  Dataset d;
  d.features = 2;
  d.classes = 2;
  d.x.reserve(samples * 2);
  d.y.reserve(samples);

  // Outer arc: (cos t, sin t); inner arc: (1 - cos t, 0.5 - sin t), t in [0, pi].
  for (std::size_t i = 0; i < n0; ++i) {
    const double t = std::numbers::pi * static_cast<double>(i) /
                     static_cast<double>(n0 - 1);
    d.x.push_back(std::cos(t) + noise * gauss(rng));
    d.x.push_back(std::sin(t) + noise * gauss(rng));
    d.y.push_back(0);
  }
  for (std::size_t i = 0; i < n1; ++i) {
    const double t = std::numbers::pi * static_cast<double>(i) /
                     static_cast<double>(n1 - 1);
    d.x.push_back(1.0 - std::cos(t) + noise * gauss(rng));
    d.x.push_back(0.5 - std::sin(t) + noise * gauss(rng));
    d.y.push_back(1);
  }

  // Deterministic shuffle so minibatches mix classes.
  std::vector<std::size_t> perm(samples);
  for (std::size_t i = 0; i < samples; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Dataset out;
  out.features = 2;
  out.classes = 2;
  out.x.resize(samples * 2);
  out.y.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    out.x[2 * i] = d.x[2 * perm[i]];
    out.x[2 * i + 1] = d.x[2 * perm[i] + 1];
    out.y[i] = d.y[perm[i]];
  }
  return out;
}

Dataset make_blobs(std::size_t samples, std::size_t classes, double spread,
                   std::uint64_t seed) {
  if (classes < 2) throw ConfigError("blobs need at least 2 classes");
  if (samples < classes) throw ConfigError("need at least one sample per class");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(-3.0, 3.0);

  std::vector<std::pair<double, double>> centres(classes);
  for (auto& c : centres) c = {uni(rng), uni(rng)};

  Dataset d;
  d.features = 2;
  d.classes = classes;
  d.x.reserve(samples * 2);
  d.y.reserve(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t k = i % classes;
    d.x.push_back(centres[k].first + spread * gauss(rng));
    d.x.push_back(centres[k].second + spread * gauss(rng));
    d.y.push_back(static_cast<int>(k));
  }
  return d;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");

  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": cannot parse '" + cell + "'");
      }
    }
    if (fields.size() < 2)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": need at least one feature and a label");
    if (d.features == 0)
      d.features = fields.size() - 1;
    else if (fields.size() - 1 != d.features)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": inconsistent column count");
    const double raw_label = fields.back();
    const int label = static_cast<int>(raw_label);
    if (label < 0 || static_cast<double>(label) != raw_label)
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": label must be a non-negative integer");
    for (std::size_t i = 0; i + 1 < fields.size(); ++i) d.x.push_back(fields[i]);
    d.y.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (d.y.empty()) throw DataError(path + ": empty dataset");
  d.classes = static_cast<std::size_t>(max_label) + 1;
  return d;
}

}  // namespace wfn
