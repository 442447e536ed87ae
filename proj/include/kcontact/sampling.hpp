#pragma once

// Seeded point sampling. The uniform deviate is derived from the raw 64-bit
// stream so that identical seeds give identical samples on every platform.

#include "kcontact/chart_calculus.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace kcontact {

struct SampleRng {
  explicit SampleRng(std::uint64_t seed) : eng(seed) {}

  std::mt19937_64 eng;

  double canonical() { return (eng() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * canonical(); }
};

inline std::vector<Point> sample_box(SampleRng& rng, int dim, double lo, double hi, int count) {
  std::vector<Point> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    Point x(dim);
    for (int j = 0; j < dim; ++j) x(j) = rng.uniform(lo, hi);
    points.push_back(std::move(x));
  }
  return points;
}

}  // namespace kcontact
