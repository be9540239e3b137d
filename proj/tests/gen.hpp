#pragma once

// Small random generators for the property tests. Fixed seeds keep failures
// reproducible; the case index is printed by the tests on failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sicae/model.hpp"

namespace gen {

class Source {
public:
  explicit Source(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  /// Nonnegative state whose compartments sum to `total`.
  sicae::Compartments state_with_total(double total) {
    double w[5];
    double sum = 0.0;
    for (double& v : w) {
      v = coin(0.2) ? 0.0 : uniform(0.0, 1.0);
      sum += v;
    }
    if (sum == 0.0) {
      w[0] = 1.0;
      sum = 1.0;
    }
    return {total * w[0] / sum, total * w[1] / sum, total * w[2] / sum, total * w[3] / sum, total * w[4] / sum};
  }

  /// Measurement sequence: random walk with occasional jumps and plateaus,
  /// so running minima, flat stretches and rebounds all occur.
  std::vector<double> measurements(std::size_t n, double start) {
    std::vector<double> out(n);
    double y = start;
    for (auto& v : out) {
      const int mode = integer(0, 9);
      if (mode == 0) y = uniform(0.0, 2.0 * start + 1.0);
      else if (mode > 2) y = std::max(0.0, y + uniform(-0.05, 0.04) * (y + 1.0));
      v = y;
    }
    return out;
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

}  // namespace gen
