// SPDX-License-Identifier: Apache-2.0
//
// xlsim - grant-free access and localization simulator for subarray-based
// extra-large-scale MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "types.hpp"

namespace xlsim {

// splitmix64 mixer; used to derive independent substreams from one base seed.
inline uint64_t mix_seed(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Combine a base seed with stream tags. Trial seeds are formed as
// base ^ mix(point, trial) so that a trial's draws do not depend on how
// work is split across threads.
inline uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
  return base ^ mix_seed(mix_seed(a) + 0x9e3779b97f4a7c15ull * (b + 1));
}

class Rng {
public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  double uniform() { return unit_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }

  // Inclusive integer range.
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(engine_);
  }

  double normal() { return normal_(engine_); }

  // Circularly symmetric complex Gaussian with E|z|^2 = 1.
  cxd complex_normal() {
    const double s = 1.0 / std::sqrt(2.0);
    return cxd(s * normal_(engine_), s * normal_(engine_));
  }

  // Unit-modulus sample with uniform phase.
  cxd unit_phase() { return std::polar(1.0, uniform(0.0, 2.0 * kPi)); }

  // k distinct values from {0,...,n-1}, ascending. Partial Fisher-Yates.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < k; ++i) {
      int j = uniform_int(i, n - 1);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
  }

  std::mt19937_64 &engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace xlsim
