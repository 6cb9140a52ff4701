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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace xlsim {

struct ChannelConfig {
  double carrier_freq = 28.0e9;  // [Hz]
  double sample_rate = 200.0e6;  // [Hz]
  int num_subcarriers = 2048;
  int antennas_per_subarray = 8; // N_s, half-wavelength line array per subarray
  double rician_gamma = 10.0;    // direct-to-scattered power ratio
  double antenna_gain = 1.0;     // linear

  double wavelength() const { return kSpeedOfLight / carrier_freq; }

  void validate() const {
    if (carrier_freq <= 0.0 || sample_rate <= 0.0)
      throw std::invalid_argument("ChannelConfig: frequencies must be positive.");
    if (num_subcarriers < 1)
      throw std::invalid_argument("ChannelConfig: num_subcarriers must be >= 1.");
    if (antennas_per_subarray < 1)
      throw std::invalid_argument("ChannelConfig: antennas_per_subarray must be >= 1.");
    if (rician_gamma < 0.0)
      throw std::invalid_argument("ChannelConfig: rician_gamma must be >= 0.");
    if (antenna_gain <= 0.0)
      throw std::invalid_argument("ChannelConfig: antenna_gain must be positive.");
  }
};

// ---------- pilot subcarrier grid ----------

// Pilots sit every `interval` subcarriers so that adjacent pilot tones stay
// inside one coherence bandwidth 1/tau_max. Offsets are baseband frequencies
// relative to the carrier.
struct PilotGrid {
  int interval = 0; // subcarriers between adjacent pilots
  int count = 0;    // number of pilots P
  RVec offsets;     // [Hz], length P
};

inline PilotGrid pilot_grid(double sample_rate, int num_subcarriers, double tau_max) {
  if (sample_rate <= 0.0 || num_subcarriers < 1)
    throw std::invalid_argument("pilot_grid: sample_rate and num_subcarriers must be positive.");
  if (tau_max <= 0.0)
    throw std::invalid_argument("pilot_grid: tau_max must be positive.");

  const double scs = sample_rate / num_subcarriers;   // subcarrier spacing
  const double coherence_bw = 1.0 / tau_max;
  PilotGrid grid;
  grid.interval = static_cast<int>(std::ceil(coherence_bw / scs));
  if (grid.interval < 1) grid.interval = 1;
  if (grid.interval > num_subcarriers)
    throw std::invalid_argument("pilot_grid: pilot interval exceeds the subcarrier count.");
  grid.count = (num_subcarriers + grid.interval - 1) / grid.interval;

  grid.offsets.resize(grid.count);
  for (int p = 0; p < grid.count; ++p)
    grid.offsets[p] = -0.5 * sample_rate + (static_cast<double>(p) * grid.interval + 1.0) * scs;
  return grid;
}

// ---------- array responses ----------

// Half-wavelength line array response, entry n = exp(-j n pi cos(theta)).
inline CVec steering_vector(double theta, int n_antennas) {
  if (n_antennas < 1)
    throw std::invalid_argument("steering_vector: n_antennas must be >= 1.");
  CVec e(n_antennas);
  const double c = std::cos(theta);
  for (int n = 0; n < n_antennas; ++n)
    e[n] = std::polar(1.0, -kPi * static_cast<double>(n) * c);
  return e;
}

// Free-space power gain of one hop of the given length.
inline double path_gain(double wavelength, double antenna_gain, double distance) {
  if (distance <= 0.0)
    throw std::invalid_argument("path_gain: distance must be positive.");
  const double r = wavelength / (4.0 * kPi * distance);
  return antenna_gain * r * r;
}

// Per-subarray response of a direct link at one pilot tone.
inline CVec los_subvector(double gain, double delay, double theta, double pilot_offset,
                          int n_antennas) {
  const cxd rot = std::polar(std::sqrt(gain), -2.0 * kPi * delay * pilot_offset);
  return rot * steering_vector(theta, n_antennas);
}

// Per-subarray response of a single-bounce link; the two hop gains multiply.
inline CVec nlos_subvector(double gain_hop1, double gain_hop2, double delay, double theta,
                           double pilot_offset, int n_antennas) {
  const cxd rot = std::polar(std::sqrt(gain_hop1 * gain_hop2), -2.0 * kPi * delay * pilot_offset);
  return rot * steering_vector(theta, n_antennas);
}

// Stacks per-subarray responses, zeroing the subarrays the path does not
// reach. subvectors[m] may be empty when mask[m] == 0.
inline CVec array_response(const std::vector<std::uint8_t> &mask,
                           const std::vector<CVec> &subvectors, int n_antennas) {
  const int m_total = static_cast<int>(mask.size());
  if (static_cast<int>(subvectors.size()) != m_total)
    throw std::invalid_argument("array_response: mask and subvector counts differ.");
  CVec a = CVec::Zero(static_cast<Eigen::Index>(m_total) * n_antennas);
  for (int m = 0; m < m_total; ++m) {
    if (!mask[m]) continue;
    if (subvectors[m].size() != n_antennas)
      throw std::invalid_argument("array_response: subvector length mismatch.");
    a.segment(static_cast<Eigen::Index>(m) * n_antennas, n_antennas) = subvectors[m];
  }
  return a;
}

// ---------- aggregate frequency-domain channel ----------

struct ChannelTensor {
  CMat h;          // (K * M * N_s) x P, rows of inactive users are zero
  int num_users = 0;
  int num_subarrays = 0;
  int antennas_per_subarray = 0;

  // Union of path visibility per user; entry [k][m] == 1 when any path of
  // user k reaches subarray m.
  std::vector<std::vector<std::uint8_t>> subarray_activity;
  std::vector<std::vector<cxd>> path_alphas; // small-scale coefficients, [user][path]
  std::uint64_t seed = 0;

  Eigen::Index user_offset(int k) const {
    return static_cast<Eigen::Index>(k) * num_subarrays * antennas_per_subarray;
  }
  // N_BS x P slice of one user.
  CMat user_channel(int k) const {
    return h.middleRows(user_offset(k), static_cast<Eigen::Index>(num_subarrays) * antennas_per_subarray);
  }
};

// Draws one small-scale coefficient per (user, path) and assembles the
// aggregate channel at every pilot tone. Direct and scattered components are
// weighted by the Rician factor; users outside the active set contribute
// all-zero rows. Coefficients are drawn for every user in a fixed order so
// the tensor is reproducible regardless of which users are active.
inline ChannelTensor assemble_channel(const Scenario &sc, const PathGeometry &geo,
                                      const ChannelConfig &cfg, const PilotGrid &grid,
                                      std::uint64_t seed) {
  cfg.validate();
  const int K = static_cast<int>(sc.users.size());
  const int M = sc.room.num_subarrays;
  const int Ns = cfg.antennas_per_subarray;
  const int P = grid.count;
  const double lambda = cfg.wavelength();

  ChannelTensor out;
  out.num_users = K;
  out.num_subarrays = M;
  out.antennas_per_subarray = Ns;
  out.seed = seed;
  out.h = CMat::Zero(static_cast<Eigen::Index>(K) * M * Ns, P);
  out.subarray_activity.assign(K, std::vector<std::uint8_t>(M, 0));
  out.path_alphas.resize(K);

  Rng rng(seed);
  for (int k = 0; k < K; ++k) {
    const auto &paths = geo.users.at(k);
    out.path_alphas[k].resize(paths.size());
    for (std::size_t l = 0; l < paths.size(); ++l)
      out.path_alphas[k][l] = rng.complex_normal();

    for (std::size_t l = 0; l < paths.size(); ++l)
      for (int m = 0; m < M; ++m)
        if (paths[l].mask[m]) out.subarray_activity[k][m] = 1;

    if (!sc.users[k].active) continue;

    const double g = cfg.rician_gamma;
    const double w_direct = std::sqrt(g / (g + 1.0));
    const double w_scatter = std::sqrt(1.0 / (g + 1.0));

    for (std::size_t l = 0; l < paths.size(); ++l) {
      const PathParams &pp = paths[l];
      const cxd alpha = out.path_alphas[k][l];
      const cxd w = (pp.is_los ? w_direct : w_scatter) * alpha;
      const double hop0_gain = pp.is_los ? 1.0 : path_gain(lambda, cfg.antenna_gain, pp.source_distance);

      for (int m = 0; m < M; ++m) {
        if (!pp.mask[m]) continue;
        const double gain = hop0_gain * path_gain(lambda, cfg.antenna_gain, pp.distance[m]);
        const double amp = std::sqrt(gain);
        const CVec e = steering_vector(pp.aoa[m], Ns);
        const Eigen::Index row0 = out.user_offset(k) + static_cast<Eigen::Index>(m) * Ns;
        for (int p = 0; p < P; ++p) {
          const cxd phase = std::polar(amp, -2.0 * kPi * pp.delay[m] * grid.offsets[p]);
          out.h.col(p).segment(row0, Ns) += w * phase * e;
        }
      }
    }
  }
  return out;
}

} // namespace xlsim
