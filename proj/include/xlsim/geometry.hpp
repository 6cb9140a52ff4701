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
#include <string>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace xlsim {

// ---------- scenario sampling parameters ----------

struct ScenarioConfig {
  int num_users = 60;            // K
  int num_active = 6;            // K_a
  int num_subarrays = 10;        // M
  double subarray_spacing = 5.0; // distance between subarray centers [m]
  double scatterer_floor = 1.0;  // lowest scatterer height [m]
  double user_floor = 3.0;       // lowest user height [m]
  double room_height = 0.0;      // 0 -> three fifths of the array span
  int min_paths = 1;             // per-user multipath count, inclusive bounds
  int max_paths = 5;
  int min_scatterers = 5;
  int max_scatterers = 15;
  int min_subarrays_per_path = 2;      // lower bound on visible subarrays per path
  double max_subarray_fraction = 0.8;  // upper bound = ceil(fraction * M)
  int mask_retry_limit = 100;          // resampling budget for degenerate masks
  bool synthetic_uniform_delays = false; // replace geometric delays, test aid only

  double array_span() const { return num_subarrays * subarray_spacing; }
  double height() const {
    return room_height > 0.0 ? room_height : 0.6 * array_span();
  }

  void validate() const {
    if (num_users < 1) throw std::invalid_argument("ScenarioConfig: num_users must be >= 1.");
    if (num_active < 0 || num_active > num_users)
      throw std::invalid_argument("ScenarioConfig: num_active must lie in [0, num_users].");
    if (num_subarrays < 2)
      throw std::invalid_argument("ScenarioConfig: num_subarrays must be >= 2.");
    if (subarray_spacing <= 0.0)
      throw std::invalid_argument("ScenarioConfig: subarray_spacing must be positive.");
    if (!(0.0 < scatterer_floor && scatterer_floor < user_floor && user_floor < height()))
      throw std::invalid_argument("ScenarioConfig: floors must satisfy 0 < scatterer < user < height.");
    if (min_paths < 1 || max_paths < min_paths)
      throw std::invalid_argument("ScenarioConfig: path count bounds are invalid.");
    if (min_scatterers < 1 || max_scatterers < min_scatterers)
      throw std::invalid_argument("ScenarioConfig: scatterer count bounds are invalid.");
    int upper = static_cast<int>(std::ceil(max_subarray_fraction * num_subarrays));
    if (min_subarrays_per_path < 1 || upper < min_subarrays_per_path || upper > num_subarrays)
      throw std::invalid_argument("ScenarioConfig: subarray visibility bounds are invalid.");
  }
};

// ---------- sampled deployment ----------

struct RoomGeometry {
  double width = 0.0;           // array span along the x axis [m]
  double height = 0.0;
  double scatterer_floor = 0.0;
  double user_floor = 0.0;
  int num_subarrays = 0;
  double spacing = 0.0;
  std::vector<double> subarray_x; // center of subarray m at ((m+1) - 1/2) * spacing

  double subarray_center(int m) const { return subarray_x.at(m); }
};

struct UserPlacement {
  double x = 0.0, y = 0.0;
  bool active = false;
};

struct ScattererPlacement {
  double x = 0.0, y = 0.0;
};

// One propagation path: the direct link (scatterer < 0) or a single-bounce
// link through scatterers[scatterer]. mask[m] = 1 when subarray m sees it.
struct PathSpec {
  int scatterer = -1;
  std::vector<std::uint8_t> mask;

  bool is_los() const { return scatterer < 0; }
  int visible_count() const {
    int c = 0;
    for (auto b : mask) c += (b != 0);
    return c;
  }
};

struct Scenario {
  RoomGeometry room;
  std::vector<UserPlacement> users;
  std::vector<ScattererPlacement> scatterers;
  std::vector<std::vector<PathSpec>> paths; // [user][path], path 0 is the direct link
  std::uint64_t seed = 0;
  ScenarioConfig config;
};

// ---------- derived per-path parameters ----------

// Last-hop quantities are per subarray; the last hop sets the angle of
// arrival, and the accumulated hop lengths set the delay.
struct PathParams {
  bool is_los = true;
  std::vector<std::uint8_t> mask;
  std::vector<double> distance;     // last-hop length to each subarray center [m]
  double source_distance = 0.0;     // user-to-scatterer hop, 0 for the direct link
  std::vector<double> aoa;          // [rad], measured from the +x array axis
  std::vector<double> delay;        // [s]
};

struct PathGeometry {
  std::vector<std::vector<PathParams>> users; // [user][path]
  double tau_max = 0.0;                       // round-trip bound 2 * span / c
};

// Fraunhofer boundary for an aperture of the given size.
inline double rayleigh_distance(double aperture, double wavelength) {
  if (aperture <= 0.0 || wavelength <= 0.0)
    throw std::invalid_argument("rayleigh_distance: aperture and wavelength must be positive.");
  return 2.0 * aperture * aperture / wavelength;
}

inline std::vector<double> subarray_centers(int num_subarrays, double spacing) {
  std::vector<double> x(num_subarrays);
  for (int m = 0; m < num_subarrays; ++m) x[m] = (m + 0.5) * spacing;
  return x;
}

namespace detail {

inline std::vector<std::uint8_t> sample_mask(Rng &rng, int m_total, int lo, int hi) {
  int count = rng.uniform_int(lo, hi);
  std::vector<std::uint8_t> mask(m_total, 0);
  for (int idx : rng.sample_indices(m_total, count)) mask[idx] = 1;
  return mask;
}

} // namespace detail

// Samples users, scatterers, per-user path counts, and per-path subarray
// visibility masks. Draw order is fixed so a seed pins the whole scenario.
inline Scenario generate_scenario(const ScenarioConfig &cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);

  Scenario sc;
  sc.seed = seed;
  sc.config = cfg;

  sc.room.width = cfg.array_span();
  sc.room.height = cfg.height();
  sc.room.scatterer_floor = cfg.scatterer_floor;
  sc.room.user_floor = cfg.user_floor;
  sc.room.num_subarrays = cfg.num_subarrays;
  sc.room.spacing = cfg.subarray_spacing;
  sc.room.subarray_x = subarray_centers(cfg.num_subarrays, cfg.subarray_spacing);

  sc.users.resize(cfg.num_users);
  for (auto &u : sc.users) {
    u.x = rng.uniform(0.0, sc.room.width);
    u.y = rng.uniform(cfg.user_floor, sc.room.height);
  }
  for (int k : rng.sample_indices(cfg.num_users, cfg.num_active))
    sc.users[k].active = true;

  int n_scat = rng.uniform_int(cfg.min_scatterers, cfg.max_scatterers);
  sc.scatterers.resize(n_scat);
  for (auto &s : sc.scatterers) {
    s.x = rng.uniform(0.0, sc.room.width);
    s.y = rng.uniform(cfg.scatterer_floor, sc.room.height);
  }

  const int mask_hi = static_cast<int>(std::ceil(cfg.max_subarray_fraction * cfg.num_subarrays));
  sc.paths.resize(cfg.num_users);
  for (int k = 0; k < cfg.num_users; ++k) {
    int n_paths = rng.uniform_int(cfg.min_paths, cfg.max_paths);
    sc.paths[k].resize(n_paths);
    for (int l = 0; l < n_paths; ++l) {
      PathSpec &p = sc.paths[k][l];
      p.scatterer = (l == 0) ? -1 : rng.uniform_int(0, n_scat - 1);
      p.mask = detail::sample_mask(rng, cfg.num_subarrays, cfg.min_subarrays_per_path, mask_hi);
      // Active users must keep at least two direct-link anchors; resample a
      // degenerate mask within a bounded budget.
      if (l == 0 && sc.users[k].active) {
        int tries = 0;
        while (p.visible_count() < 2) {
          if (++tries > cfg.mask_retry_limit)
            throw std::runtime_error("generate_scenario: could not draw a direct-link mask with two subarrays.");
          p.mask = detail::sample_mask(rng, cfg.num_subarrays, cfg.min_subarrays_per_path, mask_hi);
        }
      }
    }
  }
  return sc;
}

// Distances, angles of arrival, and delays for every (user, path, subarray)
// triple. Angles follow atan2(y, x_m - x_src) with the source at the user
// (direct link) or at the scatterer (single-bounce link).
inline PathGeometry path_parameters(const Scenario &sc) {
  const int m_total = sc.room.num_subarrays;
  PathGeometry out;
  out.tau_max = 2.0 * sc.room.width / kSpeedOfLight;
  out.users.resize(sc.users.size());

  Rng synth_rng(sc.seed ^ 0x7d1ab5ca11edull); // only used by the synthetic mode

  for (std::size_t k = 0; k < sc.users.size(); ++k) {
    const auto &user = sc.users[k];
    out.users[k].resize(sc.paths[k].size());
    for (std::size_t l = 0; l < sc.paths[k].size(); ++l) {
      const PathSpec &spec = sc.paths[k][l];
      PathParams &pp = out.users[k][l];
      pp.is_los = spec.is_los();
      pp.mask = spec.mask;
      pp.distance.resize(m_total);
      pp.aoa.resize(m_total);
      pp.delay.resize(m_total);

      double src_x = user.x, src_y = user.y, hop0 = 0.0;
      if (!spec.is_los()) {
        const auto &s = sc.scatterers.at(spec.scatterer);
        hop0 = std::hypot(user.x - s.x, user.y - s.y);
        src_x = s.x;
        src_y = s.y;
      }
      pp.source_distance = hop0;

      for (int m = 0; m < m_total; ++m) {
        double xm = sc.room.subarray_x[m];
        double d = std::hypot(xm - src_x, src_y);
        pp.distance[m] = d;
        pp.aoa[m] = std::atan2(src_y, xm - src_x);
        pp.delay[m] = (hop0 + d) / kSpeedOfLight;
      }
      if (sc.config.synthetic_uniform_delays) {
        // Synthetic mode: delays drawn afresh, decoupled from the geometry.
        // This breaks delay/angle consistency and exists for stress tests.
        double t = synth_rng.uniform(0.0, out.tau_max);
        for (int m = 0; m < m_total; ++m) pp.delay[m] = t;
      }
    }
  }
  return out;
}

} // namespace xlsim
