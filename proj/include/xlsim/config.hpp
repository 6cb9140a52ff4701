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

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "channel.hpp"
#include "frontend.hpp"
#include "geometry.hpp"
#include "localization.hpp"
#include "types.hpp"

namespace xlsim {

// Everything one experiment needs: deployment, waveform, frontend, solver,
// and study settings. Readable from a plain key/value file; the recognized
// keys are listed next to each field.
struct ExperimentConfig {
  ScenarioConfig scenario;   // k, ka, m, delta_m, scatterer_floor_m, user_floor_m,
                             // room_height_m, min_paths, max_paths, min_scatterers,
                             // max_scatterers, min_subarrays_per_path,
                             // max_subarray_fraction, synthetic_uniform_delays
  ChannelConfig channel;     // fc_hz, fs_hz, nc, ns, rician_gamma, antenna_gain
  double ptx_dbm = 20.0;     // ptx_dbm
  int g_symbols = 50;        // g_symbols
  PilotMode pilot_mode = PilotMode::kGmmv; // pilot_mode = mmv | gmmv
  double noise_density_dbm_hz = -174.0;    // noise_density_dbm_hz
  bool noiseless = false;                  // noiseless
  double ls_tolerance = 1e-10;             // ls_tolerance
  double epsilon_override = 0.0;           // epsilon_override (0 -> noise power)
  int max_iterations = 0;                  // max_iterations (0 -> ka * m)
  LocalizationConfig loc;                  // phi, aoa_coarse_step_deg,
                                           // delay_coarse_divisions, refine_levels,
                                           // refine_factor
  bool run_localization = true;            // run_localization
  std::vector<std::string> solvers = {"strbomp", "bomp-sa", "bomp",
                                      "oracle-ls", "oracle-ls-sa"}; // solvers
  int trials = 100;          // trials
  std::uint64_t seed = 1;    // seed
  int workers = 0;           // workers (0 -> hardware concurrency)

  double ptx_watt() const { return dbm_to_watt(ptx_dbm); }

  void validate() const {
    scenario.validate();
    channel.validate();
    if (g_symbols < 1) throw std::invalid_argument("ExperimentConfig: g_symbols must be >= 1.");
    if (trials < 1) throw std::invalid_argument("ExperimentConfig: trials must be >= 1.");
    if (workers < 0) throw std::invalid_argument("ExperimentConfig: workers must be >= 0.");
    if (solvers.empty()) throw std::invalid_argument("ExperimentConfig: at least one solver.");
  }
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline bool parse_bool(const std::string &v, const std::string &key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: key '" + key + "' expects a boolean, got '" + v + "'.");
}

inline std::vector<std::string> split_csv(const std::string &v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

} // namespace detail

inline void apply_config_entry(ExperimentConfig &cfg, const std::string &key,
                               const std::string &value) {
  using detail::parse_bool;
  auto as_int = [&] { return std::stoi(value); };
  auto as_double = [&] { return std::stod(value); };
  auto as_u64 = [&] { return static_cast<std::uint64_t>(std::stoull(value)); };

  if (key == "k") cfg.scenario.num_users = as_int();
  else if (key == "ka") cfg.scenario.num_active = as_int();
  else if (key == "m") cfg.scenario.num_subarrays = as_int();
  else if (key == "delta_m") cfg.scenario.subarray_spacing = as_double();
  else if (key == "scatterer_floor_m") cfg.scenario.scatterer_floor = as_double();
  else if (key == "user_floor_m") cfg.scenario.user_floor = as_double();
  else if (key == "room_height_m") cfg.scenario.room_height = as_double();
  else if (key == "min_paths") cfg.scenario.min_paths = as_int();
  else if (key == "max_paths") cfg.scenario.max_paths = as_int();
  else if (key == "min_scatterers") cfg.scenario.min_scatterers = as_int();
  else if (key == "max_scatterers") cfg.scenario.max_scatterers = as_int();
  else if (key == "min_subarrays_per_path") cfg.scenario.min_subarrays_per_path = as_int();
  else if (key == "max_subarray_fraction") cfg.scenario.max_subarray_fraction = as_double();
  else if (key == "synthetic_uniform_delays")
    cfg.scenario.synthetic_uniform_delays = parse_bool(value, key);
  else if (key == "fc_hz") cfg.channel.carrier_freq = as_double();
  else if (key == "fs_hz") cfg.channel.sample_rate = as_double();
  else if (key == "nc") cfg.channel.num_subcarriers = as_int();
  else if (key == "ns") cfg.channel.antennas_per_subarray = as_int();
  else if (key == "rician_gamma") cfg.channel.rician_gamma = as_double();
  else if (key == "antenna_gain") cfg.channel.antenna_gain = as_double();
  else if (key == "ptx_dbm") cfg.ptx_dbm = as_double();
  else if (key == "g_symbols") cfg.g_symbols = as_int();
  else if (key == "pilot_mode") {
    if (value == "mmv") cfg.pilot_mode = PilotMode::kMmv;
    else if (value == "gmmv") cfg.pilot_mode = PilotMode::kGmmv;
    else throw std::invalid_argument("config: pilot_mode must be 'mmv' or 'gmmv'.");
  } else if (key == "noise_density_dbm_hz") cfg.noise_density_dbm_hz = as_double();
  else if (key == "noiseless") cfg.noiseless = parse_bool(value, key);
  else if (key == "ls_tolerance") cfg.ls_tolerance = as_double();
  else if (key == "epsilon_override") cfg.epsilon_override = as_double();
  else if (key == "max_iterations") cfg.max_iterations = as_int();
  else if (key == "phi") cfg.loc.energy_threshold = as_double();
  else if (key == "aoa_coarse_step_deg") cfg.loc.grids.aoa_coarse_step = deg_to_rad(as_double());
  else if (key == "delay_coarse_divisions") cfg.loc.grids.delay_coarse_divisions = as_int();
  else if (key == "refine_levels") cfg.loc.grids.refine_levels = as_int();
  else if (key == "refine_factor") cfg.loc.grids.refine_factor = as_int();
  else if (key == "run_localization") cfg.run_localization = parse_bool(value, key);
  else if (key == "solvers") cfg.solvers = detail::split_csv(value);
  else if (key == "trials") cfg.trials = as_int();
  else if (key == "seed") cfg.seed = as_u64();
  else if (key == "workers") cfg.workers = as_int();
  else throw std::invalid_argument("config: unknown key '" + key + "'.");
}

// Reads `key = value` lines; '#' starts a comment, blank lines are skipped.
inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open '" + path + "'.");
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("load_config: line " + std::to_string(line_no) +
                               " is not of the form key = value.");
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

// Sweep axes understood by the study runner.
enum class SweepAxis { kPtx, kSymbols, kActivity, kSpacing };

inline const char *sweep_axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kPtx: return "ptx";
    case SweepAxis::kSymbols: return "g";
    case SweepAxis::kActivity: return "activity";
    case SweepAxis::kSpacing: return "spacing";
  }
  return "?";
}

inline SweepAxis parse_sweep_axis(const std::string &s) {
  if (s == "ptx") return SweepAxis::kPtx;
  if (s == "g") return SweepAxis::kSymbols;
  if (s == "activity") return SweepAxis::kActivity;
  if (s == "spacing") return SweepAxis::kSpacing;
  throw std::invalid_argument("sweep axis must be one of ptx, g, activity, spacing.");
}

inline void apply_sweep_value(ExperimentConfig &cfg, SweepAxis axis, double value) {
  switch (axis) {
    case SweepAxis::kPtx: cfg.ptx_dbm = value; break;
    case SweepAxis::kSymbols: cfg.g_symbols = static_cast<int>(value); break;
    case SweepAxis::kActivity: cfg.scenario.num_active = static_cast<int>(value); break;
    case SweepAxis::kSpacing: cfg.scenario.subarray_spacing = value; break;
  }
}

} // namespace xlsim
