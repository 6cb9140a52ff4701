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
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "channel.hpp"
#include "frontend.hpp"
#include "geometry.hpp"
#include "localization.hpp"
#include "recovery.hpp"
#include "types.hpp"

namespace xlsim {

using json = nlohmann::json;

// ---------- scenario, JSON round trip ----------

inline json scenario_to_json(const Scenario &sc) {
  json j;
  j["format"] = "xlsim-scenario";
  j["version"] = 1;
  j["seed"] = sc.seed;
  j["config"] = {{"k", sc.config.num_users},
                 {"ka", sc.config.num_active},
                 {"m", sc.config.num_subarrays},
                 {"delta_m", sc.config.subarray_spacing},
                 {"scatterer_floor_m", sc.config.scatterer_floor},
                 {"user_floor_m", sc.config.user_floor},
                 {"room_height_m", sc.config.room_height},
                 {"min_paths", sc.config.min_paths},
                 {"max_paths", sc.config.max_paths},
                 {"min_scatterers", sc.config.min_scatterers},
                 {"max_scatterers", sc.config.max_scatterers},
                 {"min_subarrays_per_path", sc.config.min_subarrays_per_path},
                 {"max_subarray_fraction", sc.config.max_subarray_fraction},
                 {"synthetic_uniform_delays", sc.config.synthetic_uniform_delays}};
  j["room"] = {{"width", sc.room.width},
               {"height", sc.room.height},
               {"scatterer_floor", sc.room.scatterer_floor},
               {"user_floor", sc.room.user_floor},
               {"spacing", sc.room.spacing},
               {"subarray_x", sc.room.subarray_x}};
  json users = json::array();
  for (const auto &u : sc.users) users.push_back({{"x", u.x}, {"y", u.y}, {"active", u.active}});
  j["users"] = users;
  json scat = json::array();
  for (const auto &s : sc.scatterers) scat.push_back({{"x", s.x}, {"y", s.y}});
  j["scatterers"] = scat;
  json paths = json::array();
  for (const auto &user_paths : sc.paths) {
    json per_user = json::array();
    for (const auto &p : user_paths)
      per_user.push_back({{"scatterer", p.scatterer}, {"mask", p.mask}});
    paths.push_back(per_user);
  }
  j["paths"] = paths;
  return j;
}

inline Scenario scenario_from_json(const json &j) {
  if (j.value("format", "") != "xlsim-scenario" || j.value("version", 0) != 1)
    throw std::runtime_error("scenario_from_json: unsupported format or version.");
  Scenario sc;
  sc.seed = j.at("seed").get<std::uint64_t>();
  const json &c = j.at("config");
  sc.config.num_users = c.at("k").get<int>();
  sc.config.num_active = c.at("ka").get<int>();
  sc.config.num_subarrays = c.at("m").get<int>();
  sc.config.subarray_spacing = c.at("delta_m").get<double>();
  sc.config.scatterer_floor = c.at("scatterer_floor_m").get<double>();
  sc.config.user_floor = c.at("user_floor_m").get<double>();
  sc.config.room_height = c.at("room_height_m").get<double>();
  sc.config.min_paths = c.at("min_paths").get<int>();
  sc.config.max_paths = c.at("max_paths").get<int>();
  sc.config.min_scatterers = c.at("min_scatterers").get<int>();
  sc.config.max_scatterers = c.at("max_scatterers").get<int>();
  sc.config.min_subarrays_per_path = c.at("min_subarrays_per_path").get<int>();
  sc.config.max_subarray_fraction = c.at("max_subarray_fraction").get<double>();
  sc.config.synthetic_uniform_delays = c.at("synthetic_uniform_delays").get<bool>();
  const json &r = j.at("room");
  sc.room.width = r.at("width").get<double>();
  sc.room.height = r.at("height").get<double>();
  sc.room.scatterer_floor = r.at("scatterer_floor").get<double>();
  sc.room.user_floor = r.at("user_floor").get<double>();
  sc.room.spacing = r.at("spacing").get<double>();
  sc.room.subarray_x = r.at("subarray_x").get<std::vector<double>>();
  sc.room.num_subarrays = static_cast<int>(sc.room.subarray_x.size());
  for (const json &u : j.at("users")) {
    UserPlacement up;
    up.x = u.at("x").get<double>();
    up.y = u.at("y").get<double>();
    up.active = u.at("active").get<bool>();
    sc.users.push_back(up);
  }
  for (const json &s : j.at("scatterers"))
    sc.scatterers.push_back({s.at("x").get<double>(), s.at("y").get<double>()});
  for (const json &user_paths : j.at("paths")) {
    std::vector<PathSpec> per_user;
    for (const json &p : user_paths) {
      PathSpec ps;
      ps.scatterer = p.at("scatterer").get<int>();
      ps.mask = p.at("mask").get<std::vector<std::uint8_t>>();
      per_user.push_back(ps);
    }
    sc.paths.push_back(per_user);
  }
  return sc;
}

// ---------- raw complex matrix blobs ----------

namespace detail {

inline void write_cmat(std::ofstream &out, const CMat &m) {
  const std::uint64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char *>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char *>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char *>(m.data()),
            static_cast<std::streamsize>(sizeof(cxd) * m.size()));
}

inline CMat read_cmat(std::ifstream &in) {
  std::uint64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char *>(&rows), sizeof rows);
  in.read(reinterpret_cast<char *>(&cols), sizeof cols);
  if (!in) throw std::runtime_error("read_cmat: truncated header.");
  CMat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  in.read(reinterpret_cast<char *>(m.data()), static_cast<std::streamsize>(sizeof(cxd) * m.size()));
  if (!in) throw std::runtime_error("read_cmat: truncated payload.");
  return m;
}

} // namespace detail

// Channel tensor bundle: `<base>.json` sidecar plus `<base>.bin` payload of
// little-endian double pairs, column-major.
inline void save_channel_bundle(const std::string &base, const ChannelTensor &ch) {
  json meta;
  meta["format"] = "xlsim-channel";
  meta["version"] = 1;
  meta["k"] = ch.num_users;
  meta["m"] = ch.num_subarrays;
  meta["ns"] = ch.antennas_per_subarray;
  meta["p"] = static_cast<int>(ch.h.cols());
  meta["seed"] = ch.seed;
  meta["subarray_activity"] = ch.subarray_activity;
  json alphas = json::array();
  for (const auto &per_user : ch.path_alphas) {
    json a = json::array();
    for (const cxd &v : per_user) a.push_back({v.real(), v.imag()});
    alphas.push_back(a);
  }
  meta["path_alphas"] = alphas;
  std::ofstream js(base + ".json");
  if (!js) throw std::runtime_error("save_channel_bundle: cannot write sidecar.");
  js << meta.dump(2) << "\n";
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("save_channel_bundle: cannot write payload.");
  detail::write_cmat(bin, ch.h);
}

inline ChannelTensor load_channel_bundle(const std::string &base) {
  std::ifstream js(base + ".json");
  if (!js) throw std::runtime_error("load_channel_bundle: cannot open sidecar.");
  json meta = json::parse(js);
  if (meta.value("format", "") != "xlsim-channel" || meta.value("version", 0) != 1)
    throw std::runtime_error("load_channel_bundle: unsupported format or version.");
  ChannelTensor ch;
  ch.num_users = meta.at("k").get<int>();
  ch.num_subarrays = meta.at("m").get<int>();
  ch.antennas_per_subarray = meta.at("ns").get<int>();
  ch.seed = meta.at("seed").get<std::uint64_t>();
  ch.subarray_activity = meta.at("subarray_activity").get<std::vector<std::vector<std::uint8_t>>>();
  for (const json &per_user : meta.at("path_alphas")) {
    std::vector<cxd> a;
    for (const json &v : per_user) a.emplace_back(v.at(0).get<double>(), v.at(1).get<double>());
    ch.path_alphas.push_back(a);
  }
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("load_channel_bundle: cannot open payload.");
  ch.h = detail::read_cmat(bin);
  if (ch.h.rows() != static_cast<Eigen::Index>(ch.num_users) * ch.num_subarrays *
                         ch.antennas_per_subarray ||
      ch.h.cols() != meta.at("p").get<int>())
    throw std::runtime_error("load_channel_bundle: payload shape disagrees with sidecar.");
  return ch;
}

// Measurement bundle, same layout: sidecar plus one matrix whose column p
// is the stacked measurement of pilot p.
inline void save_measurement_bundle(const std::string &base, const MeasurementSet &ms) {
  json meta;
  meta["format"] = "xlsim-measurements";
  meta["version"] = 1;
  meta["k"] = ms.dims.num_users;
  meta["m"] = ms.dims.num_subarrays;
  meta["ns"] = ms.dims.antennas_per_subarray;
  meta["g"] = ms.dims.num_symbols;
  meta["p"] = ms.dims.num_pilots;
  meta["noise_variance"] = ms.noise_variance;
  meta["noise_seed"] = ms.noise_seed;
  std::ofstream js(base + ".json");
  if (!js) throw std::runtime_error("save_measurement_bundle: cannot write sidecar.");
  js << meta.dump(2) << "\n";
  CMat y(ms.dims.measurement_len(), ms.dims.num_pilots);
  for (int p = 0; p < ms.dims.num_pilots; ++p) y.col(p) = ms.y[p];
  std::ofstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("save_measurement_bundle: cannot write payload.");
  detail::write_cmat(bin, y);
}

inline MeasurementSet load_measurement_bundle(const std::string &base) {
  std::ifstream js(base + ".json");
  if (!js) throw std::runtime_error("load_measurement_bundle: cannot open sidecar.");
  json meta = json::parse(js);
  if (meta.value("format", "") != "xlsim-measurements" || meta.value("version", 0) != 1)
    throw std::runtime_error("load_measurement_bundle: unsupported format or version.");
  MeasurementSet ms;
  ms.dims.num_users = meta.at("k").get<int>();
  ms.dims.num_subarrays = meta.at("m").get<int>();
  ms.dims.antennas_per_subarray = meta.at("ns").get<int>();
  ms.dims.num_symbols = meta.at("g").get<int>();
  ms.dims.num_pilots = meta.at("p").get<int>();
  ms.noise_variance = meta.at("noise_variance").get<double>();
  ms.noise_seed = meta.at("noise_seed").get<std::uint64_t>();
  std::ifstream bin(base + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("load_measurement_bundle: cannot open payload.");
  const CMat y = detail::read_cmat(bin);
  if (y.rows() != ms.dims.measurement_len() || y.cols() != ms.dims.num_pilots)
    throw std::runtime_error("load_measurement_bundle: payload shape disagrees with sidecar.");
  ms.y.resize(ms.dims.num_pilots);
  for (int p = 0; p < ms.dims.num_pilots; ++p) ms.y[p] = y.col(p);
  return ms;
}

// ---------- result dumps ----------

inline json recovery_to_json(const RecoveryResult &res) {
  json j;
  j["format"] = "xlsim-recovery";
  j["version"] = 1;
  j["support_blocks"] = res.support_blocks;
  j["detected_users"] = res.detected_users;
  j["activity"] = res.activity;
  j["residual_trace"] = res.residual_trace;
  j["initial_residual_mean"] = res.initial_residual_mean;
  j["final_residual_mean"] = res.final_residual_mean;
  j["epsilon_threshold"] = res.epsilon_threshold;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  j["rank_deficient"] = res.rank_deficient;
  j["refinement_deleted"] = res.refinement_deleted;
  j["refinement_added"] = res.refinement_added;
  return j;
}

inline json localization_to_json(const std::vector<UserLocation> &locs) {
  json arr = json::array();
  for (const auto &l : locs) {
    json j;
    j["user"] = l.user;
    j["anchors"] = l.anchors;
    j["ref_anchor"] = l.ref_anchor;
    json aoa_deg = json::array();
    for (double a : l.aoa) aoa_deg.push_back(rad_to_deg(a));
    j["aoa_deg"] = aoa_deg;
    json delay_ns = json::array();
    for (double t : l.delay) delay_ns.push_back(t * 1e9);
    j["delay_ns"] = delay_ns;
    j["x"] = l.x;
    j["y"] = l.y;
    j["localized"] = l.localized;
    j["low_confidence"] = l.low_confidence;
    arr.push_back(j);
  }
  json out;
  out["format"] = "xlsim-localization";
  out["version"] = 1;
  out["users"] = arr;
  return out;
}

} // namespace xlsim
