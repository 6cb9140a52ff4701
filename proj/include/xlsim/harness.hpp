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

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "localization.hpp"
#include "metrics.hpp"
#include "recovery.hpp"
#include "svg.hpp"

namespace xlsim {

// ---------- per-trial record ----------

struct SolverOutcome {
  std::string solver;
  bool ok = false;
  std::string error;
  double pe = 0.0;
  bool nmse_valid = false;
  double nmse_ratio = 0.0;
  double nmse_db = 0.0;
  std::vector<double> rmse;      // correctly detected, successfully localized users
  int detected = 0;
  int missed = 0;
  int false_alarms = 0;
  int localized = 0;
  double eps_terminal = 0.0;     // last in-loop residual mean
  double eps_final = 0.0;        // after refinement re-solves
  int iterations = 0;
  bool converged = true;
  bool rank_deficient = false;
  bool refinement_deleted = false;
  bool refinement_added = false;
  double wall_ms = 0.0;
};

struct TrialRecord {
  int point_index = 0;
  double point_value = 0.0;
  int trial_index = 0;
  std::uint64_t trial_seed = 0;
  bool ran = false; // stays false for slots skipped after an interrupt
  bool ok = false;
  std::string error;
  std::vector<SolverOutcome> solvers;
  double wall_ms = 0.0;
};

inline bool solver_known(const std::string &name) {
  return name == "strbomp" || name == "bomp-sa" || name == "bomp" ||
         name == "oracle-ls" || name == "oracle-ls-sa";
}

// ---------- one Monte-Carlo trial ----------

// Runs the full pipeline once: deployment draw, channel synthesis, pilot and
// combiner design, measurement synthesis, then every configured solver plus
// (optionally) localization over its channel estimate. All randomness is
// derived from the trial seed, so a record is reproducible in isolation.
inline TrialRecord run_trial(const ExperimentConfig &cfg, int point_index, double point_value,
                             int trial_index) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();

  TrialRecord rec;
  rec.point_index = point_index;
  rec.point_value = point_value;
  rec.trial_index = trial_index;
  rec.trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(point_index),
                               static_cast<std::uint64_t>(trial_index));
  rec.ran = true;
  try {
    cfg.validate();
    const std::uint64_t seed_scenario = derive_seed(rec.trial_seed, 101);
    const std::uint64_t seed_alphas = derive_seed(rec.trial_seed, 102);
    const std::uint64_t seed_pilots = derive_seed(rec.trial_seed, 103);
    const std::uint64_t seed_combiners = derive_seed(rec.trial_seed, 104);
    const std::uint64_t seed_noise = derive_seed(rec.trial_seed, 105);

    const Scenario sc = generate_scenario(cfg.scenario, seed_scenario);
    const PathGeometry geo = path_parameters(sc);
    const PilotGrid grid =
        pilot_grid(cfg.channel.sample_rate, cfg.channel.num_subcarriers, geo.tau_max);
    const ChannelTensor ch = assemble_channel(sc, geo, cfg.channel, grid, seed_alphas);

    Dims dims;
    dims.num_users = cfg.scenario.num_users;
    dims.num_subarrays = cfg.scenario.num_subarrays;
    dims.antennas_per_subarray = cfg.channel.antennas_per_subarray;
    dims.num_symbols = cfg.g_symbols;
    dims.num_pilots = grid.count;

    const double sigma2 =
        cfg.noiseless ? 0.0 : noise_power(cfg.channel.sample_rate, cfg.noise_density_dbm_hz);
    const PilotBook pilots = design_pilots(dims.num_users, dims.num_pilots, dims.num_symbols,
                                           cfg.ptx_watt(), cfg.pilot_mode, seed_pilots);
    const CombinerSet combiners = design_combiners(dims.num_subarrays, dims.antennas_per_subarray,
                                                   dims.num_symbols, seed_combiners);
    const StructuredSensing model(pilots, combiners, dims);
    const MeasurementSet ms = simulate_measurements(model, ch.h, sigma2, seed_noise);

    std::vector<std::uint8_t> truth(cfg.scenario.num_users, 0);
    for (int k = 0; k < cfg.scenario.num_users; ++k) truth[k] = sc.users[k].active ? 1 : 0;

    RecoveryConfig rcfg;
    rcfg.epsilon_threshold = cfg.epsilon_override > 0.0 ? cfg.epsilon_override : sigma2;
    rcfg.ls_tolerance = cfg.ls_tolerance;
    rcfg.max_iterations = cfg.max_iterations > 0
                              ? cfg.max_iterations
                              : cfg.scenario.num_active * cfg.scenario.num_subarrays;

    for (const std::string &name : cfg.solvers) {
      SolverOutcome so;
      so.solver = name;
      const auto t0 = clock::now();
      try {
        RecoveryResult res;
        if (name == "strbomp") res = strbomp(ms.y, model, rcfg);
        else if (name == "bomp-sa") res = bomp_sa(ms.y, model, rcfg);
        else if (name == "bomp") res = bomp(ms.y, model, rcfg);
        else if (name == "oracle-ls") res = oracle_ls(ms.y, model, truth, rcfg);
        else if (name == "oracle-ls-sa")
          res = oracle_ls_sa(ms.y, model, truth, ch.subarray_activity, rcfg);
        else throw std::invalid_argument("run_trial: unknown solver '" + name + "'.");

        so.pe = metric_pe(truth, res.activity);
        if (ch.h.squaredNorm() > 0.0) {
          so.nmse_valid = true;
          so.nmse_ratio = metric_nmse_ratio(ch.h, res.h_hat);
          so.nmse_db = so.nmse_ratio == 0.0 ? -std::numeric_limits<double>::infinity()
                                            : 10.0 * std::log10(so.nmse_ratio);
        }
        so.detected = static_cast<int>(res.detected_users.size());
        for (int k = 0; k < cfg.scenario.num_users; ++k) {
          if (truth[k] && !res.activity[k]) ++so.missed;
          if (!truth[k] && res.activity[k]) ++so.false_alarms;
        }
        so.eps_terminal =
            res.residual_trace.empty() ? res.initial_residual_mean : res.residual_trace.back();
        so.eps_final = res.final_residual_mean;
        so.iterations = res.iterations;
        so.converged = res.converged;
        so.rank_deficient = res.rank_deficient;
        so.refinement_deleted = res.refinement_deleted;
        so.refinement_added = res.refinement_added;

        if (cfg.run_localization && !res.detected_users.empty()) {
          const auto locs = mscloc(res.h_hat, res.detected_users, dims.num_subarrays,
                                   dims.antennas_per_subarray, grid.offsets, geo.tau_max,
                                   sc.room.subarray_x, cfg.loc);
          for (const auto &loc : locs) {
            if (!loc.localized) continue;
            ++so.localized;
            if (truth[loc.user])
              so.rmse.push_back(
                  metric_rmse_xy(loc.x, loc.y, sc.users[loc.user].x, sc.users[loc.user].y));
          }
        }
        so.ok = true;
      } catch (const std::exception &e) {
        so.ok = false;
        so.error = e.what();
      }
      so.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
      rec.solvers.push_back(std::move(so));
    }
    rec.ok = true;
  } catch (const std::exception &e) {
    rec.ok = false;
    rec.error = e.what();
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - t_start).count();
  return rec;
}

// ---------- sweep across one axis ----------

struct SolverAggregate {
  std::string solver;
  int trials = 0;
  double pe_mean = 0.0, pe_ci95 = 0.0;
  int nmse_trials = 0;
  double nmse_db_mean = 0.0, nmse_db_ci95 = 0.0;
  double nmse_ratio_mean = 0.0;
  int rmse_count = 0;
  double rmse_mean = 0.0, rmse_ci95 = 0.0;
  std::vector<double> rmse_sorted;
};

struct PointSummary {
  double value = 0.0;
  std::vector<SolverAggregate> solvers;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kPtx;
  std::vector<double> values;
  std::vector<std::vector<TrialRecord>> records; // [point][trial]
  std::vector<PointSummary> summary;
  ExperimentConfig config;
  bool interrupted = false;
};

namespace detail {

// SIGINT stops workers from pulling further trials; whatever finished is
// still aggregated and written out.
inline std::atomic<bool> &interrupt_flag() {
  static std::atomic<bool> flag{false};
  return flag;
}

inline void on_interrupt(int) { interrupt_flag().store(true); }

struct MeanCi {
  double mean = 0.0, ci95 = 0.0;
  int n = 0;
};

inline MeanCi mean_ci(const std::vector<double> &xs) {
  MeanCi out;
  out.n = static_cast<int>(xs.size());
  if (out.n == 0) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    out.ci95 = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double acc = 0.0;
  for (double x : xs) acc += x;
  out.mean = acc / out.n;
  if (out.n > 1 && std::isfinite(out.mean)) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.ci95 = 1.96 * std::sqrt(ss / (out.n - 1)) / std::sqrt(static_cast<double>(out.n));
  }
  return out;
}

inline SolverAggregate aggregate_solver(const std::vector<TrialRecord> &trials,
                                        const std::string &name) {
  SolverAggregate agg;
  agg.solver = name;
  std::vector<double> pes, ratios, rmses;
  for (const auto &t : trials) {
    if (!t.ok) continue;
    for (const auto &s : t.solvers) {
      if (s.solver != name || !s.ok) continue;
      pes.push_back(s.pe);
      if (s.nmse_valid) ratios.push_back(s.nmse_ratio);
      for (double r : s.rmse) rmses.push_back(r);
    }
  }
  const MeanCi pe = mean_ci(pes);
  agg.trials = pe.n;
  agg.pe_mean = pe.mean;
  agg.pe_ci95 = pe.ci95;

  // Estimation error pools in the power-ratio domain and converts to dB at
  // the end; the interval converts with the same slope (delta method).
  const MeanCi nr = mean_ci(ratios);
  agg.nmse_trials = nr.n;
  agg.nmse_ratio_mean = nr.mean;
  if (nr.n > 0) {
    agg.nmse_db_mean = nr.mean == 0.0 ? -std::numeric_limits<double>::infinity()
                                      : 10.0 * std::log10(nr.mean);
    agg.nmse_db_ci95 = (nr.mean > 0.0 && std::isfinite(nr.mean))
                           ? 10.0 / std::log(10.0) * nr.ci95 / nr.mean
                           : 0.0;
  } else {
    agg.nmse_db_mean = std::numeric_limits<double>::quiet_NaN();
    agg.nmse_db_ci95 = std::numeric_limits<double>::quiet_NaN();
  }

  const MeanCi rm = mean_ci(rmses);
  agg.rmse_count = rm.n;
  agg.rmse_mean = rm.mean;
  agg.rmse_ci95 = rm.ci95;
  agg.rmse_sorted = rmses;
  std::sort(agg.rmse_sorted.begin(), agg.rmse_sorted.end());
  return agg;
}

} // namespace detail

// Runs trials at every axis value. Work is spread over a thread pool, yet
// the output is bit-identical for any worker count: each trial draws from
// its own derived seed and lands in a preassigned slot, and aggregation
// walks the slots in index order.
inline SweepResult run_sweep(const ExperimentConfig &cfg, SweepAxis axis,
                             const std::vector<double> &values,
                             const std::function<void(int, int)> &progress = {}) {
  if (values.empty()) throw std::invalid_argument("run_sweep: at least one axis value.");
  cfg.validate();
  for (const auto &s : cfg.solvers)
    if (!solver_known(s)) throw std::invalid_argument("run_sweep: unknown solver '" + s + "'.");

  SweepResult sr;
  sr.axis = axis;
  sr.values = values;
  sr.config = cfg;
  sr.records.resize(values.size());
  for (auto &v : sr.records) v.resize(cfg.trials);

  const int total = static_cast<int>(values.size()) * cfg.trials;
  unsigned workers = cfg.workers > 0 ? static_cast<unsigned>(cfg.workers)
                                     : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(total));

  detail::interrupt_flag().store(false);
  auto prev_handler = std::signal(SIGINT, detail::on_interrupt);

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mu;
  auto worker = [&] {
    for (;;) {
      if (detail::interrupt_flag().load()) return;
      const int task = next.fetch_add(1);
      if (task >= total) return;
      const int point = task / cfg.trials;
      const int trial = task % cfg.trials;
      ExperimentConfig point_cfg = cfg;
      apply_sweep_value(point_cfg, axis, values[point]);
      sr.records[point][trial] = run_trial(point_cfg, point, values[point], trial);
      const int d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mu);
        progress(d, total);
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto &t : pool) t.join();
  }
  if (prev_handler != SIG_ERR) std::signal(SIGINT, prev_handler);
  sr.interrupted = detail::interrupt_flag().load();

  for (std::size_t i = 0; i < values.size(); ++i) {
    PointSummary ps;
    ps.value = values[i];
    for (const auto &name : cfg.solvers)
      ps.solvers.push_back(detail::aggregate_solver(sr.records[i], name));
    sr.summary.push_back(std::move(ps));
  }
  return sr;
}

// ---------- study outputs ----------

namespace detail {

inline std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

} // namespace detail

// results.csv: one row per (axis value, solver, metric).
inline void write_results_csv(const std::string &path, const SweepResult &sr) {
  std::ofstream out(path, std::ios::binary); // fixed newline policy across platforms
  if (!out) throw std::runtime_error("write_results_csv: cannot open '" + path + "'.");
  out << "axis,value,solver,metric,mean,ci95\n";
  const char *axis = sweep_axis_name(sr.axis);
  for (const auto &ps : sr.summary) {
    for (const auto &agg : ps.solvers) {
      out << axis << ',' << detail::csv_num(ps.value) << ',' << agg.solver << ",pe,"
          << detail::csv_num(agg.pe_mean) << ',' << detail::csv_num(agg.pe_ci95) << '\n';
      out << axis << ',' << detail::csv_num(ps.value) << ',' << agg.solver << ",nmse_db,"
          << detail::csv_num(agg.nmse_db_mean) << ',' << detail::csv_num(agg.nmse_db_ci95)
          << '\n';
      out << axis << ',' << detail::csv_num(ps.value) << ',' << agg.solver << ",rmse_m,"
          << detail::csv_num(agg.rmse_mean) << ',' << detail::csv_num(agg.rmse_ci95) << '\n';
    }
  }
}

// records.jsonl: one line per trial, in (point, trial) order. Contains wall
// times, so unlike results.csv it is not byte-stable across runs.
inline void write_records_jsonl(const std::string &path, const SweepResult &sr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_records_jsonl: cannot open '" + path + "'.");
  for (const auto &point : sr.records) {
    for (const auto &t : point) {
      if (!t.ran) continue;
      json j;
      j["point"] = t.point_index;
      j["value"] = t.point_value;
      j["trial"] = t.trial_index;
      j["seed"] = t.trial_seed;
      j["ok"] = t.ok;
      if (!t.ok) j["error"] = t.error;
      j["wall_ms"] = t.wall_ms;
      json solvers = json::array();
      for (const auto &s : t.solvers) {
        json sj;
        sj["solver"] = s.solver;
        sj["ok"] = s.ok;
        if (!s.ok) sj["error"] = s.error;
        sj["pe"] = s.pe;
        if (s.nmse_valid) {
          sj["nmse_ratio"] = s.nmse_ratio;
          sj["nmse_db"] = std::isfinite(s.nmse_db) ? json(s.nmse_db) : json("-inf");
        }
        sj["rmse"] = s.rmse;
        sj["detected"] = s.detected;
        sj["missed"] = s.missed;
        sj["false_alarms"] = s.false_alarms;
        sj["localized"] = s.localized;
        sj["eps_terminal"] = s.eps_terminal;
        sj["eps_final"] = s.eps_final;
        sj["iterations"] = s.iterations;
        sj["converged"] = s.converged;
        sj["rank_deficient"] = s.rank_deficient;
        sj["wall_ms"] = s.wall_ms;
        solvers.push_back(sj);
      }
      j["solvers"] = solvers;
      out << j.dump() << '\n';
    }
  }
}

// config.lock.json: the fully resolved study description.
inline void write_config_lock(const std::string &path, const SweepResult &sr) {
  const ExperimentConfig &c = sr.config;
  json j;
  j["format"] = "xlsim-config-lock";
  j["version"] = 1;
  j["axis"] = sweep_axis_name(sr.axis);
  j["values"] = sr.values;
  j["scenario"] = {{"k", c.scenario.num_users},
                   {"ka", c.scenario.num_active},
                   {"m", c.scenario.num_subarrays},
                   {"delta_m", c.scenario.subarray_spacing},
                   {"scatterer_floor_m", c.scenario.scatterer_floor},
                   {"user_floor_m", c.scenario.user_floor},
                   {"room_height_m", c.scenario.room_height},
                   {"min_paths", c.scenario.min_paths},
                   {"max_paths", c.scenario.max_paths},
                   {"min_scatterers", c.scenario.min_scatterers},
                   {"max_scatterers", c.scenario.max_scatterers},
                   {"min_subarrays_per_path", c.scenario.min_subarrays_per_path},
                   {"max_subarray_fraction", c.scenario.max_subarray_fraction},
                   {"synthetic_uniform_delays", c.scenario.synthetic_uniform_delays}};
  j["channel"] = {{"fc_hz", c.channel.carrier_freq},
                  {"fs_hz", c.channel.sample_rate},
                  {"nc", c.channel.num_subcarriers},
                  {"ns", c.channel.antennas_per_subarray},
                  {"rician_gamma", c.channel.rician_gamma},
                  {"antenna_gain", c.channel.antenna_gain}};
  j["frontend"] = {{"ptx_dbm", c.ptx_dbm},
                   {"g_symbols", c.g_symbols},
                   {"pilot_mode", pilot_mode_name(c.pilot_mode)},
                   {"noise_density_dbm_hz", c.noise_density_dbm_hz},
                   {"noiseless", c.noiseless}};
  j["recovery"] = {{"ls_tolerance", c.ls_tolerance},
                   {"epsilon_override", c.epsilon_override},
                   {"max_iterations", c.max_iterations}};
  j["localization"] = {{"phi", c.loc.energy_threshold},
                       {"aoa_coarse_step_deg", rad_to_deg(c.loc.grids.aoa_coarse_step)},
                       {"delay_coarse_divisions", c.loc.grids.delay_coarse_divisions},
                       {"refine_levels", c.loc.grids.refine_levels},
                       {"refine_factor", c.loc.grids.refine_factor},
                       {"run_localization", c.run_localization}};
  j["study"] = {{"solvers", c.solvers},
                {"trials", c.trials},
                {"seed", c.seed},
                {"workers", c.workers}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_config_lock: cannot open '" + path + "'.");
  out << j.dump(2) << '\n';
}

// Plots plus gnuplot-ready .dat companions.
inline void write_plots(const std::string &dir, const SweepResult &sr) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::string axis = sweep_axis_name(sr.axis);

  auto dat_path = [&](const std::string &stem) { return dir + "/" + stem + ".dat"; };
  auto svg_path = [&](const std::string &stem) { return dir + "/" + stem + ".svg"; };

  // Error-probability and estimation-error curves.
  std::vector<PlotSeries> pe_series, nmse_series;
  std::ofstream pe_dat(dat_path(axis + "_pe"), std::ios::binary);
  std::ofstream nmse_dat(dat_path(axis + "_nmse"), std::ios::binary);
  pe_dat << "# axis value pe ci95 per solver block\n";
  nmse_dat << "# axis value nmse_db ci95 per solver block\n";
  for (const auto &name : sr.config.solvers) {
    PlotSeries pe_s, nmse_s;
    pe_s.name = name;
    nmse_s.name = name;
    pe_dat << "# solver " << name << '\n';
    nmse_dat << "# solver " << name << '\n';
    for (const auto &ps : sr.summary) {
      for (const auto &agg : ps.solvers) {
        if (agg.solver != name) continue;
        pe_dat << detail::csv_num(ps.value) << ' ' << detail::csv_num(agg.pe_mean) << ' '
               << detail::csv_num(agg.pe_ci95) << '\n';
        nmse_dat << detail::csv_num(ps.value) << ' ' << detail::csv_num(agg.nmse_db_mean) << ' '
                 << detail::csv_num(agg.nmse_db_ci95) << '\n';
        pe_s.x.push_back(ps.value);
        pe_s.y.push_back(agg.pe_mean > 0.0 ? std::log10(agg.pe_mean)
                                           : std::numeric_limits<double>::quiet_NaN());
        nmse_s.x.push_back(ps.value);
        nmse_s.y.push_back(agg.nmse_db_mean);
      }
    }
    pe_dat << '\n';
    nmse_dat << '\n';
    pe_series.push_back(std::move(pe_s));
    nmse_series.push_back(std::move(nmse_s));
  }
  {
    std::ofstream out(svg_path(axis + "_pe"), std::ios::binary);
    out << svg_line_chart("Activity error probability vs " + std::string(axis), axis,
                          "log10(Pe)", pe_series);
  }
  {
    std::ofstream out(svg_path(axis + "_nmse"), std::ios::binary);
    out << svg_line_chart("Channel estimation error vs " + std::string(axis), axis,
                          "NMSE [dB]", nmse_series);
  }

  // Position-error CDF, one chart per axis value.
  for (const auto &ps : sr.summary) {
    std::vector<PlotSeries> cdf_series;
    const std::string stem = axis + "_" + detail::csv_num(ps.value) + "_rmse_cdf";
    std::ofstream dat(dat_path(stem), std::ios::binary);
    dat << "# rmse_m cdf per solver block\n";
    for (const auto &agg : ps.solvers) {
      PlotSeries s;
      s.name = agg.solver;
      s.step = true;
      dat << "# solver " << agg.solver << '\n';
      const auto &xs = agg.rmse_sorted;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = static_cast<double>(i + 1) / static_cast<double>(xs.size());
        s.x.push_back(xs[i]);
        s.y.push_back(f);
        dat << detail::csv_num(xs[i]) << ' ' << detail::csv_num(f) << '\n';
      }
      dat << '\n';
      if (!s.x.empty()) cdf_series.push_back(std::move(s));
    }
    std::ofstream out(svg_path(stem), std::ios::binary);
    out << svg_line_chart("Position error CDF (" + std::string(axis) + " = " +
                              detail::csv_num(ps.value) + ")",
                          "RMSE [m]", "CDF", cdf_series);
  }
}

// Convenience wrapper used by the command-line tool: run, then write
// config.lock.json, records.jsonl, results.csv, and plots into `outdir`.
inline SweepResult run_study(const ExperimentConfig &cfg, SweepAxis axis,
                             const std::vector<double> &values, const std::string &outdir,
                             const std::function<void(int, int)> &progress = {}) {
  std::filesystem::create_directories(outdir);
  SweepResult sr = run_sweep(cfg, axis, values, progress);
  write_config_lock(outdir + "/config.lock.json", sr);
  write_records_jsonl(outdir + "/records.jsonl", sr);
  write_results_csv(outdir + "/results.csv", sr);
  write_plots(outdir, sr);
  return sr;
}

} // namespace xlsim
