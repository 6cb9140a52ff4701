// SPDX-License-Identifier: Apache-2.0
//
// xlsim command-line front end.
//
//   xlsim simulate    one operating point, Monte-Carlo over trials
//   xlsim sweep       curve over ptx / g / activity / spacing
//   xlsim locate-demo single trial, detection plus per-user positioning report
//
// Outputs land in --out: config.lock.json, records.jsonl, results.csv and
// SVG/dat plots for the study commands, scenario/location JSON for the demo.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <xlsim/xlsim.hpp>

namespace {

std::vector<double> parse_values(const std::string &csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::vector<std::string> parse_names(const std::string &csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::string solvers_csv;
  std::string pilot_mode;
  std::string out_dir = "out";
  std::int64_t seed = -1;
  int trials = -1;
  int workers = -1;
  bool quiet = false;
};

void add_common(CLI::App *app, CommonOpts &o) {
  app->add_option("--config", o.config_path, "key = value config file");
  app->add_option("--set", o.sets, "inline config override, key=value (repeatable)");
  app->add_option("--solvers", o.solvers_csv,
                  "comma list from strbomp,bomp-sa,bomp,oracle-ls,oracle-ls-sa");
  app->add_option("--pilot-mode", o.pilot_mode, "mmv or gmmv");
  app->add_option("--seed", o.seed, "base seed");
  app->add_option("--trials", o.trials, "Monte-Carlo trials per point");
  app->add_option("--workers", o.workers, "worker threads (0 = hardware)");
  app->add_option("--out", o.out_dir, "output directory");
  app->add_flag("--quiet", o.quiet, "suppress progress output");
}

xlsim::ExperimentConfig resolve_config(const CommonOpts &o) {
  xlsim::ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = xlsim::load_config(o.config_path);
  for (const auto &kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    std::string val = kv.substr(eq + 1);
    xlsim::apply_config_entry(cfg, key, val);
  }
  if (!o.solvers_csv.empty()) cfg.solvers = parse_names(o.solvers_csv);
  if (!o.pilot_mode.empty()) xlsim::apply_config_entry(cfg, "pilot_mode", o.pilot_mode);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.trials >= 0) cfg.trials = o.trials;
  if (o.workers >= 0) cfg.workers = o.workers;
  cfg.validate();
  return cfg;
}

std::function<void(int, int)> progress_printer(bool quiet) {
  if (quiet) return {};
  return [](int done, int total) {
    std::fprintf(stderr, "\r%d/%d trials", done, total);
    if (done == total) std::fprintf(stderr, "\n");
    std::fflush(stderr);
  };
}

void print_summary(const xlsim::SweepResult &sr) {
  std::printf("%-10s %-14s %12s %12s %12s %8s\n", sweep_axis_name(sr.axis), "solver", "Pe",
              "NMSE[dB]", "RMSE[m]", "loc#");
  for (const auto &ps : sr.summary) {
    for (const auto &agg : ps.solvers) {
      std::printf("%-10.6g %-14s %12.4g %12.4g %12.4g %8d\n", ps.value, agg.solver.c_str(),
                  agg.pe_mean, agg.nmse_db_mean, agg.rmse_mean, agg.rmse_count);
    }
  }
}

int cmd_study(const CommonOpts &o, xlsim::SweepAxis axis, const std::vector<double> &values) {
  const xlsim::ExperimentConfig cfg = resolve_config(o);
  const auto sr = xlsim::run_study(cfg, axis, values, o.out_dir, progress_printer(o.quiet));
  if (sr.interrupted) std::fprintf(stderr, "interrupted: partial results written\n");
  print_summary(sr);
  std::printf("wrote %s/{config.lock.json,records.jsonl,results.csv,*.svg,*.dat}\n",
              o.out_dir.c_str());
  return sr.interrupted ? 130 : 0;
}

// One operating point, per-trial breakdown. Defaults to a single trial.
int cmd_simulate(const CommonOpts &o) {
  xlsim::ExperimentConfig cfg = resolve_config(o);
  if (o.trials < 0) cfg.trials = 1;
  const auto sr = xlsim::run_study(cfg, xlsim::SweepAxis::kPtx, {cfg.ptx_dbm}, o.out_dir,
                                   progress_printer(o.quiet));
  if (sr.interrupted) std::fprintf(stderr, "interrupted: partial results written\n");
  for (const auto &t : sr.records[0]) {
    if (!t.ran) continue;
    std::printf("trial %d (seed %llu)%s\n", t.trial_index,
                static_cast<unsigned long long>(t.trial_seed),
                t.ok ? "" : (" FAILED: " + t.error).c_str());
    if (!t.ok) continue;
    std::printf("  %-14s %10s %10s %6s %6s %5s %5s %10s %10s %9s\n", "solver", "Pe",
                "NMSE[dB]", "miss", "false", "iter", "conv", "eps_term", "eps_fin", "wall[ms]");
    for (const auto &s : t.solvers) {
      if (!s.ok) {
        std::printf("  %-14s FAILED: %s\n", s.solver.c_str(), s.error.c_str());
        continue;
      }
      std::printf("  %-14s %10.4g %10.4g %6d %6d %5d %5s %10.3e %10.3e %9.1f\n",
                  s.solver.c_str(), s.pe, s.nmse_db, s.missed, s.false_alarms, s.iterations,
                  s.converged ? "yes" : "no", s.eps_terminal, s.eps_final, s.wall_ms);
      if (!s.rmse.empty()) {
        double acc = 0.0;
        for (double r : s.rmse) acc += r;
        std::printf("  %-14s localized %d/%d detected, mean position error %.4g m\n", "",
                    static_cast<int>(s.rmse.size()), s.detected,
                    acc / static_cast<double>(s.rmse.size()));
      }
    }
  }
  if (cfg.trials > 1) print_summary(sr);
  std::printf("wrote %s/{config.lock.json,records.jsonl,results.csv,*.svg,*.dat}\n",
              o.out_dir.c_str());
  return sr.interrupted ? 130 : 0;
}

int cmd_locate_demo(const CommonOpts &o) {
  xlsim::ExperimentConfig cfg = resolve_config(o);
  cfg.run_localization = true;

  const std::uint64_t trial_seed = xlsim::derive_seed(cfg.seed, 0, 0);
  const auto sc = xlsim::generate_scenario(cfg.scenario, xlsim::derive_seed(trial_seed, 101));
  const auto geo = xlsim::path_parameters(sc);
  const auto grid = xlsim::pilot_grid(cfg.channel.sample_rate, cfg.channel.num_subcarriers,
                                      geo.tau_max);
  const auto ch =
      xlsim::assemble_channel(sc, geo, cfg.channel, grid, xlsim::derive_seed(trial_seed, 102));

  xlsim::Dims dims;
  dims.num_users = cfg.scenario.num_users;
  dims.num_subarrays = cfg.scenario.num_subarrays;
  dims.antennas_per_subarray = cfg.channel.antennas_per_subarray;
  dims.num_symbols = cfg.g_symbols;
  dims.num_pilots = grid.count;

  const double sigma2 = cfg.noiseless
                            ? 0.0
                            : xlsim::noise_power(cfg.channel.sample_rate,
                                                 cfg.noise_density_dbm_hz);
  const auto pilots =
      xlsim::design_pilots(dims.num_users, dims.num_pilots, dims.num_symbols, cfg.ptx_watt(),
                           cfg.pilot_mode, xlsim::derive_seed(trial_seed, 103));
  const auto combiners =
      xlsim::design_combiners(dims.num_subarrays, dims.antennas_per_subarray, dims.num_symbols,
                              xlsim::derive_seed(trial_seed, 104));
  const xlsim::StructuredSensing model(pilots, combiners, dims);
  const auto ms =
      xlsim::simulate_measurements(model, ch.h, sigma2, xlsim::derive_seed(trial_seed, 105));

  xlsim::RecoveryConfig rcfg;
  rcfg.epsilon_threshold = cfg.epsilon_override > 0.0 ? cfg.epsilon_override : sigma2;
  rcfg.ls_tolerance = cfg.ls_tolerance;
  rcfg.max_iterations = cfg.max_iterations > 0
                            ? cfg.max_iterations
                            : cfg.scenario.num_active * cfg.scenario.num_subarrays;
  const auto res = xlsim::strbomp(ms.y, model, rcfg);

  std::vector<std::uint8_t> truth(cfg.scenario.num_users, 0);
  for (int k = 0; k < cfg.scenario.num_users; ++k) truth[k] = sc.users[k].active ? 1 : 0;
  const double pe = xlsim::metric_pe(truth, res.activity);
  const double nmse = xlsim::metric_nmse_db(ch.h, res.h_hat);

  const auto locs =
      xlsim::mscloc(res.h_hat, res.detected_users, dims.num_subarrays,
                    dims.antennas_per_subarray, grid.offsets, geo.tau_max, sc.room.subarray_x,
                    cfg.loc);

  std::printf("seed %llu: Pe = %.4g, NMSE = %.4g dB, detected %zu users\n",
              static_cast<unsigned long long>(cfg.seed), pe, nmse, res.detected_users.size());
  std::printf("%-6s %-8s %22s %22s %10s %7s %s\n", "user", "active", "true (x, y) [m]",
              "estimate (x, y) [m]", "err [m]", "anchors", "flags");
  for (const auto &loc : locs) {
    const auto &u = sc.users[loc.user];
    char truth_xy[48], est_xy[48];
    std::snprintf(truth_xy, sizeof truth_xy, "(%8.3f, %7.3f)", u.x, u.y);
    if (loc.localized)
      std::snprintf(est_xy, sizeof est_xy, "(%8.3f, %7.3f)", loc.x, loc.y);
    else
      std::snprintf(est_xy, sizeof est_xy, "%22s", "--");
    const double err =
        loc.localized ? xlsim::metric_rmse_xy(loc.x, loc.y, u.x, u.y)
                      : std::numeric_limits<double>::quiet_NaN();
    std::printf("%-6d %-8s %22s %22s %10.4g %7zu %s\n", loc.user, u.active ? "yes" : "NO",
                truth_xy, est_xy, err, loc.anchors.size(),
                loc.low_confidence ? "low-confidence" : "");
    for (std::size_t a = 0; a < loc.anchors.size(); ++a) {
      std::printf("       anchor m=%d%s  aoa = %9.4f deg  delay = %9.4f ns\n", loc.anchors[a],
                  static_cast<int>(a) == loc.ref_anchor ? "*" : " ",
                  xlsim::rad_to_deg(loc.aoa[a]), loc.delay[a] * 1e9);
    }
  }

  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  {
    std::ofstream f(o.out_dir + "/scenario.json", std::ios::binary);
    f << xlsim::scenario_to_json(sc).dump(2) << '\n';
  }
  {
    std::ofstream f(o.out_dir + "/locations.json", std::ios::binary);
    f << xlsim::localization_to_json(locs).dump(2) << '\n';
  }
  {
    std::ofstream f(o.out_dir + "/recovery.json", std::ios::binary);
    f << xlsim::recovery_to_json(res).dump(2) << '\n';
  }
  {
    std::ofstream f(o.out_dir + "/locations.csv", std::ios::binary);
    f << "user,anchors,aoa_deg,delay_ns,x_hat,y_hat,x_true,y_true,rmse_m\n";
    for (const auto &loc : locs) {
      const auto &u = sc.users[loc.user];
      std::string anchors, aoas, delays;
      for (std::size_t a = 0; a < loc.anchors.size(); ++a) {
        const char *sep = a ? ";" : "";
        char buf[64];
        anchors += sep + std::to_string(loc.anchors[a]);
        std::snprintf(buf, sizeof buf, "%s%.6f", sep, xlsim::rad_to_deg(loc.aoa[a]));
        aoas += buf;
        std::snprintf(buf, sizeof buf, "%s%.6f", sep, loc.delay[a] * 1e9);
        delays += buf;
      }
      char row[256];
      if (loc.localized)
        std::snprintf(row, sizeof row, "%d,%s,%s,%s,%.9g,%.9g,%.9g,%.9g,%.9g\n", loc.user,
                      anchors.c_str(), aoas.c_str(), delays.c_str(), loc.x, loc.y, u.x, u.y,
                      xlsim::metric_rmse_xy(loc.x, loc.y, u.x, u.y));
      else
        std::snprintf(row, sizeof row, "%d,%s,%s,%s,,,%.9g,%.9g,\n", loc.user, anchors.c_str(),
                      aoas.c_str(), delays.c_str(), u.x, u.y);
      f << row;
    }
  }
  std::printf("wrote %s/{scenario.json,locations.json,locations.csv,recovery.json}\n",
              o.out_dir.c_str());
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"xlsim: grant-free activity detection, channel estimation and localization "
               "for subarray-based extra-large MIMO"};
  app.require_subcommand(1);
  app.set_version_flag("--version", xlsim::kVersion);

  CommonOpts sim_opts;
  auto *sim = app.add_subcommand("simulate", "Monte-Carlo study at one operating point");
  add_common(sim, sim_opts);

  CommonOpts sweep_opts;
  std::string axis_name = "ptx";
  std::string values_csv;
  auto *sweep = app.add_subcommand("sweep", "Monte-Carlo study across one axis");
  add_common(sweep, sweep_opts);
  sweep->add_option("--axis", axis_name, "ptx, g, activity or spacing")->required();
  sweep->add_option("--values", values_csv, "comma list of axis values")->required();

  CommonOpts demo_opts;
  auto *demo = app.add_subcommand("locate-demo", "single trial with a positioning report");
  add_common(demo, demo_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (sweep->parsed()) {
      const auto axis = xlsim::parse_sweep_axis(axis_name);
      const auto values = parse_values(values_csv);
      if (values.empty()) throw std::invalid_argument("--values must list at least one number");
      return cmd_study(sweep_opts, axis, values);
    }
    if (demo->parsed()) return cmd_locate_demo(demo_opts);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
