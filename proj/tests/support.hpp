// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent reference implementations for the test
// suite. The reference routines here deliberately avoid the library's fast
// paths: least squares runs on fully materialized matrices, and the subspace
// spectra use an explicit noise-subspace basis.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <xlsim/xlsim.hpp>

namespace testsupport {

using xlsim::CMat;
using xlsim::CVec;
using xlsim::cxd;
using xlsim::RVec;

// ---------- canonical configurations ----------

// Small enough for exhaustive-search cross-checks: 4 users, 1 active,
// 2 subarrays of 2 antennas, 8 symbols, 4 pilot tones.
struct TinySetup {
  xlsim::ScenarioConfig scenario_cfg;
  xlsim::ChannelConfig channel_cfg;
  xlsim::Scenario scenario;
  xlsim::PathGeometry geo;
  xlsim::PilotGrid grid;
  xlsim::ChannelTensor channel;
  xlsim::Dims dims;
  xlsim::PilotBook pilots;
  xlsim::CombinerSet combiners;
  std::vector<CMat> dense; // fully materialized sensing matrices, one per pilot
  xlsim::MeasurementSet ms;
  std::vector<std::uint8_t> truth;
};

inline TinySetup make_tiny(std::uint64_t seed, double noise_variance,
                           xlsim::PilotMode mode = xlsim::PilotMode::kGmmv) {
  TinySetup t;
  t.scenario_cfg.num_users = 4;
  t.scenario_cfg.num_active = 1;
  t.scenario_cfg.num_subarrays = 2;
  t.scenario_cfg.min_paths = 1;
  t.scenario_cfg.max_paths = 2;
  t.scenario_cfg.min_scatterers = 2;
  t.scenario_cfg.max_scatterers = 4;
  t.scenario_cfg.min_subarrays_per_path = 2;
  t.scenario_cfg.max_subarray_fraction = 1.0;

  t.channel_cfg.antennas_per_subarray = 2;

  t.scenario = xlsim::generate_scenario(t.scenario_cfg, xlsim::derive_seed(seed, 101));
  t.geo = xlsim::path_parameters(t.scenario);

  t.grid.interval = 512;
  t.grid.count = 4;
  t.grid.offsets.resize(4);
  t.grid.offsets << -75.0e6, -25.0e6, 25.0e6, 75.0e6;

  t.channel = xlsim::assemble_channel(t.scenario, t.geo, t.channel_cfg, t.grid,
                                      xlsim::derive_seed(seed, 102));

  t.dims.num_users = 4;
  t.dims.num_subarrays = 2;
  t.dims.antennas_per_subarray = 2;
  t.dims.num_symbols = 8;
  t.dims.num_pilots = 4;

  t.pilots = xlsim::design_pilots(4, 4, 8, xlsim::dbm_to_watt(20.0), mode,
                                  xlsim::derive_seed(seed, 103));
  t.combiners = xlsim::design_combiners(2, 2, 8, xlsim::derive_seed(seed, 104));
  for (int p = 0; p < 4; ++p) t.dense.push_back(xlsim::build_sensing_matrix(t.pilots, t.combiners, p));

  const xlsim::StructuredSensing model(t.pilots, t.combiners, t.dims);
  t.ms = xlsim::simulate_measurements(model, t.channel.h, noise_variance,
                                      xlsim::derive_seed(seed, 105));

  t.truth.assign(4, 0);
  for (int k = 0; k < 4; ++k) t.truth[k] = t.scenario.users[k].active ? 1 : 0;
  return t;
}

// 20 users, 3 active, 6 subarrays of 4 antennas, 512 subcarriers, 30 symbols.
inline xlsim::ExperimentConfig scaled_experiment(std::uint64_t seed = 1) {
  xlsim::ExperimentConfig c;
  c.scenario.num_users = 20;
  c.scenario.num_active = 3;
  c.scenario.num_subarrays = 6;
  c.channel.num_subcarriers = 512;
  c.channel.antennas_per_subarray = 4;
  c.g_symbols = 30;
  c.seed = seed;
  return c;
}

// Full-scale reference configuration (60/6 users, 10x8 array, 2048 tones).
inline xlsim::ExperimentConfig fullscale_experiment(std::uint64_t seed = 1) {
  xlsim::ExperimentConfig c;
  c.seed = seed;
  return c;
}

// ---------- reference least squares on materialized matrices ----------

inline CVec reference_ls(const CMat &a, const CVec &b) {
  Eigen::BDCSVD<CMat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  return svd.solve(b);
}

// Mean per-entry residual power of a least-squares fit restricted to the
// element columns `elements` of every dense matrix.
inline double support_residual(const std::vector<CMat> &f, const std::vector<CVec> &y,
                               const std::vector<int> &elements) {
  double acc = 0.0;
  double entries = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p) {
    CVec r = y[p];
    if (!elements.empty()) {
      CMat a(f[p].rows(), static_cast<Eigen::Index>(elements.size()));
      for (std::size_t j = 0; j < elements.size(); ++j) a.col(j) = f[p].col(elements[j]);
      r -= a * reference_ls(a, y[p]);
    }
    acc += r.squaredNorm();
    entries += static_cast<double>(r.size());
  }
  return acc / entries;
}

// Brute-force search over every block support of bounded size; returns the
// support (sorted block indices) with the smallest mean residual power.
// Residuals are clamped to a floor of 1e-12 times the empty-support power so
// that supports which merely shuffle numerical noise count as ties, and ties
// resolve toward the smaller support.
inline std::vector<int> exhaustive_block_support(const std::vector<CMat> &f,
                                                 const std::vector<CVec> &y, int n_blocks,
                                                 int block_len, int max_blocks) {
  const double empty_eps = support_residual(f, y, {});
  const double floor = 1e-12 * empty_eps;
  auto clamp = [&](double eps) { return std::max(eps, floor); };

  std::vector<int> best;
  double best_eps = clamp(empty_eps);

  std::vector<int> combo;
  auto expand = [&](const std::vector<int> &blocks) {
    std::vector<int> elements;
    for (int s : blocks)
      for (int n = 0; n < block_len; ++n) elements.push_back(s * block_len + n);
    return elements;
  };
  std::function<void(int, int)> recurse = [&](int start, int remaining) {
    if (!combo.empty()) {
      const double eps = clamp(support_residual(f, y, expand(combo)));
      const bool better = eps < best_eps * (1.0 - 1e-9);
      const bool tie = !better && eps <= best_eps * (1.0 + 1e-9);
      if (better || (tie && combo.size() < best.size())) {
        best_eps = eps;
        best = combo;
      }
    }
    if (remaining == 0) return;
    for (int s = start; s < n_blocks; ++s) {
      combo.push_back(s);
      recurse(s + 1, remaining - 1);
      combo.pop_back();
    }
  };
  recurse(0, max_blocks);
  std::sort(best.begin(), best.end());
  return best;
}

// ---------- reference subspace spectra (explicit noise basis) ----------

inline CMat noise_subspace(const CMat &cov) {
  Eigen::SelfAdjointEigenSolver<CMat> es(cov);
  return es.eigenvectors().leftCols(cov.rows() - 1); // ascending order
}

inline double dense_music_aoa(const CMat &h_km, double lo, double hi, double step) {
  const int ns = static_cast<int>(h_km.rows());
  const CMat cov = (h_km * h_km.adjoint()) / static_cast<double>(h_km.cols());
  const CMat uz = noise_subspace(cov);
  double best_x = lo, best_v = -1.0;
  for (double theta = lo; theta <= hi + 0.5 * step; theta += step) {
    const double th = std::min(theta, hi);
    CVec e(ns);
    for (int n = 0; n < ns; ++n) e[n] = std::polar(1.0, -xlsim::kPi * n * std::cos(th));
    const double denom = (uz.adjoint() * e).squaredNorm();
    const double v = 1.0 / std::max(denom, 1e-300);
    if (v > best_v) {
      best_v = v;
      best_x = th;
    }
  }
  return best_x;
}

inline double dense_music_delay(const CMat &h_km, const RVec &offsets, double lo, double hi,
                                double step) {
  const int p = static_cast<int>(h_km.cols());
  const CMat cov = (h_km.adjoint() * h_km) / static_cast<double>(h_km.rows());
  const CMat uz = noise_subspace(cov);
  double best_x = lo, best_v = -1.0;
  for (double tau = lo; tau <= hi + 0.5 * step; tau += step) {
    const double t = std::min(tau, hi);
    CVec gconj(p); // conj(g(tau)), so the form is |U_z^H g*|^2
    for (int i = 0; i < p; ++i) gconj[i] = std::polar(1.0, 2.0 * xlsim::kPi * t * offsets[i]);
    const double denom = (uz.adjoint() * gconj).squaredNorm();
    const double v = 1.0 / std::max(denom, 1e-300);
    if (v > best_v) {
      best_v = v;
      best_x = t;
    }
  }
  return best_x;
}

// Rank-one direct-path block: steering vector across antennas, delay
// rotation across pilot tones.
inline CMat los_block(double theta, double tau, const RVec &offsets, int ns, cxd scale) {
  const CVec a = xlsim::steering_vector(theta, ns);
  CVec g(offsets.size());
  for (Eigen::Index i = 0; i < offsets.size(); ++i)
    g[i] = std::polar(1.0, -2.0 * xlsim::kPi * tau * offsets[i]);
  return scale * a * g.transpose();
}

// ---------- exact localization instances ----------

struct WlsInstance {
  std::vector<double> anchor_x, aoa, delay;
  int ref = 0;
  double x = 0.0, y = 0.0;
};

inline WlsInstance make_wls_instance(double x, double y, std::vector<double> anchor_x) {
  WlsInstance w;
  w.x = x;
  w.y = y;
  w.anchor_x = std::move(anchor_x);
  for (double xm : w.anchor_x) {
    w.aoa.push_back(std::atan2(y, xm - x));
    w.delay.push_back(std::hypot(xm - x, y) / xlsim::kSpeedOfLight);
  }
  return w;
}

} // namespace testsupport
