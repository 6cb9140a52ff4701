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
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "types.hpp"

namespace xlsim {

// ---------- anchor selection ----------

// Frobenius norm of each subarray's N_s x P slice of one user's channel.
inline RVec subarray_energy(const CMat &h_user, int num_subarrays, int antennas_per_subarray) {
  if (h_user.rows() != static_cast<Eigen::Index>(num_subarrays) * antennas_per_subarray)
    throw std::invalid_argument("subarray_energy: slice height mismatch.");
  RVec e(num_subarrays);
  for (int m = 0; m < num_subarrays; ++m)
    e[m] = h_user.middleRows(static_cast<Eigen::Index>(m) * antennas_per_subarray,
                             antennas_per_subarray)
               .norm();
  return e;
}

// Subarrays whose min-max normalized energy exceeds phi; these are treated
// as holding a direct-path component strong enough to anchor on. A
// single-survivor outcome is widened with the runner-up so triangulation
// stays possible; an all-equal energy profile falls back to the two largest
// entries (the first two, under ties).
inline std::vector<int> select_los_subarrays(const RVec &energy, double phi) {
  const int m_total = static_cast<int>(energy.size());
  if (m_total < 2)
    throw std::invalid_argument("select_los_subarrays: need at least two subarrays.");
  if (!(phi >= 0.0 && phi < 1.0))
    throw std::invalid_argument("select_los_subarrays: phi must lie in [0, 1).");

  const double lo = energy.minCoeff();
  const double hi = energy.maxCoeff();
  std::vector<int> selected;
  if (hi - lo <= 0.0) {
    selected = {0, 1};
    return selected;
  }
  for (int m = 0; m < m_total; ++m)
    if ((energy[m] - lo) / (hi - lo) > phi) selected.push_back(m);

  if (selected.size() == 1) {
    RVec rest = energy;
    rest[selected[0]] = -std::numeric_limits<double>::infinity();
    int second = 0;
    rest.maxCoeff(&second);
    selected.push_back(second);
    std::sort(selected.begin(), selected.end());
  }
  return selected;
}

// ---------- subspace spectra ----------

struct SubspaceGrids {
  double aoa_coarse_step = deg_to_rad(0.5);
  int delay_coarse_divisions = 4096; // coarse step = tau_max / divisions
  int refine_levels = 2;             // each level shrinks the step by refine_factor
  int refine_factor = 10;
  double flatness_ratio = 3.0;       // coarse peak/median below this -> low confidence

  double aoa_final_step() const {
    return aoa_coarse_step / std::pow(refine_factor, refine_levels);
  }
  double delay_final_step(double tau_max) const {
    return tau_max / delay_coarse_divisions / std::pow(refine_factor, refine_levels);
  }
};

struct SpectrumPeak {
  double value = 0.0;      // argmax location
  double height = 0.0;     // spectrum value at the peak
  bool low_confidence = false;
};

namespace detail {

// Coarse grid scan over (lo, hi] followed by progressively finer local
// scans around the running peak. Also reports the coarse peak-to-median
// height ratio so callers can flag a flat spectrum.
template <class F>
SpectrumPeak hierarchical_peak(F &&spectrum, double lo, double hi, double coarse_step,
                               int levels, int factor, double flatness_ratio) {
  SpectrumPeak out;
  std::vector<double> heights;
  double best_x = lo + coarse_step, best_v = -std::numeric_limits<double>::infinity();
  for (double x = lo + coarse_step; x <= hi + 1e-12 * coarse_step; x += coarse_step) {
    const double v = spectrum(std::min(x, hi));
    heights.push_back(v);
    if (v > best_v) {
      best_v = v;
      best_x = std::min(x, hi);
    }
  }
  if (heights.empty())
    throw std::invalid_argument("hierarchical_peak: empty search range.");

  std::vector<double> sorted = heights;
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  out.low_confidence = !(best_v > flatness_ratio * median);

  double step = coarse_step;
  for (int level = 0; level < levels; ++level) {
    const double fine = step / factor;
    const double wlo = std::max(lo + fine, best_x - step);
    const double whi = std::min(hi, best_x + step);
    for (double x = wlo; x <= whi + 1e-12 * fine; x += fine) {
      const double v = spectrum(std::min(x, hi));
      if (v > best_v) {
        best_v = v;
        best_x = std::min(x, hi);
      }
    }
    step = fine;
  }
  out.value = best_x;
  out.height = best_v;
  return out;
}

// Principal eigenvector of a Hermitian matrix (ascending eigenvalue order).
inline CVec principal_eigenvector(const CMat &r) {
  Eigen::SelfAdjointEigenSolver<CMat> es(r);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("principal_eigenvector: eigendecomposition failed.");
  return es.eigenvectors().col(r.rows() - 1);
}

} // namespace detail

// Angle spectrum of one (user, subarray) channel slice. The sample
// covariance over pilots is decomposed and the spectrum is the inverse
// projection onto the noise subspace; with a one-dimensional signal
// subspace, U_z U_z^H = I - u_s u_s^H, so the denominator reduces to
// N_s - |e(theta)^H u_s|^2.
inline SpectrumPeak music_aoa(const CMat &h_km, const SubspaceGrids &grids = {}) {
  const int ns = static_cast<int>(h_km.rows());
  const int p = static_cast<int>(h_km.cols());
  if (ns < 2 || p < 1)
    throw std::invalid_argument("music_aoa: need at least two antennas and one pilot.");
  if (h_km.norm() == 0.0) {
    SpectrumPeak out;
    out.value = 0.5 * kPi;
    out.low_confidence = true;
    return out;
  }
  const CMat cov = (h_km * h_km.adjoint()) / static_cast<double>(p);
  const CVec us = detail::principal_eigenvector(cov);

  auto spectrum = [&](double theta) {
    const double c = std::cos(theta);
    cxd acc(0.0, 0.0);
    for (int n = 0; n < ns; ++n)
      acc += std::polar(1.0, kPi * n * c) * us[n]; // e(theta)^H u_s
    const double denom = ns - std::norm(acc);
    return 1.0 / std::max(denom, 1e-300);
  };
  return detail::hierarchical_peak(spectrum, 0.0, kPi - 1e-9, grids.aoa_coarse_step,
                                   grids.refine_levels, grids.refine_factor,
                                   grids.flatness_ratio);
}

// Delay spectrum of one (user, subarray) channel slice, searched over
// (0, tau_max]. The covariance is taken across pilots (transposed slice),
// and the probe vector g(tau)_p = exp(-j 2 pi tau f_p) follows the pilot
// offsets f_p. The same one-dimensional signal-subspace reduction applies,
// with the quadratic form g^T U_z U_z^H g^* = P - |g^T u_s|^2.
inline SpectrumPeak music_delay(const CMat &h_km, const RVec &pilot_offsets, double tau_max,
                                const SubspaceGrids &grids = {}) {
  const int ns = static_cast<int>(h_km.rows());
  const int p = static_cast<int>(h_km.cols());
  if (p < 2 || ns < 1)
    throw std::invalid_argument("music_delay: need at least two pilots and one antenna.");
  if (pilot_offsets.size() != p)
    throw std::invalid_argument("music_delay: pilot offset length mismatch.");
  if (tau_max <= 0.0)
    throw std::invalid_argument("music_delay: tau_max must be positive.");
  if (h_km.norm() == 0.0) {
    SpectrumPeak out;
    out.value = 0.5 * tau_max;
    out.low_confidence = true;
    return out;
  }
  const CMat cov = (h_km.adjoint() * h_km) / static_cast<double>(ns);
  const CVec us = detail::principal_eigenvector(cov);

  auto spectrum = [&](double tau) {
    cxd acc(0.0, 0.0);
    for (int i = 0; i < p; ++i)
      acc += std::polar(1.0, -2.0 * kPi * tau * pilot_offsets[i]) * us[i]; // g^T u_s
    const double denom = p - std::norm(acc);
    return 1.0 / std::max(denom, 1e-300);
  };
  const double coarse = tau_max / grids.delay_coarse_divisions;
  return detail::hierarchical_peak(spectrum, 0.0, tau_max, coarse, grids.refine_levels,
                                   grids.refine_factor, grids.flatness_ratio);
}

// ---------- weighted least-squares position fix ----------

struct WlsSolution {
  double x = 0.0, y = 0.0;
  bool ok = false;
};

// Fuses per-anchor angle and delay estimates into a planar position. Each
// anchor contributes a bearing line x + cot(theta_m) y = x_m; each anchor
// other than the reference contributes a range difference
// (1/sin(theta_m) - 1/sin(theta_ref)) y = c (tau_m - tau_ref). Rows are
// weighted by the reciprocal estimated range c tau_m of their anchor.
inline WlsSolution wls_locate(const std::vector<double> &anchor_x,
                              const std::vector<double> &aoa,
                              const std::vector<double> &delay, int ref_index) {
  const int mp = static_cast<int>(anchor_x.size());
  if (mp < 2)
    throw std::invalid_argument("wls_locate: need at least two anchors.");
  if (static_cast<int>(aoa.size()) != mp || static_cast<int>(delay.size()) != mp)
    throw std::invalid_argument("wls_locate: anchor array lengths differ.");
  if (ref_index < 0 || ref_index >= mp)
    throw std::invalid_argument("wls_locate: reference index out of range.");

  const int rows = 2 * mp - 1;
  RMat phi(rows, 2);
  RVec rhs(rows), w(rows);
  int row = 0;
  const double inv_sin_ref = 1.0 / std::sin(aoa[ref_index]);
  for (int i = 0; i < mp; ++i) { // range-difference rows, reference excluded
    if (i == ref_index) continue;
    phi(row, 0) = 0.0;
    phi(row, 1) = 1.0 / std::sin(aoa[i]) - inv_sin_ref;
    rhs[row] = kSpeedOfLight * (delay[i] - delay[ref_index]);
    w[row] = 1.0 / (kSpeedOfLight * delay[i]);
    ++row;
  }
  for (int i = 0; i < mp; ++i) { // bearing-line rows
    phi(row, 0) = 1.0;
    phi(row, 1) = 1.0 / std::tan(aoa[i]);
    rhs[row] = anchor_x[i];
    w[row] = 1.0 / (kSpeedOfLight * delay[i]);
    ++row;
  }

  WlsSolution out;
  if (!phi.allFinite() || !rhs.allFinite() || !w.allFinite()) return out;

  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (int i = 0; i < rows; ++i) {
    a += w[i] * phi.row(i).transpose() * phi.row(i);
    b += w[i] * phi.row(i).transpose() * rhs[i];
  }
  const double det = a.determinant();
  const double scale = a.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-12 * scale * scale)) return out;
  const Eigen::Vector2d xy = a.inverse() * b;
  if (!xy.allFinite()) return out;
  out.x = xy[0];
  out.y = xy[1];
  out.ok = true;
  return out;
}

// ---------- end-to-end localization over an estimated channel ----------

struct UserLocation {
  int user = -1;
  std::vector<int> anchors;       // selected subarrays, ascending
  int ref_anchor = -1;            // strongest anchor, index into `anchors`
  std::vector<double> aoa;        // [rad], per anchor
  std::vector<double> delay;      // [s], per anchor
  double x = 0.0, y = 0.0;
  bool localized = false;
  bool low_confidence = false;    // any anchor produced a flat spectrum
};

struct LocalizationConfig {
  double energy_threshold = 0.3; // phi
  SubspaceGrids grids;
};

// Per detected user: pick anchor subarrays by energy, estimate the angle
// and delay seen by each anchor with the subspace spectra, then fuse with
// the weighted least-squares fix anchored at the strongest subarray.
inline std::vector<UserLocation> mscloc(const CMat &h_hat,
                                        const std::vector<int> &detected_users,
                                        int num_subarrays, int antennas_per_subarray,
                                        const RVec &pilot_offsets, double tau_max,
                                        const std::vector<double> &subarray_x,
                                        const LocalizationConfig &cfg = {}) {
  const int n_bs = num_subarrays * antennas_per_subarray;
  if (static_cast<int>(subarray_x.size()) != num_subarrays)
    throw std::invalid_argument("mscloc: subarray center list length mismatch.");
  if (h_hat.rows() % n_bs != 0)
    throw std::invalid_argument("mscloc: channel height is not a multiple of the array size.");

  std::vector<UserLocation> out;
  out.reserve(detected_users.size());
  for (int k : detected_users) {
    if (k < 0 || static_cast<Eigen::Index>(k + 1) * n_bs > h_hat.rows())
      throw std::invalid_argument("mscloc: detected user index out of range.");
    UserLocation loc;
    loc.user = k;
    const CMat slice = h_hat.middleRows(static_cast<Eigen::Index>(k) * n_bs, n_bs);
    const RVec energy = subarray_energy(slice, num_subarrays, antennas_per_subarray);
    loc.anchors = select_los_subarrays(energy, cfg.energy_threshold);

    double best_energy = -1.0;
    for (std::size_t i = 0; i < loc.anchors.size(); ++i) {
      const int m = loc.anchors[i];
      const CMat block = slice.middleRows(
          static_cast<Eigen::Index>(m) * antennas_per_subarray, antennas_per_subarray);
      const SpectrumPeak a = music_aoa(block, cfg.grids);
      const SpectrumPeak t = music_delay(block, pilot_offsets, tau_max, cfg.grids);
      loc.aoa.push_back(a.value);
      loc.delay.push_back(t.value);
      loc.low_confidence |= a.low_confidence || t.low_confidence;
      if (energy[m] > best_energy) {
        best_energy = energy[m];
        loc.ref_anchor = static_cast<int>(i);
      }
    }

    std::vector<double> ax(loc.anchors.size());
    for (std::size_t i = 0; i < loc.anchors.size(); ++i) ax[i] = subarray_x[loc.anchors[i]];
    const WlsSolution fix = wls_locate(ax, loc.aoa, loc.delay, loc.ref_anchor);
    loc.x = fix.x;
    loc.y = fix.y;
    loc.localized = fix.ok;
    out.push_back(std::move(loc));
  }
  return out;
}

} // namespace xlsim
