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
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "frontend.hpp"
#include "types.hpp"

namespace xlsim {

// ---------- least-squares primitive ----------

struct LsSolution {
  CVec x;
  int rank = 0;
  bool rank_deficient = false;
};

// Minimum-norm least squares through a rank-revealing pseudo-inverse;
// singular values below tol * s_max are treated as zero.
inline LsSolution ls_estimate(const CMat &A, const CVec &b, double tol = 1e-10) {
  if (A.rows() != b.size())
    throw std::invalid_argument("ls_estimate: row count of A must match b.");
  LsSolution out;
  if (A.cols() == 0) {
    out.x = CVec();
    return out;
  }
  Eigen::BDCSVD<CMat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(tol);
  out.x = svd.solve(b);
  out.rank = static_cast<int>(svd.rank());
  out.rank_deficient = out.rank < A.cols();
  return out;
}

// Mean per-entry residual power, pooled over all pilots.
inline double residual_mean(const std::vector<CVec> &residuals, int num_symbols,
                            int num_subarrays, int num_pilots) {
  if (static_cast<int>(residuals.size()) != num_pilots)
    throw std::invalid_argument("residual_mean: one residual per pilot required.");
  const Eigen::Index len = static_cast<Eigen::Index>(num_symbols) * num_subarrays;
  double acc = 0.0;
  for (const CVec &r : residuals) {
    if (r.size() != len)
      throw std::invalid_argument("residual_mean: residual length mismatch.");
    acc += r.squaredNorm();
  }
  return acc / (static_cast<double>(len) * num_pilots);
}

// ---------- solver configuration and result ----------

enum class BlockGranularity { kSubarray, kUser };

struct RecoveryConfig {
  // Residual-mean stop level; the genie choice is the per-entry noise power.
  // A non-positive value selects a floor of noiseless_floor_scale times the
  // mean measurement power, for exact-arithmetic style tests.
  double epsilon_threshold = 0.0;
  double noiseless_floor_scale = 1e-12;
  int max_iterations = 0; // 0 -> one per block
  double ls_tolerance = 1e-10;
  BlockGranularity granularity = BlockGranularity::kSubarray;
  bool refine = true;
  bool collect_diagnostics = false; // per-iteration residual/column angles
};

struct RecoveryResult {
  std::vector<int> support_blocks;   // selection order
  std::vector<int> support_elements; // channel indices, selection order
  CMat h_hat;                        // channel_len x P
  std::vector<std::uint8_t> activity; // length K
  std::vector<int> detected_users;    // ascending
  std::vector<double> residual_trace; // per-iteration mean residual power
  double initial_residual_mean = 0.0;
  double final_residual_mean = 0.0;   // after any refinement re-solve
  double epsilon_threshold = 0.0;     // effective stop level
  int iterations = 0;
  bool converged = true;        // false when the iteration cap fired
  bool rank_deficient = false;  // any LS solve saw fewer ranks than columns
  bool refinement_deleted = false;
  bool refinement_added = false;
  std::vector<double> ortho_defect; // per-iteration max |a^H r| / (|a||r|), if collected
};

namespace detail {

// Least-squares re-solve over an explicit column support, shared by the
// greedy loop, its refinement step, and the genie-aided baselines. The
// support is partitioned into the model's row-disjoint column groups and
// each group is solved independently, which is exact because columns of
// different groups touch disjoint measurement rows.
template <class Model>
class SupportSolver {
public:
  SupportSolver(const Model &model, const std::vector<CVec> &y, double ls_tol)
      : model_(model), y_(y), ls_tol_(ls_tol) {
    const Dims &d = model.dims();
    rows_by_group_.resize(model.num_column_groups());
    for (int g = 0; g < model.num_column_groups(); ++g)
      rows_by_group_[g] = model.group_rows(g);
    (void)d;
  }

  struct Outcome {
    double epsilon = 0.0;
    bool rank_deficient = false;
    double ortho_defect = 0.0;
  };

  // Solves min |F_p[:,I] x - y_p| for every pilot, scatters the solution
  // into h_hat (dense, zero outside I), and rewrites residuals in place.
  Outcome solve(const std::vector<int> &elements, CMat &h_hat, std::vector<CVec> &residuals,
                bool want_defect) const {
    const Dims &d = model_.dims();
    Outcome out;
    h_hat.setZero();

    // Partition support indices by column group, preserving order.
    const int n_groups = model_.num_column_groups();
    std::vector<std::vector<int>> elems(n_groups);
    for (int e : elements) elems[model_.column_group(e)].push_back(e);

    for (int p = 0; p < d.num_pilots; ++p) {
      residuals[p] = y_[p];
      for (int g = 0; g < n_groups; ++g) {
        if (elems[g].empty()) continue;
        const CMat A = model_.group_columns(p, g, elems[g]);
        const auto &rows = rows_by_group_[g];
        CVec b(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) b[static_cast<Eigen::Index>(i)] = y_[p][rows[i]];
        LsSolution sol = ls_estimate(A, b, ls_tol_);
        out.rank_deficient |= sol.rank_deficient;
        for (std::size_t j = 0; j < elems[g].size(); ++j)
          h_hat(elems[g][j], p) = sol.x[static_cast<Eigen::Index>(j)];
        const CVec fit = A * sol.x;
        for (std::size_t i = 0; i < rows.size(); ++i)
          residuals[p][rows[i]] = b[static_cast<Eigen::Index>(i)] - fit[static_cast<Eigen::Index>(i)];
      }
      if (want_defect) {
        const double rn = residuals[p].norm();
        // An exact fit leaves only rounding dust in the residual, and a
        // ratio against that dust is noise. Fall back to the data norm.
        const double yn = y_[p].norm();
        const double scale = rn > 1e-12 * yn ? rn : yn;
        if (scale > 0.0) {
          for (int g = 0; g < n_groups; ++g) {
            if (elems[g].empty()) continue;
            const CMat A = model_.group_columns(p, g, elems[g]);
            const auto &rows = rows_by_group_[g];
            CVec rg(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t i = 0; i < rows.size(); ++i)
              rg[static_cast<Eigen::Index>(i)] = residuals[p][rows[i]];
            const CVec corr = A.adjoint() * rg;
            for (Eigen::Index j = 0; j < corr.size(); ++j) {
              const double cn = A.col(j).norm();
              if (cn > 0.0)
                out.ortho_defect = std::max(out.ortho_defect, std::abs(corr[j]) / (cn * scale));
            }
          }
        }
      }
    }
    out.epsilon = residual_mean(residuals, d.num_symbols, d.num_subarrays, d.num_pilots);
    return out;
  }

private:
  const Model &model_;
  const std::vector<CVec> &y_;
  double ls_tol_;
  std::vector<std::vector<int>> rows_by_group_;
};

inline void append_block_elements(int block, int block_len, std::vector<int> &elements) {
  for (int n = 0; n < block_len; ++n) elements.push_back(block * block_len + n);
}

inline bool contains(const std::vector<int> &v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

// Summed correlation magnitude per block, and the index of the largest.
// Ties resolve to the lowest block index.
inline int argmax_block(const RVec &d, int n_blocks, int block_len,
                        int first_block = 0, int last_block = -1) {
  if (last_block < 0) last_block = n_blocks - 1;
  int best = first_block;
  double best_val = -1.0;
  for (int s = first_block; s <= last_block; ++s) {
    const double v = d.segment(static_cast<Eigen::Index>(s) * block_len, block_len).sum();
    if (v > best_val) {
      best_val = v;
      best = s;
    }
  }
  return best;
}

inline std::vector<int> unique_users_of_blocks(const std::vector<int> &blocks, int per_user) {
  std::vector<int> users;
  for (int s : blocks) users.push_back(s / per_user);
  std::sort(users.begin(), users.end());
  users.erase(std::unique(users.begin(), users.end()), users.end());
  return users;
}

} // namespace detail

// ---------- greedy block solver ----------

// Structured block orthogonal matching pursuit. Each iteration picks the
// block with the largest summed correlation across pilots, re-solves the
// support by least squares per pilot, and stops once the mean residual
// power reaches the threshold or stops improving. With subarray granularity
// and refine enabled, a closing step enforces the expectation that a
// genuinely active user occupies more than one subarray: users holding a
// single block are dropped when there are several of them, and when exactly
// one such user remains it is granted its next best block instead.
template <class Model>
RecoveryResult block_greedy_recover(const std::vector<CVec> &y, const Model &model,
                                    RecoveryConfig cfg) {
  const Dims &dims = model.dims();
  if (static_cast<int>(y.size()) != dims.num_pilots)
    throw std::invalid_argument("block_greedy_recover: one measurement per pilot required.");
  for (const CVec &v : y)
    if (v.size() != dims.measurement_len())
      throw std::invalid_argument("block_greedy_recover: measurement length mismatch.");

  const bool subarray_blocks = cfg.granularity == BlockGranularity::kSubarray;
  const int block_len = subarray_blocks ? dims.antennas_per_subarray : dims.antennas_total();
  const int n_blocks = subarray_blocks ? dims.num_blocks() : dims.num_users;
  const int blocks_per_user = subarray_blocks ? dims.num_subarrays : 1;

  RecoveryResult res;
  res.h_hat = CMat::Zero(dims.channel_len(), dims.num_pilots);
  res.activity.assign(dims.num_users, 0);

  std::vector<CVec> r = y;
  res.initial_residual_mean =
      residual_mean(r, dims.num_symbols, dims.num_subarrays, dims.num_pilots);
  const double eps_th = cfg.epsilon_threshold > 0.0
                            ? cfg.epsilon_threshold
                            : cfg.noiseless_floor_scale * res.initial_residual_mean;
  res.epsilon_threshold = eps_th;
  res.final_residual_mean = res.initial_residual_mean;
  if (res.initial_residual_mean <= eps_th) return res; // nothing above the floor

  const int max_iter = cfg.max_iterations > 0 ? std::min(cfg.max_iterations, n_blocks)
                                              : n_blocks;
  detail::SupportSolver<Model> solver(model, y, cfg.ls_tolerance);

  double eps_prev = 0.0;
  double eps_cur = res.initial_residual_mean;
  RVec d = RVec::Zero(dims.channel_len());
  for (int i = 1;; ++i) {
    d.setZero();
    for (int p = 0; p < dims.num_pilots; ++p)
      d += model.correlate(p, r[p]).cwiseAbs();

    const int s_star = detail::argmax_block(d, n_blocks, block_len);
    if (!detail::contains(res.support_blocks, s_star)) {
      res.support_blocks.push_back(s_star);
      detail::append_block_elements(s_star, block_len, res.support_elements);
    }

    const auto outcome = solver.solve(res.support_elements, res.h_hat, r,
                                      cfg.collect_diagnostics);
    res.rank_deficient |= outcome.rank_deficient;
    if (cfg.collect_diagnostics) res.ortho_defect.push_back(outcome.ortho_defect);
    eps_prev = eps_cur;
    eps_cur = outcome.epsilon;
    res.residual_trace.push_back(eps_cur);
    res.iterations = i;

    if (eps_cur <= eps_th) break;
    if (i >= 2 && eps_prev <= eps_cur) break; // residual stopped improving
    if (i >= max_iter) {
      res.converged = false;
      break;
    }
  }
  res.final_residual_mean = eps_cur;

  if (subarray_blocks && cfg.refine && !res.support_blocks.empty()) {
    auto users = detail::unique_users_of_blocks(res.support_blocks, blocks_per_user);
    std::vector<int> single; // users holding exactly one block
    for (int u : users) {
      int cnt = 0;
      for (int s : res.support_blocks) cnt += (s / blocks_per_user == u);
      if (cnt == 1) single.push_back(u);
    }

    if (single.size() > 1) {
      // Several one-block users: treat them as false alarms and drop them.
      std::vector<int> keep;
      for (int s : res.support_blocks)
        if (!detail::contains(single, s / blocks_per_user)) keep.push_back(s);
      res.support_blocks = keep;
      res.support_elements.clear();
      for (int s : res.support_blocks)
        detail::append_block_elements(s, block_len, res.support_elements);
      res.refinement_deleted = true;

      if (res.support_elements.empty()) {
        res.h_hat.setZero();
        r = y;
        res.final_residual_mean = res.initial_residual_mean;
      } else {
        const auto outcome = solver.solve(res.support_elements, res.h_hat, r, false);
        res.rank_deficient |= outcome.rank_deficient;
        res.final_residual_mean = outcome.epsilon;
      }
    } else if (single.size() == 1) {
      // Exactly one: assume a missed block and give the user its next
      // strongest subarray, re-ranking the last correlation vector over the
      // blocks the user does not hold yet.
      const int u = single.front();
      int s2 = -1;
      double s2_val = -1.0;
      for (int s = u * blocks_per_user; s < (u + 1) * blocks_per_user; ++s) {
        if (detail::contains(res.support_blocks, s)) continue;
        const double v = d.segment(static_cast<Eigen::Index>(s) * block_len, block_len).sum();
        if (v > s2_val) {
          s2_val = v;
          s2 = s;
        }
      }
      if (s2 >= 0) {
        res.support_blocks.push_back(s2);
        detail::append_block_elements(s2, block_len, res.support_elements);
        const auto outcome = solver.solve(res.support_elements, res.h_hat, r, false);
        res.rank_deficient |= outcome.rank_deficient;
        res.final_residual_mean = outcome.epsilon;
        res.refinement_added = true;
      }
    }
  }

  res.detected_users = detail::unique_users_of_blocks(res.support_blocks, blocks_per_user);
  for (int u : res.detected_users) res.activity[u] = 1;
  return res;
}

// Subarray-level greedy pursuit with the structure-aware refinement.
template <class Model>
RecoveryResult strbomp(const std::vector<CVec> &y, const Model &model, RecoveryConfig cfg = {}) {
  cfg.granularity = BlockGranularity::kSubarray;
  cfg.refine = true;
  return block_greedy_recover(y, model, cfg);
}

// Subarray-level greedy pursuit without the refinement step.
template <class Model>
RecoveryResult bomp_sa(const std::vector<CVec> &y, const Model &model, RecoveryConfig cfg = {}) {
  cfg.granularity = BlockGranularity::kSubarray;
  cfg.refine = false;
  return block_greedy_recover(y, model, cfg);
}

// User-level greedy pursuit; each block spans a user's whole array response.
template <class Model>
RecoveryResult bomp(const std::vector<CVec> &y, const Model &model, RecoveryConfig cfg = {}) {
  cfg.granularity = BlockGranularity::kUser;
  cfg.refine = false;
  return block_greedy_recover(y, model, cfg);
}

namespace detail {

template <class Model>
RecoveryResult genie_solve(const std::vector<CVec> &y, const Model &model,
                           const std::vector<int> &blocks, int block_len,
                           const std::vector<std::uint8_t> &activity,
                           const RecoveryConfig &cfg) {
  const Dims &dims = model.dims();
  RecoveryResult res;
  res.h_hat = CMat::Zero(dims.channel_len(), dims.num_pilots);
  res.activity = activity;
  for (int k = 0; k < dims.num_users; ++k)
    if (activity[k]) res.detected_users.push_back(k);

  std::vector<CVec> r = y;
  res.initial_residual_mean =
      residual_mean(r, dims.num_symbols, dims.num_subarrays, dims.num_pilots);
  res.epsilon_threshold = cfg.epsilon_threshold;
  res.support_blocks = blocks;
  for (int s : blocks) append_block_elements(s, block_len, res.support_elements);

  if (static_cast<int>(res.support_elements.size()) > dims.measurement_len())
    res.rank_deficient = true; // more unknowns than combined measurements

  if (res.support_elements.empty()) {
    res.final_residual_mean = res.initial_residual_mean;
    return res;
  }
  SupportSolver<Model> solver(model, y, cfg.ls_tolerance);
  const auto outcome = solver.solve(res.support_elements, res.h_hat, r, cfg.collect_diagnostics);
  res.rank_deficient |= outcome.rank_deficient;
  if (cfg.collect_diagnostics) res.ortho_defect.push_back(outcome.ortho_defect);
  res.residual_trace.push_back(outcome.epsilon);
  res.final_residual_mean = outcome.epsilon;
  res.iterations = 1;
  return res;
}

} // namespace detail

// Genie-aided bound: least squares over every antenna of the truly active
// users. The activity estimate is the truth by construction.
template <class Model>
RecoveryResult oracle_ls(const std::vector<CVec> &y, const Model &model,
                         const std::vector<std::uint8_t> &true_activity,
                         RecoveryConfig cfg = {}) {
  const Dims &dims = model.dims();
  if (static_cast<int>(true_activity.size()) != dims.num_users)
    throw std::invalid_argument("oracle_ls: activity length mismatch.");
  std::vector<int> blocks;
  for (int k = 0; k < dims.num_users; ++k)
    if (true_activity[k]) blocks.push_back(k);
  return detail::genie_solve(y, model, blocks, dims.antennas_total(), true_activity, cfg);
}

// Genie-aided bound that additionally knows which subarrays each active
// user reaches; least squares runs over those blocks only.
template <class Model>
RecoveryResult oracle_ls_sa(const std::vector<CVec> &y, const Model &model,
                            const std::vector<std::uint8_t> &true_activity,
                            const std::vector<std::vector<std::uint8_t>> &subarray_activity,
                            RecoveryConfig cfg = {}) {
  const Dims &dims = model.dims();
  if (static_cast<int>(true_activity.size()) != dims.num_users ||
      static_cast<int>(subarray_activity.size()) != dims.num_users)
    throw std::invalid_argument("oracle_ls_sa: activity shape mismatch.");
  std::vector<int> blocks;
  for (int k = 0; k < dims.num_users; ++k) {
    if (!true_activity[k]) continue;
    if (static_cast<int>(subarray_activity[k].size()) != dims.num_subarrays)
      throw std::invalid_argument("oracle_ls_sa: subarray mask length mismatch.");
    for (int m = 0; m < dims.num_subarrays; ++m)
      if (subarray_activity[k][m]) blocks.push_back(dims.block_of(k, m));
  }
  return detail::genie_solve(y, model, blocks, dims.antennas_per_subarray, true_activity, cfg);
}

} // namespace xlsim
