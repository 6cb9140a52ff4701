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
#include <stdexcept>
#include <vector>

#include "channel.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace xlsim {

enum class PilotMode { kMmv, kGmmv };

inline const char *pilot_mode_name(PilotMode m) {
  return m == PilotMode::kMmv ? "mmv" : "gmmv";
}

// ---------- pilot symbols ----------

// Per-symbol pilot matrix: symbols[g](k, p) is the tone transmitted by user
// k on pilot p during symbol g. Entries have modulus sqrt(power_watt) and a
// uniform random phase. In the narrowband variant (kMmv) the phase is shared
// by all pilots of a (user, symbol) pair; the wideband variant (kGmmv) draws
// an independent phase per (user, pilot, symbol).
struct PilotBook {
  std::vector<CMat> symbols;
  PilotMode mode = PilotMode::kGmmv;
  double power_watt = 0.0;

  int num_symbols() const { return static_cast<int>(symbols.size()); }
};

inline PilotBook design_pilots(int num_users, int num_pilots, int num_symbols,
                               double power_watt, PilotMode mode, std::uint64_t seed) {
  if (num_users < 1 || num_pilots < 1 || num_symbols < 1)
    throw std::invalid_argument("design_pilots: dimensions must be positive.");
  if (power_watt <= 0.0)
    throw std::invalid_argument("design_pilots: power_watt must be positive.");

  PilotBook book;
  book.mode = mode;
  book.power_watt = power_watt;
  book.symbols.resize(num_symbols);
  const double amp = std::sqrt(power_watt);

  Rng rng(seed);
  for (int g = 0; g < num_symbols; ++g) {
    CMat &s = book.symbols[g];
    s.resize(num_users, num_pilots);
    for (int k = 0; k < num_users; ++k) {
      if (mode == PilotMode::kMmv) {
        const cxd v = amp * rng.unit_phase();
        for (int p = 0; p < num_pilots; ++p) s(k, p) = v;
      } else {
        for (int p = 0; p < num_pilots; ++p) s(k, p) = amp * rng.unit_phase();
      }
    }
  }
  return book;
}

// ---------- analog combiners ----------

// weights[g] is N_s x M; column m holds the phase-shifter weights of
// subarray m during symbol g, each entry of modulus 1/sqrt(N_s). The
// corresponding full combiner is block-diagonal, one column per subarray,
// and satisfies W^H W = I_M. A baseband stage is kept as a hook and stays
// the identity; the structured operators below rely on that.
struct CombinerSet {
  std::vector<CMat> weights;
  CMat baseband; // M x M, identity unless explicitly replaced

  int num_symbols() const { return static_cast<int>(weights.size()); }
  int antennas_per_subarray() const {
    return weights.empty() ? 0 : static_cast<int>(weights.front().rows());
  }
  int num_subarrays() const {
    return weights.empty() ? 0 : static_cast<int>(weights.front().cols());
  }

  bool baseband_is_identity() const {
    if (baseband.size() == 0) return true;
    return baseband.isIdentity(0.0);
  }

  // Dense N_BS x M block-diagonal combiner of one symbol.
  CMat full(int g) const {
    const CMat &w = weights.at(g);
    const int ns = static_cast<int>(w.rows());
    const int m_total = static_cast<int>(w.cols());
    CMat W = CMat::Zero(static_cast<Eigen::Index>(ns) * m_total, m_total);
    for (int m = 0; m < m_total; ++m)
      W.block(static_cast<Eigen::Index>(m) * ns, m, ns, 1) = w.col(m);
    if (baseband.size() != 0) return W * baseband;
    return W;
  }
};

inline CombinerSet design_combiners(int num_subarrays, int antennas_per_subarray,
                                    int num_symbols, std::uint64_t seed) {
  if (num_subarrays < 1 || antennas_per_subarray < 1 || num_symbols < 1)
    throw std::invalid_argument("design_combiners: dimensions must be positive.");
  CombinerSet set;
  set.weights.resize(num_symbols);
  const double amp = 1.0 / std::sqrt(static_cast<double>(antennas_per_subarray));
  Rng rng(seed);
  for (int g = 0; g < num_symbols; ++g) {
    CMat &w = set.weights[g];
    w.resize(antennas_per_subarray, num_subarrays);
    for (int m = 0; m < num_subarrays; ++m)
      for (int n = 0; n < antennas_per_subarray; ++n)
        w(n, m) = amp * rng.unit_phase();
  }
  return set;
}

// ---------- sensing operators ----------

// Dense sensing matrix of pilot p: G*M rows (symbol-major, M combined
// streams per symbol), K*N_BS columns. Row block g equals
// (row of pilot tones)  kron  (combiner adjoint).
inline CMat build_sensing_matrix(const PilotBook &pilots, const CombinerSet &combiners, int p) {
  const int G = pilots.num_symbols();
  if (G == 0 || combiners.num_symbols() != G)
    throw std::invalid_argument("build_sensing_matrix: pilot and combiner symbol counts differ.");
  const int K = static_cast<int>(pilots.symbols.front().rows());
  const int M = combiners.num_subarrays();
  const int Ns = combiners.antennas_per_subarray();
  const int n_bs = M * Ns;

  CMat F = CMat::Zero(static_cast<Eigen::Index>(G) * M, static_cast<Eigen::Index>(K) * n_bs);
  for (int g = 0; g < G; ++g) {
    const CMat Wh = combiners.full(g).adjoint(); // M x N_BS
    for (int k = 0; k < K; ++k)
      F.block(static_cast<Eigen::Index>(g) * M, static_cast<Eigen::Index>(k) * n_bs, M, n_bs) =
          pilots.symbols[g](k, p) * Wh;
  }
  return F;
}

// Matrix-free view of the sensing matrices {F_p}. Exploits two structural
// facts: F_p is a stack of Kronecker products, and the combiner is
// block-diagonal, so each channel entry (user k, subarray m, antenna n) is
// observed only through measurement rows {g*M + m}. Column-group helpers
// expose that row-disjointness; least-squares solves over any column subset
// then split into independent per-subarray problems.
class StructuredSensing {
public:
  StructuredSensing(const PilotBook &pilots, const CombinerSet &combiners, Dims dims)
      : pilots_(&pilots), combiners_(&combiners), dims_(dims) {
    dims_.validate();
    if (pilots.num_symbols() != dims_.num_symbols ||
        combiners.num_symbols() != dims_.num_symbols)
      throw std::invalid_argument("StructuredSensing: symbol count mismatch.");
    if (static_cast<int>(pilots.symbols.front().rows()) != dims_.num_users ||
        static_cast<int>(pilots.symbols.front().cols()) != dims_.num_pilots)
      throw std::invalid_argument("StructuredSensing: pilot book shape mismatch.");
    if (combiners.num_subarrays() != dims_.num_subarrays ||
        combiners.antennas_per_subarray() != dims_.antennas_per_subarray)
      throw std::invalid_argument("StructuredSensing: combiner shape mismatch.");
    if (!combiners.baseband_is_identity())
      throw std::invalid_argument("StructuredSensing: only an identity baseband stage is supported.");
  }

  const Dims &dims() const { return dims_; }

  // y_p = F_p h for a full channel vector h of length K*N_BS.
  CVec apply(int p, const CVec &h) const {
    const int G = dims_.num_symbols, M = dims_.num_subarrays;
    const int K = dims_.num_users, Ns = dims_.antennas_per_subarray;
    const int n_bs = M * Ns;
    if (h.size() != static_cast<Eigen::Index>(K) * n_bs)
      throw std::invalid_argument("StructuredSensing::apply: channel length mismatch.");
    CVec y(static_cast<Eigen::Index>(G) * M);
    CVec mixed(n_bs);
    for (int g = 0; g < G; ++g) {
      mixed.setZero();
      for (int k = 0; k < K; ++k)
        mixed += pilots_->symbols[g](k, p) * h.segment(static_cast<Eigen::Index>(k) * n_bs, n_bs);
      const CMat &w = combiners_->weights[g];
      for (int m = 0; m < M; ++m)
        y[static_cast<Eigen::Index>(g) * M + m] =
            w.col(m).dot(mixed.segment(static_cast<Eigen::Index>(m) * Ns, Ns));
    }
    return y;
  }

  // F_p^H r for a measurement-domain vector r of length G*M.
  CVec correlate(int p, const CVec &r) const {
    const int G = dims_.num_symbols, M = dims_.num_subarrays;
    const int K = dims_.num_users, Ns = dims_.antennas_per_subarray;
    const int n_bs = M * Ns;
    if (r.size() != static_cast<Eigen::Index>(G) * M)
      throw std::invalid_argument("StructuredSensing::correlate: measurement length mismatch.");
    CVec d = CVec::Zero(static_cast<Eigen::Index>(K) * n_bs);
    CVec lifted(n_bs);
    for (int g = 0; g < G; ++g) {
      const CMat &w = combiners_->weights[g];
      for (int m = 0; m < M; ++m)
        lifted.segment(static_cast<Eigen::Index>(m) * Ns, Ns) =
            w.col(m) * r[static_cast<Eigen::Index>(g) * M + m];
      for (int k = 0; k < K; ++k)
        d.segment(static_cast<Eigen::Index>(k) * n_bs, n_bs) +=
            std::conj(pilots_->symbols[g](k, p)) * lifted;
    }
    return d;
  }

  // Row-disjoint column groups: channel element e belongs to the group of
  // its subarray.
  int num_column_groups() const { return dims_.num_subarrays; }
  int column_group(int element) const {
    const int n_bs = dims_.antennas_total();
    return (element % n_bs) / dims_.antennas_per_subarray;
  }
  // Global measurement rows owned by group m, ascending.
  std::vector<int> group_rows(int m) const {
    std::vector<int> rows(dims_.num_symbols);
    for (int g = 0; g < dims_.num_symbols; ++g) rows[g] = g * dims_.num_subarrays + m;
    return rows;
  }

  // Compact per-group design matrix: rows follow group_rows(m), columns
  // follow `elements` (all of which must belong to group m).
  CMat group_columns(int p, int m, const std::vector<int> &elements) const {
    const int G = dims_.num_symbols, Ns = dims_.antennas_per_subarray;
    const int n_bs = dims_.antennas_total();
    CMat A(G, static_cast<Eigen::Index>(elements.size()));
    for (std::size_t j = 0; j < elements.size(); ++j) {
      const int e = elements[j];
      const int k = e / n_bs;
      const int n = e % Ns;
      if (column_group(e) != m)
        throw std::invalid_argument("StructuredSensing::group_columns: element outside group.");
      for (int g = 0; g < G; ++g)
        A(g, j) = pilots_->symbols[g](k, p) * std::conj(combiners_->weights[g](n, m));
    }
    return A;
  }

  // Dense column subset of F_p, for cross-checks and small problems.
  CMat materialize_columns(int p, const std::vector<int> &elements) const {
    const int G = dims_.num_symbols, M = dims_.num_subarrays;
    CMat F = CMat::Zero(static_cast<Eigen::Index>(G) * M, static_cast<Eigen::Index>(elements.size()));
    for (std::size_t j = 0; j < elements.size(); ++j) {
      const int m = column_group(elements[j]);
      const CMat col = group_columns(p, m, {elements[j]});
      for (int g = 0; g < G; ++g) F(static_cast<Eigen::Index>(g) * M + m, j) = col(g, 0);
    }
    return F;
  }

private:
  const PilotBook *pilots_;
  const CombinerSet *combiners_;
  Dims dims_;
};

// Same interface over explicitly stored matrices {F_p}; no structural
// assumptions, a single column group covering every row.
class DenseSensing {
public:
  DenseSensing(std::vector<CMat> matrices, Dims dims)
      : f_(std::move(matrices)), dims_(dims) {
    dims_.validate();
    if (static_cast<int>(f_.size()) != dims_.num_pilots)
      throw std::invalid_argument("DenseSensing: one matrix per pilot required.");
    for (const auto &m : f_)
      if (m.rows() != dims_.measurement_len() || m.cols() != dims_.channel_len())
        throw std::invalid_argument("DenseSensing: matrix shape mismatch.");
  }

  const Dims &dims() const { return dims_; }
  const CMat &matrix(int p) const { return f_.at(p); }

  CVec apply(int p, const CVec &h) const { return f_.at(p) * h; }
  CVec correlate(int p, const CVec &r) const { return f_.at(p).adjoint() * r; }

  int num_column_groups() const { return 1; }
  int column_group(int) const { return 0; }
  std::vector<int> group_rows(int) const {
    std::vector<int> rows(dims_.measurement_len());
    for (int i = 0; i < dims_.measurement_len(); ++i) rows[i] = i;
    return rows;
  }
  CMat group_columns(int p, int, const std::vector<int> &elements) const {
    return materialize_columns(p, elements);
  }
  CMat materialize_columns(int p, const std::vector<int> &elements) const {
    const CMat &F = f_.at(p);
    CMat A(F.rows(), static_cast<Eigen::Index>(elements.size()));
    for (std::size_t j = 0; j < elements.size(); ++j) A.col(j) = F.col(elements[j]);
    return A;
  }

private:
  std::vector<CMat> f_;
  Dims dims_;
};

// ---------- noise and measurement synthesis ----------

// Thermal noise power over the sampled bandwidth, in watt.
inline double noise_power(double sample_rate, double density_dbm_hz) {
  if (sample_rate <= 0.0)
    throw std::invalid_argument("noise_power: sample_rate must be positive.");
  return dbm_to_watt(density_dbm_hz + 10.0 * std::log10(sample_rate));
}

struct MeasurementSet {
  std::vector<CVec> y;    // [p], each of length G*M
  double noise_variance = 0.0;
  Dims dims;
  std::uint64_t noise_seed = 0;
};

// y_p = F_p h_p + n_p with n_p drawn i.i.d. CN(0, noise_variance) in the
// combined domain; the combiner's semi-unitarity keeps that equivalent to
// combining white antenna-domain noise.
template <class Model>
MeasurementSet simulate_measurements(const Model &model, const CMat &h,
                                     double noise_variance, std::uint64_t seed) {
  const Dims &dims = model.dims();
  if (h.rows() != dims.channel_len() || h.cols() != dims.num_pilots)
    throw std::invalid_argument("simulate_measurements: channel tensor shape mismatch.");
  if (noise_variance < 0.0)
    throw std::invalid_argument("simulate_measurements: noise_variance must be >= 0.");

  MeasurementSet ms;
  ms.dims = dims;
  ms.noise_variance = noise_variance;
  ms.noise_seed = seed;
  ms.y.resize(dims.num_pilots);
  Rng rng(seed);
  const double amp = std::sqrt(noise_variance);
  for (int p = 0; p < dims.num_pilots; ++p) {
    ms.y[p] = model.apply(p, h.col(p));
    if (noise_variance > 0.0)
      for (Eigen::Index i = 0; i < ms.y[p].size(); ++i)
        ms.y[p][i] += amp * rng.complex_normal();
  }
  return ms;
}

} // namespace xlsim
