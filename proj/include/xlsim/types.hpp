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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

namespace xlsim {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using IVec = Eigen::VectorXi;

inline constexpr double kPi = 3.14159265358979323846;

// Propagation speed used for all delay/distance conversions [m/s].
inline constexpr double kSpeedOfLight = 3.0e8;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// dBm -> watt and back.
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Problem dimensions shared by the measurement model and the solvers.
// The aggregate channel vector stacks K users times M subarrays times
// N_s antennas; measurements stack G symbols times M combined streams.
struct Dims {
  int num_users = 0;             // K
  int num_subarrays = 0;         // M
  int antennas_per_subarray = 0; // N_s
  int num_symbols = 0;           // G
  int num_pilots = 0;            // P

  int antennas_total() const { return num_subarrays * antennas_per_subarray; }
  int channel_len() const { return num_users * antennas_total(); }
  int measurement_len() const { return num_symbols * num_subarrays; }
  int num_blocks() const { return num_users * num_subarrays; }

  // Subarray-level block indexing: block s (0-based) covers user
  // s / M, subarray s % M, i.e. user-major ordering.
  int block_user(int s) const { return s / num_subarrays; }
  int block_subarray(int s) const { return s % num_subarrays; }
  int block_of(int user, int subarray) const { return user * num_subarrays + subarray; }
  int block_offset(int s) const {
    return block_user(s) * antennas_total() + block_subarray(s) * antennas_per_subarray;
  }

  void validate() const {
    if (num_users < 1 || num_subarrays < 1 || antennas_per_subarray < 1 ||
        num_symbols < 1 || num_pilots < 1)
      throw std::invalid_argument("Dims: all dimensions must be positive.");
  }
};

} // namespace xlsim
