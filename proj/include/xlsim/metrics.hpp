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
#include <limits>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace xlsim {

// Activity error probability: fraction of users whose indicator is wrong,
// counting both missed and falsely detected users.
inline double metric_pe(const std::vector<std::uint8_t> &truth,
                        const std::vector<std::uint8_t> &estimate) {
  if (truth.size() != estimate.size() || truth.empty())
    throw std::invalid_argument("metric_pe: indicator lengths must match and be nonzero.");
  int wrong = 0;
  for (std::size_t k = 0; k < truth.size(); ++k)
    wrong += ((truth[k] != 0) != (estimate[k] != 0));
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

// Channel estimation error as a power ratio, pooled over all pilots.
// Returns 0 for an exact estimate; the caller converts to dB if needed.
inline double metric_nmse_ratio(const CMat &h_true, const CMat &h_est) {
  if (h_true.rows() != h_est.rows() || h_true.cols() != h_est.cols())
    throw std::invalid_argument("metric_nmse_ratio: shape mismatch.");
  const double den = h_true.squaredNorm();
  if (den == 0.0)
    throw std::invalid_argument("metric_nmse_ratio: reference channel is identically zero.");
  return (h_true - h_est).squaredNorm() / den;
}

// Same, in decibels; an exact estimate maps to -inf.
inline double metric_nmse_db(const CMat &h_true, const CMat &h_est) {
  const double ratio = metric_nmse_ratio(h_true, h_est);
  if (ratio == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(ratio);
}

// Root-mean-square planar position error of one user.
inline double metric_rmse_xy(double x_est, double y_est, double x_true, double y_true) {
  const double dx = x_est - x_true, dy = y_est - y_true;
  return std::sqrt(0.5 * (dx * dx + dy * dy));
}

} // namespace xlsim
