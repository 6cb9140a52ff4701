// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include <xlsim/channel.hpp>
#include <xlsim/localization.hpp>
#include <xlsim/metrics.hpp>

#include "support.hpp"

using Catch::Approx;
using namespace xlsim;

namespace {

PilotGrid reference_grid() {
  ScenarioConfig sc; // 10 subarrays, 5 m apart
  return pilot_grid(200.0e6, 2048, 2.0 * sc.array_span() / kSpeedOfLight);
}

constexpr double kTauMaxRef = 50.0 * 2.0 / 3.0e8; // 333.33 ns
constexpr double kAoaStep = 8.726646259971648e-05; // 0.005 deg, after two refinements
constexpr double kDelayStep = 8.138020833333334e-13; // tau_max / 409600

} // namespace

TEST_CASE("subarray energy is the per-block frobenius norm", "[localization]") {
  CMat h(4, 1);
  h << cxd(1.0, 0.0), cxd(2.0, 0.0), cxd(0.0, 0.0), cxd(0.0, 0.0);
  const RVec e = subarray_energy(h, 2, 2);
  REQUIRE(e.size() == 2);
  CHECK(e[0] == Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(e[1] == 0.0);
  CHECK_THROWS_AS(subarray_energy(h, 3, 2), std::invalid_argument);
}

TEST_CASE("anchor selection thresholds normalized energies", "[localization]") {
  RVec e(4);
  e << 10.0, 9.0, 0.1, 0.1;
  CHECK(select_los_subarrays(e, 0.3) == std::vector<int>{0, 1});

  e << 10.0, 0.1, 0.1, 0.1; // single survivor widened with the runner-up
  CHECK(select_los_subarrays(e, 0.3) == std::vector<int>{0, 1});

  e << 2.0, 2.0, 2.0, 2.0; // flat profile falls back to the first two
  CHECK(select_los_subarrays(e, 0.3) == std::vector<int>{0, 1});

  e << 0.1, 10.0, 0.1, 0.1; // widening keeps the result sorted
  CHECK(select_los_subarrays(e, 0.3) == std::vector<int>{0, 1});

  CHECK_THROWS_AS(select_los_subarrays(e, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(select_los_subarrays(e, -0.1), std::invalid_argument);
  RVec tiny(1);
  tiny << 1.0;
  CHECK_THROWS_AS(select_los_subarrays(tiny, 0.3), std::invalid_argument);
}

TEST_CASE("hierarchical search refines to the fine grid", "[localization]") {
  auto parabola = [](double x) { return -(x - 0.37) * (x - 0.37); };
  const SpectrumPeak p = detail::hierarchical_peak(parabola, 0.0, 1.0, 0.1, 2, 10, 3.0);
  CHECK(std::abs(p.value - 0.37) <= 1e-3 + 1e-12);

  auto rising = [](double x) { return x; };
  const SpectrumPeak edge = detail::hierarchical_peak(rising, 0.0, 1.0, 0.1, 2, 10, 3.0);
  CHECK(edge.value == Approx(1.0).margin(2e-3));

  auto flat = [](double) { return 1.0; };
  CHECK(detail::hierarchical_peak(flat, 0.0, 1.0, 0.1, 2, 10, 3.0).low_confidence);

  auto spiky = [](double x) { return std::abs(x - 0.5) < 0.01 ? 1.0 : 0.0; };
  CHECK_FALSE(detail::hierarchical_peak(spiky, 0.0, 1.0, 0.005, 0, 10, 3.0).low_confidence);
}

TEST_CASE("angle spectrum peaks at the direct-path bearing", "[localization]") {
  const PilotGrid grid = reference_grid();
  const double theta = 1.3141;
  const CMat block = testsupport::los_block(theta, 120.0e-9, grid.offsets, 8, cxd(0.7, -0.2));

  const SpectrumPeak p = music_aoa(block);
  CHECK(std::abs(p.value - theta) <= deg_to_rad(0.005) + kAoaStep);
  CHECK_FALSE(p.low_confidence);

  // Scale invariance: powers of two (real or imaginary) keep every
  // floating-point intermediate exactly proportional.
  CHECK(music_aoa(block * 2.0).value == p.value);
  CHECK(music_aoa(block * cxd(0.0, 2.0)).value == p.value);
}

TEST_CASE("delay spectrum peaks at the direct-path delay", "[localization]") {
  const PilotGrid grid = reference_grid();
  const double tau = 120.0e-9;
  const CMat block = testsupport::los_block(1.1, tau, grid.offsets, 8, cxd(1.0, 0.4));

  const SpectrumPeak p = music_delay(block, grid.offsets, kTauMaxRef);
  CHECK(std::abs(p.value - tau) <= 5.0e-12 + kDelayStep);
  CHECK_FALSE(p.low_confidence);

  CHECK(music_delay(block * 2.0, grid.offsets, kTauMaxRef).value == p.value);
}

TEST_CASE("delay outside the unambiguous span folds onto its alias", "[localization]") {
  const PilotGrid grid = reference_grid();
  // Grid period 2048 / (31 * 200 MHz) = 330.32 ns; 340 ns aliases into range.
  const double tau_alias = 340.0e-9;
  const double folded = tau_alias - 2048.0 / (31.0 * 200.0e6);
  const CMat block = testsupport::los_block(1.2, tau_alias, grid.offsets, 8, cxd(1.0, 0.0));
  const SpectrumPeak p = music_delay(block, grid.offsets, kTauMaxRef);
  CHECK(std::abs(p.value - folded) <= 5.0e-12 + kDelayStep);
}

TEST_CASE("flat spectra are flagged as low confidence", "[localization]") {
  const CMat zero = CMat::Zero(4, 6);
  RVec offsets(6);
  offsets << -5.0e6, -3.0e6, -1.0e6, 1.0e6, 3.0e6, 5.0e6;
  const SpectrumPeak a = music_aoa(zero);
  CHECK(a.low_confidence);
  CHECK(a.value == Approx(0.5 * kPi));
  const SpectrumPeak t = music_delay(zero, offsets, 1.0e-7);
  CHECK(t.low_confidence);
  CHECK(t.value == Approx(0.5e-7));

  // A white (identity) slice has no preferred direction either.
  const CMat white = CMat::Identity(2, 2);
  RVec two(2);
  two << -1.0e6, 1.0e6;
  CHECK(music_aoa(white).low_confidence);
  CHECK(music_delay(white, two, 1.0e-7).low_confidence);
}

TEST_CASE("spectrum input guards", "[localization]") {
  RVec offsets(3);
  offsets << -1.0e6, 0.0, 1.0e6;
  CHECK_THROWS_AS(music_aoa(CMat::Ones(1, 3)), std::invalid_argument);
  CHECK_THROWS_AS(music_delay(CMat::Ones(2, 1), offsets.head(1), 1e-7), std::invalid_argument);
  CHECK_THROWS_AS(music_delay(CMat::Ones(2, 2), offsets, 1e-7), std::invalid_argument);
  CHECK_THROWS_AS(music_delay(CMat::Ones(2, 3), offsets, 0.0), std::invalid_argument);
}

TEST_CASE("position fix is exact for exact angle and delay inputs", "[localization]") {
  const testsupport::WlsInstance w = testsupport::make_wls_instance(12.0, 7.5, {5.0, 25.0, 45.0});
  const WlsSolution fix = wls_locate(w.anchor_x, w.aoa, w.delay, 0);
  REQUIRE(fix.ok);
  CHECK(std::abs(fix.x - 12.0) < 1e-9);
  CHECK(std::abs(fix.y - 7.5) < 1e-9);

  // Two anchors are the minimum viable geometry.
  const testsupport::WlsInstance w2 = testsupport::make_wls_instance(30.0, 14.0, {10.0, 40.0});
  const WlsSolution fix2 = wls_locate(w2.anchor_x, w2.aoa, w2.delay, 1);
  REQUIRE(fix2.ok);
  CHECK(std::abs(fix2.x - 30.0) < 1e-9);
  CHECK(std::abs(fix2.y - 14.0) < 1e-9);
}

TEST_CASE("range weighting tempers a corrupted far anchor", "[localization]") {
  testsupport::WlsInstance w = testsupport::make_wls_instance(12.0, 7.5, {5.0, 25.0, 45.0});
  w.aoa[2] += deg_to_rad(0.1); // farthest anchor carries the angle error

  const WlsSolution weighted = wls_locate(w.anchor_x, w.aoa, w.delay, 0);
  REQUIRE(weighted.ok);

  // Unit-weight reference assembled with the same row layout.
  const int mp = 3, ref = 0;
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  auto add_row = [&](double c0, double c1, double rhs) {
    Eigen::Vector2d row(c0, c1);
    a += row * row.transpose();
    b += row * rhs;
  };
  for (int i = 0; i < mp; ++i) {
    if (i == ref) continue;
    add_row(0.0, 1.0 / std::sin(w.aoa[i]) - 1.0 / std::sin(w.aoa[ref]),
            kSpeedOfLight * (w.delay[i] - w.delay[ref]));
  }
  for (int i = 0; i < mp; ++i) add_row(1.0, 1.0 / std::tan(w.aoa[i]), w.anchor_x[i]);
  const Eigen::Vector2d xy = a.inverse() * b;

  const double err_w = std::hypot(weighted.x - 12.0, weighted.y - 7.5);
  const double err_u = std::hypot(xy[0] - 12.0, xy[1] - 7.5);
  CHECK(err_w <= err_u + 1e-12);
}

TEST_CASE("degenerate fix geometries are rejected", "[localization]") {
  // All anchors see the user at broadside: no x information in the rows.
  const WlsSolution s = wls_locate({10.0, 20.0}, {0.5 * kPi, 0.5 * kPi}, {1.0e-7, 1.0e-7}, 0);
  CHECK_FALSE(s.ok);
  // A zero bearing makes the rows non-finite.
  const WlsSolution nf = wls_locate({10.0, 20.0}, {0.0, 1.0}, {1.0e-7, 1.0e-7}, 0);
  CHECK_FALSE(nf.ok);
  CHECK_THROWS_AS(wls_locate({10.0}, {1.0}, {1.0e-7}, 0), std::invalid_argument);
  CHECK_THROWS_AS(wls_locate({10.0, 20.0}, {1.0, 1.0}, {1.0e-7, 1.0e-7}, 2),
                  std::invalid_argument);
}

TEST_CASE("user pipeline recovers a planted position from a clean channel",
          "[localization]") {
  const PilotGrid grid = reference_grid();
  const int m_total = 10, ns = 8;
  const std::vector<double> centers = subarray_centers(m_total, 5.0);
  const double ux = 20.0, uy = 12.0;

  CMat h = CMat::Zero(static_cast<Eigen::Index>(m_total) * ns, grid.count);
  for (int m = 0; m < m_total; ++m) {
    const double theta = std::atan2(uy, centers[m] - ux);
    const double dist = std::hypot(centers[m] - ux, uy);
    const CMat block =
        testsupport::los_block(theta, dist / kSpeedOfLight, grid.offsets, ns, cxd(1.0 / dist, 0.0));
    h.middleRows(static_cast<Eigen::Index>(m) * ns, ns) = block;
  }

  const auto locs = mscloc(h, {0}, m_total, ns, grid.offsets, kTauMaxRef, centers);
  REQUIRE(locs.size() == 1);
  const UserLocation &loc = locs[0];
  CHECK(loc.user == 0);
  REQUIRE(loc.localized);
  CHECK_FALSE(loc.low_confidence);
  CHECK(loc.anchors.size() >= 2);
  REQUIRE(loc.ref_anchor >= 0);
  REQUIRE(loc.ref_anchor < static_cast<int>(loc.anchors.size()));
  CHECK(metric_rmse_xy(loc.x, loc.y, ux, uy) <= 0.01);

  // Estimated angles respect the geometry anchor by anchor.
  for (std::size_t i = 0; i < loc.anchors.size(); ++i) {
    const double truth = std::atan2(uy, centers[loc.anchors[i]] - ux);
    CHECK(std::abs(loc.aoa[i] - truth) <= deg_to_rad(0.01));
  }
}

TEST_CASE("silent users come back unlocalized but flagged", "[localization]") {
  const PilotGrid grid = reference_grid();
  const CMat h = CMat::Zero(2 * 16, grid.count); // two users, 2x8 array
  const auto locs = mscloc(h, {1}, 2, 8, grid.offsets, kTauMaxRef,
                           subarray_centers(2, 5.0));
  REQUIRE(locs.size() == 1);
  CHECK(locs[0].user == 1);
  CHECK(locs[0].low_confidence);
  CHECK_FALSE(locs[0].localized);
}

TEST_CASE("pipeline shape guards", "[localization]") {
  const PilotGrid grid = reference_grid();
  const CMat h = CMat::Zero(16, grid.count);
  CHECK_THROWS_AS(mscloc(h, {3}, 2, 8, grid.offsets, kTauMaxRef, subarray_centers(2, 5.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(mscloc(h, {0}, 2, 8, grid.offsets, kTauMaxRef, subarray_centers(3, 5.0)),
                  std::invalid_argument);
}
