// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include <xlsim/channel.hpp>
#include <xlsim/frontend.hpp>
#include <xlsim/rng.hpp>

#include "support.hpp"

using Catch::Approx;
using namespace xlsim;
using testsupport::TinySetup;

namespace {
constexpr double kLambda28 = 0.010714285714285714; // c / 28 GHz
}

TEST_CASE("pilot grid matches the reference layout", "[channel]") {
  ScenarioConfig sc; // 10 subarrays, 5 m apart
  const double tau_max = 2.0 * sc.array_span() / kSpeedOfLight;
  const PilotGrid g = pilot_grid(200.0e6, 2048, tau_max);
  CHECK(g.interval == 31);
  CHECK(g.count == 67);
  REQUIRE(g.offsets.size() == 67);
  const double scs = 200.0e6 / 2048;
  CHECK(g.offsets[0] == Approx(-99902343.75).epsilon(1e-15));
  CHECK(g.offsets[66] == Approx(99902343.75).epsilon(1e-15));
  for (int p = 0; p + 1 < g.count; ++p)
    CHECK(g.offsets[p + 1] - g.offsets[p] == Approx(31.0 * scs).epsilon(1e-12));
  for (int p = 0; p < g.count; ++p)
    CHECK(g.offsets[p] ==
          Approx(-100.0e6 + (static_cast<double>(p) * 31 + 1) * scs).margin(1e-6));
}

TEST_CASE("pilot grid at the scaled setup", "[channel]") {
  ScenarioConfig sc;
  sc.num_subarrays = 6;
  const PilotGrid g = pilot_grid(200.0e6, 512, 2.0 * sc.array_span() / kSpeedOfLight);
  CHECK(g.interval == 13);
  CHECK(g.count == 40);
}

TEST_CASE("pilot grid rejects unusable setups", "[channel]") {
  CHECK_THROWS_AS(pilot_grid(200.0e6, 2048, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pilot_grid(0.0, 2048, 1e-7), std::invalid_argument);
  // Required interval exceeds the symbol length.
  CHECK_THROWS_AS(pilot_grid(200.0e6, 4, 1.0e-9), std::invalid_argument);
}

TEST_CASE("steering vector is unit modulus with the expected phases", "[channel]") {
  const CVec e = steering_vector(kPi / 3.0, 4);
  REQUIRE(e.size() == 4);
  for (int n = 0; n < 4; ++n) CHECK(std::abs(e[n]) == Approx(1.0).epsilon(1e-15));
  CHECK(e[0] == cxd(1.0, 0.0));
  // cos(pi/3) = 1/2 so each step multiplies by exp(-j pi/2) = -j.
  CHECK(e[1].real() == Approx(0.0).margin(1e-15));
  CHECK(e[1].imag() == Approx(-1.0).epsilon(1e-14));
  CHECK(e[2].real() == Approx(-1.0).epsilon(1e-14));
  CHECK(e[2].imag() == Approx(0.0).margin(1e-14));
  CHECK(e[3].imag() == Approx(1.0).epsilon(1e-13));

  const CVec b = steering_vector(kPi / 2.0, 3); // broadside: all ones
  for (int n = 0; n < 3; ++n) {
    CHECK(b[n].real() == Approx(1.0).epsilon(1e-14));
    CHECK(b[n].imag() == Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("free-space gain follows the distance law", "[channel]") {
  CHECK(path_gain(kLambda28, 1.0, 3.0) == Approx(8.077262726589428e-08).epsilon(1e-12));
  // Halving the distance quadruples the gain.
  CHECK(path_gain(kLambda28, 1.0, 1.5) ==
        Approx(4.0 * 8.077262726589428e-08).epsilon(1e-12));
  // Antenna gain enters linearly.
  CHECK(path_gain(kLambda28, 2.0, 3.0) ==
        Approx(2.0 * 8.077262726589428e-08).epsilon(1e-12));
  CHECK_THROWS_AS(path_gain(kLambda28, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("thermal noise power and dbm conversions", "[channel]") {
  CHECK(noise_power(200.0e6, -174.0) == Approx(7.962143411069939e-13).epsilon(1e-12));
  CHECK(dbm_to_watt(30.0) == Approx(1.0).epsilon(1e-15));
  CHECK(dbm_to_watt(0.0) == Approx(1.0e-3).epsilon(1e-15));
  CHECK(watt_to_dbm(1.0) == Approx(30.0).epsilon(1e-15));
}

TEST_CASE("channel respects masks exactly and zeroes silent users", "[channel]") {
  TinySetup t = testsupport::make_tiny(7, 0.0);
  const int ns = t.channel.antennas_per_subarray;
  const int m_total = t.channel.num_subarrays;

  REQUIRE(t.channel.h.cols() == t.grid.count);
  REQUIRE(t.channel.h.rows() == 4 * m_total * ns);
  for (int k = 0; k < t.scenario_cfg.num_users; ++k) {
    const CMat slice = t.channel.user_channel(k);
    if (!t.scenario.users[k].active) {
      CHECK(slice.norm() == 0.0);
      continue;
    }
    for (int m = 0; m < m_total; ++m) {
      bool visible = false;
      for (const auto &path : t.scenario.paths[k]) visible |= path.mask[m] != 0;
      CHECK((t.channel.subarray_activity[k][m] != 0) == visible);
      const double seg = slice.middleRows(static_cast<Eigen::Index>(m) * ns, ns).norm();
      if (visible)
        CHECK(seg > 0.0);
      else
        CHECK(seg == 0.0); // exact zero, not merely small
    }
  }
}

TEST_CASE("channel matches a hand-assembled single-user reference", "[channel]") {
  ScenarioConfig sc;
  sc.num_users = 1;
  sc.num_active = 1;
  sc.num_subarrays = 2;
  sc.min_paths = 2;
  sc.max_paths = 2;
  sc.min_scatterers = 1;
  sc.max_scatterers = 1;
  sc.min_subarrays_per_path = 1;
  sc.max_subarray_fraction = 1.0;
  ChannelConfig cc;
  cc.num_subcarriers = 512;
  cc.antennas_per_subarray = 3;

  const std::uint64_t seed = 11;
  const Scenario scen = generate_scenario(sc, seed);
  const PathGeometry geo = path_parameters(scen);
  const PilotGrid grid = pilot_grid(cc.sample_rate, cc.num_subcarriers, geo.tau_max);
  const ChannelTensor ch = assemble_channel(scen, geo, cc, grid, seed);

  // Independent assembly from the same fading draws.
  Rng rng(seed);
  std::vector<cxd> alpha;
  for (std::size_t l = 0; l < scen.paths[0].size(); ++l) alpha.push_back(rng.complex_normal());
  REQUIRE(ch.path_alphas[0] == alpha);

  const double lambda = cc.wavelength();
  const double w_los = std::sqrt(cc.rician_gamma / (cc.rician_gamma + 1.0));
  const double w_nlos = std::sqrt(1.0 / (cc.rician_gamma + 1.0));
  for (int p = 0; p < grid.count; ++p) {
    CVec ref = CVec::Zero(6);
    for (std::size_t l = 0; l < scen.paths[0].size(); ++l) {
      const PathParams &pp = geo.users[0][l];
      const cxd w = (pp.is_los ? w_los : w_nlos) * alpha[l];
      const double hop0 = pp.is_los ? 1.0 : path_gain(lambda, cc.antenna_gain, pp.source_distance);
      for (int m = 0; m < 2; ++m) {
        if (!scen.paths[0][l].mask[m]) continue;
        const double amp = std::sqrt(hop0 * path_gain(lambda, cc.antenna_gain, pp.distance[m]));
        const CVec e = steering_vector(pp.aoa[m], 3);
        const cxd phase = std::polar(amp, -2.0 * kPi * pp.delay[m] * grid.offsets[p]);
        ref.segment(static_cast<Eigen::Index>(m) * 3, 3) += w * phase * e;
      }
    }
    CHECK((ch.h.col(p) - ref).norm() <= 1e-14 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("fading draws do not depend on the activity pattern", "[channel]") {
  ScenarioConfig sc;
  sc.num_users = 6;
  sc.num_active = 2;
  sc.num_subarrays = 4;
  ChannelConfig cc;
  cc.num_subcarriers = 512;
  cc.antennas_per_subarray = 2;

  const Scenario a = generate_scenario(sc, 21);
  Scenario b = a;
  int first_active = -1, first_idle = -1;
  for (int k = 0; k < sc.num_users; ++k) {
    if (a.users[k].active && first_active < 0) first_active = k;
    if (!a.users[k].active && first_idle < 0) first_idle = k;
  }
  REQUIRE(first_active >= 0);
  REQUIRE(first_idle >= 0);
  b.users[first_active].active = false;
  b.users[first_idle].active = true;

  const PathGeometry geo_a = path_parameters(a);
  const PathGeometry geo_b = path_parameters(b);
  const PilotGrid grid = pilot_grid(cc.sample_rate, cc.num_subcarriers, geo_a.tau_max);
  const ChannelTensor ca = assemble_channel(a, geo_a, cc, grid, 77);
  const ChannelTensor cb = assemble_channel(b, geo_b, cc, grid, 77);

  int shared = -1;
  for (int k = 0; k < sc.num_users; ++k)
    if (a.users[k].active && b.users[k].active) shared = k;
  REQUIRE(shared >= 0);
  CHECK((ca.user_channel(shared) - cb.user_channel(shared)).norm() == 0.0);
  CHECK(ca.path_alphas == cb.path_alphas);
  // The toggled-off user's rows vanish in b.
  CHECK(ca.user_channel(first_active).norm() > 0.0);
  CHECK(cb.user_channel(first_active).norm() == 0.0);
}

TEST_CASE("rician factor reweights a pure direct link", "[channel]") {
  ScenarioConfig sc;
  sc.num_users = 1;
  sc.num_active = 1;
  sc.num_subarrays = 2;
  sc.min_paths = 1;
  sc.max_paths = 1; // direct path only
  ChannelConfig cc;
  cc.num_subcarriers = 512;
  cc.antennas_per_subarray = 2;

  const Scenario scen = generate_scenario(sc, 3);
  const PathGeometry geo = path_parameters(scen);
  const PilotGrid grid = pilot_grid(cc.sample_rate, cc.num_subcarriers, geo.tau_max);

  ChannelConfig strong = cc;
  strong.rician_gamma = 100.0;
  const ChannelTensor c1 = assemble_channel(scen, geo, cc, grid, 5);
  const ChannelTensor c2 = assemble_channel(scen, geo, strong, grid, 5);

  const double r1 = std::sqrt(cc.rician_gamma / (cc.rician_gamma + 1.0));
  const double r2 = std::sqrt(strong.rician_gamma / (strong.rician_gamma + 1.0));
  CHECK((c1.h * (r2 / r1) - c2.h).norm() <= 1e-12 * c2.h.norm());
}

TEST_CASE("complex gaussian draws have unit mean-square", "[channel]") {
  Rng rng(123);
  double acc = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) acc += std::norm(rng.complex_normal());
  CHECK(acc / n == Approx(1.0).epsilon(0.02));
}
