// Copyright 2026 The qiface Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qiface/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "qiface/analytics.hpp"

namespace qiface {
namespace {

NvParams regression_nv() { return {4.5e-4, 0.011, p_de_from_g2(0.011, 4.5e-4)}; }

WcsParams regression_wcs(InputQubit q) {
  WcsParams w;
  w.mu = 5.4e-4;
  w.leak_epsilon = 0.04;
  w.qubit = q;
  return w;
}

// Pinned outputs at the nominal operating point. These are regression
// anchors: they were frozen from an independent implementation of the
// same enumeration before this one was written.
TEST(TeleportOracle, FrozenPoleRegression) {
  const auto r = teleport_oracle(regression_nv(),
                                 regression_wcs(InputQubit::plus_z()), 0.895,
                                 NoiseParams{5.5e-6});
  EXPECT_NEAR(r.fidelity, 0.8907006355416953, 1e-9);
  EXPECT_NEAR(r.herald_mass, 1.4920405693684484e-7, 1e-9 * 1.5e-7);
  EXPECT_FALSE(r.no_herald);
  EXPECT_LT(r.truncated_mass, 1e-9);
}

TEST(TeleportOracle, FrozenEquatorRegression) {
  const auto r = teleport_oracle(regression_nv(),
                                 regression_wcs(InputQubit::plus_x()), 0.895,
                                 NoiseParams{5.5e-6});
  EXPECT_NEAR(r.fidelity, 0.7647462825909515, 1e-9);
  EXPECT_NEAR(r.herald_mass, 2.053129462681758e-7, 1e-9 * 2.1e-7);
}

TEST(TeleportOracle, IdealLimitIsPerfect) {
  NvParams nv{1.0, 0.0, 0.0};
  WcsParams w;
  w.mu = 1.0;
  TeleportOptions opt;
  opt.ideal_single_photon = true;
  for (const auto& q : cardinal_states()) {
    w.qubit = q;
    const auto r = teleport_oracle(nv, w, 1.0, NoiseParams{}, opt);
    EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
    EXPECT_NEAR(r.herald_mass, 0.5, 1e-12);
    EXPECT_TRUE(r.herald_rho[0].is_valid());
    EXPECT_TRUE(r.herald_rho[1].is_valid());
  }
}

TEST(TeleportOracle, NoFeedforwardLeavesEquatorMixed) {
  NvParams nv{1.0, 0.0, 0.0};
  WcsParams w;
  w.mu = 1.0;
  TeleportOptions opt;
  opt.ideal_single_photon = true;
  opt.feedforward = false;
  for (const auto& q : {InputQubit::plus_x(), InputQubit::minus_x(),
                        InputQubit::plus_y(), InputQubit::minus_y()}) {
    w.qubit = q;
    const auto r = teleport_oracle(nv, w, 1.0, NoiseParams{}, opt);
    EXPECT_NEAR(r.fidelity, 0.5, 1e-10);
    // the two herald classes are individually pure and mirrored; the
    // mixture has no in-plane component left
    SpinDensityMatrix sum{};
    sum.accumulate(r.herald_rho[0], r.herald_prob[0]);
    sum.accumulate(r.herald_rho[1], r.herald_prob[1]);
    const auto rho = sum.normalized();
    EXPECT_NEAR(rho.bloch_x(), 0.0, 1e-10);
    EXPECT_NEAR(rho.bloch_y(), 0.0, 1e-10);
  }
}

TEST(TeleportOracle, PolesDoNotNeedTheCorrection) {
  // Z-basis inputs commute with the phase flip, so feedforward must not
  // change their fidelity.
  const auto with = teleport_oracle(
      regression_nv(), regression_wcs(InputQubit::plus_z()), 0.895,
      NoiseParams{5.5e-6});
  TeleportOptions opt;
  opt.feedforward = false;
  const auto without = teleport_oracle(
      regression_nv(), regression_wcs(InputQubit::plus_z()), 0.895,
      NoiseParams{5.5e-6}, opt);
  EXPECT_NEAR(with.fidelity, without.fidelity, 1e-14);
}

TEST(TeleportOracle, EquatorFidelityIncreasesWithOverlap) {
  const NvParams nv = regression_nv();
  WcsParams w = regression_wcs(InputQubit::plus_x());
  double prev = -1.0;
  for (double eta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const double f =
        teleport_oracle(nv, w, eta, NoiseParams{5.5e-6}).fidelity;
    EXPECT_GT(f, prev);
    prev = f;
  }
}

TEST(TeleportOracle, HeraldMassMatchesClassSum) {
  const auto r = teleport_oracle(regression_nv(),
                                 regression_wcs(InputQubit::minus_y()), 0.895,
                                 NoiseParams{5.5e-6});
  EXPECT_NEAR(r.herald_prob[0] + r.herald_prob[1], r.herald_mass, 1e-18);
  double total = 0.0;
  for (const auto& e : r.patterns) total += e.probability;
  // patterns sum to the surviving (untruncated) norm
  EXPECT_NEAR(total, 1.0, 1e-8);
  EXPECT_TRUE(r.herald_rho[0].is_valid());
  EXPECT_TRUE(r.herald_rho[1].is_valid());
}

TEST(TeleportOracle, SixStateAverageUsesAxisMeans) {
  const auto six = teleport_oracle_six(
      regression_nv(), regression_wcs(InputQubit::plus_x()), 0.895,
      NoiseParams{5.5e-6});
  double expect = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    expect += (six.states[2 * axis].fidelity +
               six.states[2 * axis + 1].fidelity) /
              2.0;
  expect /= 3.0;
  EXPECT_DOUBLE_EQ(six.f_avg, expect);
  // equator pairs agree by symmetry
  EXPECT_NEAR(six.states[2].fidelity, six.states[4].fidelity, 1e-12);
}

TEST(WindowClickDistribution, DarkCountsOnly) {
  const double q = 7e-4;
  const auto d =
      window_click_distribution(NvParams{0.0, 0.0, 0.0}, 0.0, 0.5,
                                NoiseParams{q});
  EXPECT_NEAR(d[0], (1.0 - q) * (1.0 - q), 1e-15);
  EXPECT_NEAR(d[1], q * (1.0 - q), 1e-15);
  EXPECT_NEAR(d[2], q * (1.0 - q), 1e-15);
  EXPECT_NEAR(d[3], q * q, 1e-18);
}

TEST(WindowClickDistribution, EmitterOnlyCoincidenceIsQuarterG2) {
  const double p = 5.76e-4, g2 = 0.011;
  const NvParams nv{p, g2, p_de_from_g2(g2, p)};
  const auto d = window_click_distribution(nv, 0.0, 0.895, NoiseParams{});
  EXPECT_NEAR(d[3], 0.25 * p * p * g2, 0.01 * 0.25 * p * p * g2);
  // and the estimator inverts it
  const double g2_hat = g2_estimate(d[3], d[1] + d[3], d[2] + d[3]);
  EXPECT_NEAR(g2_hat, g2, 0.02 * g2);
}

TEST(TpqiOracle, FrozenRegression) {
  const NvParams nv{5.76e-4, 0.011, p_de_from_g2(0.011, 5.76e-4)};
  const auto r = tpqi_oracle(nv, 1.19 * 5.76e-4, 0.895, NoiseParams{3.6e-7});
  EXPECT_NEAR(r.p_ind, 1.3946985668011756e-7, 1e-9 * 1.4e-7);
  EXPECT_NEAR(r.p_dist, 3.160879866758147e-7, 1e-9 * 3.2e-7);
  EXPECT_NEAR(r.visibility, 0.5587625516968469, 1e-9);
}

TEST(TpqiOracle, ZeroOverlapMeansZeroVisibility) {
  const NvParams nv{5.76e-4, 0.011, p_de_from_g2(0.011, 5.76e-4)};
  const auto r = tpqi_oracle(nv, 6.85e-4, 0.0, NoiseParams{3.6e-7});
  EXPECT_EQ(r.visibility, 0.0);
  EXPECT_THROW(tpqi_oracle(NvParams{0.0, 0.0, 0.0}, 0.0, 0.5, NoiseParams{}),
               numerical_error);
}

TEST(TpqiOracle, PerfectOverlapSuppressionLimitedByG2) {
  // with eta = 1 and no noise the residual coincidences come from the
  // emitter's double emission and the coherent two-photon component
  const double p = 5.76e-4;
  const NvParams pure{p, 0.0, 0.0};
  const double mu = p;  // x = 1
  const auto r = tpqi_oracle(pure, mu, 1.0, NoiseParams{});
  const VisibilityParams vp{1.0, 0.0, p, 0.0, 1.0};
  EXPECT_NEAR(r.visibility, visibility_model(vp), 1e-3);
}

TEST(G2Estimate, RejectsZeroRates) {
  EXPECT_THROW(g2_estimate(1e-9, 0.0, 1e-3), std::domain_error);
  EXPECT_THROW(g2_estimate(1e-9, 1e-3, 0.0), std::domain_error);
  EXPECT_DOUBLE_EQ(g2_estimate(8e-8, 2e-4, 2e-4), 2.0);
}

TEST(TeleportOracle, RejectsBadEta) {
  EXPECT_THROW(teleport_oracle(regression_nv(),
                               regression_wcs(InputQubit::plus_z()), 1.5,
                               NoiseParams{}),
               std::domain_error);
}

}  // namespace
}  // namespace qiface
