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

// Release gate. Every test below prints exactly one [PASS]/[FAIL] line, so
// a log scan shows the state of each guarantee at a glance. Tolerances are
// part of the contract and must not be loosened to make a run green.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "qiface/analytics.hpp"
#include "qiface/fitting.hpp"
#include "qiface/fock.hpp"
#include "qiface/oracle.hpp"
#include "qiface/rng.hpp"
#include "qiface/sequence.hpp"

namespace qiface {
namespace {

void report(int n, const char* what) {
  std::printf("%s criterion %2d: %s\n",
              ::testing::Test::HasFailure() ? "[FAIL]" : "[PASS]", n, what);
  std::fflush(stdout);
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// ---------------------------------------------------------------------
// 1. Classical bound through the CLI, and its small-flux limit.

TEST(Acceptance, Criterion01ClassicalBound) {
  namespace fs = std::filesystem;
  const fs::path out = fs::temp_directory_path() / "qiface_acc_bound.txt";
  const std::string cmd =
      std::string(QIFACE_CLI_PATH) + " classical-bound --mu 6.5e-4 >" +
      out.string();
  const auto t0 = std::chrono::steady_clock::now();
  const int status = std::system(cmd.c_str());
  const double dt = elapsed_s(t0);
  EXPECT_TRUE(WIFEXITED(status));
  EXPECT_EQ(WEXITSTATUS(status), 0);
  std::ifstream f(out);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "0.666694\n");
  fs::remove(out);
  EXPECT_LT(dt, 1.0);

  EXPECT_NEAR(classical_bound(1e-9), 2.0 / 3.0, 1e-9);

  report(1, "classical bound prints 0.666694; mu->0 limit 2/3 (<1s)");
}

// ---------------------------------------------------------------------
// 2. Closed-form visibility vs exact enumeration over the working grid.

TEST(Acceptance, Criterion02VisibilityModelVsOracle) {
  const auto t0 = std::chrono::steady_clock::now();
  const double p_nv = 2.5e-4;  // keeps mu = x p_nv below 1e-3 at x = 4
  const double q = 3.6e-7;
  double worst = 0.0;
  for (double g2 : {0.0, 0.011}) {
    const NvParams nv{p_nv, g2, p_de_from_g2(g2, p_nv)};
    for (double x : {0.25, 0.5, 1.0, 1.19, 2.0, 4.0}) {
      for (double eta : {0.0, 0.5, 0.895, 1.0}) {
        const double v_oracle =
            tpqi_oracle(nv, x * p_nv, eta, NoiseParams{q}).visibility;
        const double v_model =
            visibility_model({x, g2, p_nv, q, eta});
        worst = std::max(worst, std::abs(v_oracle - v_model));
      }
    }
  }
  EXPECT_LE(worst, 1e-3);
  EXPECT_LT(elapsed_s(t0), 60.0);
  report(2, "visibility model within 1e-3 of enumeration on 48-point grid");
}

// ---------------------------------------------------------------------
// 3. Eta recovery: exact on clean data, correctly scaled under noise.

TEST(Acceptance, Criterion03VisibilityFitRecovery) {
  const double g2 = 0.011, p_nv = 5.76e-4, q = 3.6e-7;
  const double eta_true = 0.895;
  const std::vector<double> xs = {0.25, 0.5, 1.0, 1.19, 2.0, 4.0};

  DataSeries clean;
  for (double x : xs) {
    clean.x.push_back(x);
    clean.y.push_back(visibility_model({x, g2, p_nv, q, eta_true}));
  }
  const auto exact = fit_visibility(clean, g2, p_nv, q);
  EXPECT_TRUE(exact.converged);
  EXPECT_NEAR(exact.param("eta"), eta_true, 1e-6);

  // Counting-noise scale chosen so the per-fit eta uncertainty lands on
  // the 0.019 the visibility measurement resolves.
  const double sigma_v = 0.03043685891007439;
  Xoshiro256pp rng = shot_stream(333, 0);
  auto gauss = [&rng]() {
    const double u1 = rng.uniform(), u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  };

  const int n_rep = 200;
  std::vector<double> etas;
  double reported_sigma = 0.0;
  for (int r = 0; r < n_rep; ++r) {
    DataSeries noisy;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      noisy.x.push_back(xs[i]);
      noisy.y.push_back(clean.y[i] + sigma_v * gauss());
      noisy.sigma.push_back(sigma_v);
    }
    const auto fit = fit_visibility(noisy, g2, p_nv, q);
    EXPECT_TRUE(fit.converged);
    etas.push_back(fit.param("eta"));
    if (r == 0) reported_sigma = fit.uncertainty(0);
  }
  EXPECT_NEAR(reported_sigma, 0.019, 1e-4);

  double mean = 0.0;
  for (double e : etas) mean += e;
  mean /= n_rep;
  double var = 0.0;
  for (double e : etas) var += (e - mean) * (e - mean);
  const double sd = std::sqrt(var / (n_rep - 1));
  EXPECT_NEAR(mean, eta_true, 4.0 * 0.019 / std::sqrt(double(n_rep)));
  EXPECT_GT(sd, 0.75 * 0.019);
  EXPECT_LT(sd, 1.25 * 0.019);

  report(3, "eta recovery exact to 1e-6; noisy spread centered, sigma 0.019");
}

// ---------------------------------------------------------------------
// 4. Teleportation fidelity: formulas vs enumeration, curve shape, bound.

TEST(Acceptance, Criterion04TeleportModelVsOracle) {
  const double p_nv = 4.5e-4, g2 = 0.011, q = 5.5e-6, eta = 0.895;
  const double eps = 0.04;
  const NvParams nv{p_nv, g2, p_de_from_g2(g2, p_nv)};

  for (double x : {0.25, 0.5, 1.0, 1.2, 2.0, 4.0}) {
    WcsParams wcs;
    wcs.mu = x * p_nv;
    wcs.leak_epsilon = eps;
    const TeleportModelParams tm{nv, wcs, eta, q};

    wcs.qubit = InputQubit::plus_z();
    const double f_pole_o =
        teleport_oracle(nv, wcs, eta, NoiseParams{q}).fidelity;
    EXPECT_NEAR(f_pole_o, fidelity_pole(tm), 2e-3) << "x=" << x;

    wcs.qubit = InputQubit::plus_x();
    const double f_eq_o =
        teleport_oracle(nv, wcs, eta, NoiseParams{q}).fidelity;
    EXPECT_NEAR(f_eq_o, fidelity_eq(tm), 2e-3) << "x=" << x;
  }

  // average-fidelity sweep: rises to one optimum then decays, never dips
  // below the multi-photon classical bound up to x = 4
  std::vector<double> grid, favg;
  for (double x = 0.25; x <= 4.0 + 1e-9; x += 0.25) grid.push_back(x);
  for (double x : grid) {
    WcsParams wcs;
    wcs.mu = x * p_nv;
    wcs.leak_epsilon = eps;
    const auto six = teleport_oracle_six(nv, wcs, eta, NoiseParams{q});
    favg.push_back(six.f_avg);
    EXPECT_GT(six.f_avg, classical_bound(wcs.mu)) << "x=" << x;
  }
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(favg.begin(), favg.end()) - favg.begin());
  for (std::size_t i = peak + 1; i < favg.size(); ++i)
    EXPECT_LT(favg[i], favg[i - 1]) << "x=" << grid[i];

  // model value at the operating flux ratio: above the measured average
  // (hardware errors the model excludes pull the measurement down), and
  // within 8 percentage points of it
  WcsParams wcs;
  wcs.mu = 1.20 * p_nv;
  wcs.leak_epsilon = eps;
  const double f_op = teleport_oracle_six(nv, wcs, eta, NoiseParams{q}).f_avg;
  EXPECT_GT(f_op, 0.755);
  EXPECT_LE(f_op, 0.755 + 0.08);

  report(4, "teleport formulas within 2e-3; curve shape and bound hold");
}

// ---------------------------------------------------------------------
// 5. Without the heralded correction the equator is fully mixed.

TEST(Acceptance, Criterion05NoFeedforwardMixesEquator) {
  TeleportOptions opt;
  opt.feedforward = false;

  {
    TeleportOptions ideal = opt;
    ideal.ideal_single_photon = true;
    const NvParams nv{1.0, 0.0, 0.0};
    for (const auto& q :
         {InputQubit::plus_x(), InputQubit::minus_x(), InputQubit::plus_y(),
          InputQubit::minus_y()}) {
      WcsParams wcs;
      wcs.mu = 1.0;
      wcs.qubit = q;
      EXPECT_NEAR(teleport_oracle(nv, wcs, 1.0, NoiseParams{}, ideal).fidelity,
                  0.5, 1e-10);
    }
  }
  {
    const double p_nv = 4.5e-4, g2 = 0.011;
    const NvParams nv{p_nv, g2, p_de_from_g2(g2, p_nv)};
    WcsParams wcs;
    wcs.mu = 1.2 * p_nv;
    wcs.qubit = InputQubit::plus_x();
    EXPECT_NEAR(
        teleport_oracle(nv, wcs, 0.895, NoiseParams{5.5e-6}, opt).fidelity,
        0.5, 1e-10);
  }
  report(5, "no-feedforward equatorial fidelity is 0.5 within 1e-10");
}

// ---------------------------------------------------------------------
// 6. Interference bedrock: perfect bunching, unitarity, conservation.

TEST(Acceptance, Criterion06HomAndBeamSplitterProperties) {
  // two identical photons, one per port: coincidences vanish
  {
    const auto a = single_photon_state(
        {{mode_index(TimeBin::Early, InputPort::AIn, DistClass::Matched),
          1.0}},
        kNoSpin);
    const auto b = single_photon_state(
        {{mode_index(TimeBin::Early, InputPort::BIn, DistClass::Matched),
          1.0}},
        kNoSpin);
    const auto mixed = beam_splitter(tensor_product(a, b));
    const auto det = detect(mixed, NoiseParams{0.0});
    double coinc = 0.0;
    for (const auto& e : det) {
      const auto bits = pattern_to_bits(e.pattern);
      if ((bits & 1) && (bits & 2)) coinc += e.probability;  // early D1+D2
      if ((bits & 4) && (bits & 8)) coinc += e.probability;  // late D1+D2
    }
    EXPECT_LT(coinc, 1e-12);
  }

  // random-state sweep: norm and per-(bin,class) photon number survive
  // the beam splitter
  Xoshiro256pp rng(2468);
  const int n_states = 10000;
  double worst_norm = 0.0, worst_photon = 0.0;
  for (int s = 0; s < n_states; ++s) {
    FockAmplitudeState state;
    const int n_terms = 1 + static_cast<int>(rng.uniform() * 4.0);
    for (int t = 0; t < n_terms; ++t) {
      Occupation occ{};
      const int n_ph = static_cast<int>(rng.uniform() * 7.0);
      for (int k = 0; k < n_ph; ++k) {
        const int slot = static_cast<int>(rng.uniform() * 12.0);
        if (occ[slot] < 3) ++occ[slot];
      }
      const double re = 2.0 * rng.uniform() - 1.0;
      const double im = 2.0 * rng.uniform() - 1.0;
      state.add({occ, kNoSpin}, {re, im});
    }
    const double n0 = state.norm_sq();
    if (n0 <= 0.0) continue;

    std::array<double, 6> photons_before{};
    for (const auto& [term, amp] : state.terms)
      for (int bin = 0; bin < 2; ++bin)
        for (int cls = 0; cls < 3; ++cls)
          photons_before[bin * 3 + cls] +=
              std::norm(amp) *
              photons_in(term.occ, static_cast<TimeBin>(bin),
                         static_cast<DistClass>(cls));

    const auto out = beam_splitter(state);
    worst_norm = std::max(worst_norm, std::abs(out.norm_sq() - n0));

    std::array<double, 6> photons_after{};
    for (const auto& [term, amp] : out.terms)
      for (int bin = 0; bin < 2; ++bin)
        for (int cls = 0; cls < 3; ++cls)
          photons_after[bin * 3 + cls] +=
              std::norm(amp) *
              photons_in(term.occ, static_cast<TimeBin>(bin),
                         static_cast<DistClass>(cls));
    for (int k = 0; k < 6; ++k)
      worst_photon = std::max(
          worst_photon, std::abs(photons_after[k] - photons_before[k]));
  }
  EXPECT_LT(worst_norm, 1e-10);
  EXPECT_LT(worst_photon, 1e-10);

  report(6, "HOM dip < 1e-12; unitarity/conservation on 1e4 states < 1e-10");
}

// ---------------------------------------------------------------------
// 7. Monte Carlo estimates converge on the enumeration, and threading
//    never changes a single count.

TEST(Acceptance, Criterion07MonteCarloConsistency) {
  const auto t0 = std::chrono::steady_clock::now();

  // interference half: 4e5 shots x 100 reps x 10 bins = 4e8 window slots
  {
    const double p_nv = 5.76e-4, g2 = 0.011, q = 3.6e-7;
    const NvParams nv{p_nv, g2, p_de_from_g2(g2, p_nv)};
    const double mu = 1.19 * p_nv, eta = 0.895;
    SequenceConfig cfg;
    const auto oracle = tpqi_oracle(nv, mu, eta, NoiseParams{q});
    const auto run = run_tpqi_experiment(cfg, nv, mu, eta, NoiseParams{q},
                                         777, 400000, 8);
    ASSERT_TRUE(run.has_estimate);
    EXPECT_NEAR(run.v_estimate, oracle.visibility, 3.0 * run.v_stderr);

    const auto one = run_tpqi_experiment(cfg, nv, mu, eta, NoiseParams{q},
                                         777, 2000, 1, true);
    const auto eight = run_tpqi_experiment(cfg, nv, mu, eta, NoiseParams{q},
                                           777, 2000, 8, true);
    EXPECT_EQ(one.ind_hist.counts, eight.ind_hist.counts);
    EXPECT_EQ(one.dist_hist.counts, eight.dist_hist.counts);
    ASSERT_EQ(one.timetags.size(), eight.timetags.size());
    bool tags_equal = true;
    for (std::size_t i = 0; i < one.timetags.size(); ++i)
      tags_equal &= one.timetags[i].shot == eight.timetags[i].shot &&
                    one.timetags[i].detector == eight.timetags[i].detector &&
                    one.timetags[i].time_ns == eight.timetags[i].time_ns;
    EXPECT_TRUE(tags_equal);
  }

  // teleportation half: 1e7 blocks/state x 50-attempt cap = 5e8 attempts
  {
    const double p_nv = 4.5e-4, g2 = 0.011, q = 5.5e-6;
    TeleportModelParams tm;
    tm.nv = NvParams{p_nv, g2, p_de_from_g2(g2, p_nv)};
    tm.wcs.mu = 1.2 * p_nv;
    tm.wcs.leak_epsilon = 0.04;
    tm.eta = 0.895;
    tm.p_noise = q;
    SequenceConfig cfg;

    const auto run = run_teleport_experiment(cfg, tm, 707, 10000000, 8);
    ASSERT_FALSE(run.no_data);
    for (const auto& st : run.states) {
      const std::uint64_t n = st.r_ii + st.r_ji;
      ASSERT_GT(n, 0u);
      const double sigma = std::sqrt(
          st.oracle_fidelity * (1.0 - st.oracle_fidelity) /
          static_cast<double>(n));
      EXPECT_NEAR(st.fidelity, st.oracle_fidelity, 3.0 * sigma);
    }

    const auto a = run_teleport_experiment(cfg, tm, 707, 100000, 1);
    const auto b = run_teleport_experiment(cfg, tm, 707, 100000, 8);
    for (int s = 0; s < 6; ++s) {
      EXPECT_EQ(a.states[s].attempts, b.states[s].attempts);
      EXPECT_EQ(a.states[s].heralds, b.states[s].heralds);
      EXPECT_EQ(a.states[s].r_ii, b.states[s].r_ii);
      EXPECT_EQ(a.states[s].r_ji, b.states[s].r_ji);
    }
  }

  EXPECT_LT(elapsed_s(t0), 600.0);
  report(7, "MC estimates within 3 sigma at >=1e8 attempts; thread-exact");
}

// ---------------------------------------------------------------------
// 8. Distinguishable-train histogram: triangular envelope off zero delay.

TEST(Acceptance, Criterion08HistogramEnvelope) {
  const double p_nv = 5.76e-4, g2 = 0.011, q = 3.6e-7;
  const NvParams nv{p_nv, g2, p_de_from_g2(g2, p_nv)};
  const double mu = 1.19 * p_nv;
  SequenceConfig cfg;

  const std::uint64_t shots = 400000;
  const auto run = run_tpqi_experiment(cfg, nv, mu, 0.895, NoiseParams{q},
                                       1234, shots, 8);

  // exact expectation per delta: independent bins, so the pair count is
  // trains * (bins - |delta|) * E[D1 clicks/bin] * E[D2 clicks/bin]
  const auto d_nv = window_click_distribution(nv, 0.0, 0.0, NoiseParams{q});
  const auto d_wcs =
      window_click_distribution(NvParams{}, mu, 0.0, NoiseParams{q});
  const double e_d1 = d_nv[1] + d_nv[3] + d_wcs[1] + d_wcs[3];
  const double e_d2 = d_nv[2] + d_nv[3] + d_wcs[2] + d_wcs[3];
  const double trains = static_cast<double>(run.cr_passed) *
                        cfg.train_repetitions;

  for (int delta = -(cfg.bins_per_train - 1); delta <= cfg.bins_per_train - 1;
       ++delta) {
    if (delta == 0) continue;
    const double expect =
        trains * (cfg.bins_per_train - std::abs(delta)) * e_d1 * e_d2;
    const double got = static_cast<double>(run.dist_hist.at(delta));
    EXPECT_NEAR(got, expect, 3.0 * std::sqrt(expect)) << "delta=" << delta;
  }
  report(8, "off-zero histogram matches (bins-|delta|) envelope within 3s");
}

// ---------------------------------------------------------------------
// 9. Half-wave voltage extraction.

TEST(Acceptance, Criterion09PhaseModulatorFit) {
  const double v_pi = 5.202;
  const double s = std::numbers::pi / v_pi;
  std::vector<double> v, y1, y2;
  for (double volt = -8.0; volt <= 8.01; volt += 0.4) {
    const double u = s * volt / 2.0 - 0.3;
    v.push_back(volt);
    y1.push_back(310.0 * std::sin(u) + 350.0);
    y2.push_back(295.0 * std::cos(u) + 330.0);
  }
  const auto out = fit_phase_modulator(v, y1, y2);
  EXPECT_TRUE(out.fit.converged);
  EXPECT_NEAR(out.v_pi, v_pi, 1e-6);
  EXPECT_DOUBLE_EQ(out.v_pi_half, out.v_pi / 2.0);
  report(9, "V_pi = 5.202 V recovered to 1e-6; V_pi/2 is exactly half");
}

// ---------------------------------------------------------------------
// 10. Analytic Jacobians agree with central finite differences.

TEST(Acceptance, Criterion10JacobianConsistency) {
  struct Case {
    const char* name;
    ParametricModel model;
    std::vector<double> p;
  };
  std::vector<Case> cases;
  {
    ParametricModel m;
    m.value = [](double x, const std::vector<double>& p) {
      return p[0] * visibility_model({x, 0.011, 5.76e-4, 3.6e-7, 1.0});
    };
    m.gradient = [](double x, const std::vector<double>&) {
      return std::vector<double>{
          visibility_model({x, 0.011, 5.76e-4, 3.6e-7, 1.0})};
    };
    cases.push_back({"visibility", m, {0.87}});
  }
  {
    ParametricModel m;
    m.value = [](double x, const std::vector<double>& p) {
      const double u = std::numbers::pi / 2.0 * std::sqrt(x / p[1]);
      return p[0] * std::sin(u) * std::sin(u);
    };
    m.gradient = [](double x, const std::vector<double>& p) {
      const double u = std::numbers::pi / 2.0 * std::sqrt(x / p[1]);
      return std::vector<double>{
          std::sin(u) * std::sin(u),
          -p[0] * std::sin(2.0 * u) * u / (2.0 * p[1])};
    };
    cases.push_back({"saturation-sin2", m, {0.83, 2.1}});
  }
  {
    ParametricModel m;
    m.value = [](double x, const std::vector<double>& p) {
      return p[0] * x / (x + p[1]);
    };
    m.gradient = [](double x, const std::vector<double>& p) {
      const double d = x + p[1];
      return std::vector<double>{x / d, -p[0] * x / (d * d)};
    };
    cases.push_back({"saturation-hill", m, {0.9, 1.5}});
  }
  {
    ParametricModel m;
    m.value = [](double x, const std::vector<double>& p) {
      return p[0] * x + p[1];
    };
    m.gradient = [](double x, const std::vector<double>&) {
      return std::vector<double>{x, 1.0};
    };
    cases.push_back({"linear", m, {1.7, -0.3}});
  }

  const std::vector<double> xs = {0.3, 0.9, 1.7, 2.6, 3.8};
  double worst = 0.0;
  for (const auto& c : cases) {
    auto residuals = [&](const std::vector<double>& p) {
      std::vector<double> r(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i)
        r[i] = -c.model.value(xs[i], p);
      return r;
    };
    const auto fd = finite_difference_jacobian(residuals, c.p);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto g = c.model.gradient(xs[i], c.p);
      for (std::size_t k = 0; k < g.size(); ++k) {
        const double rel = std::abs(-g[k] - fd[i][k]) /
                           std::max(1.0, std::abs(g[k]));
        worst = std::max(worst, rel);
      }
    }
  }
  EXPECT_LT(worst, 1e-6);
  report(10, "analytic vs finite-difference Jacobians < 1e-6 on all models");
}

}  // namespace
}  // namespace qiface
