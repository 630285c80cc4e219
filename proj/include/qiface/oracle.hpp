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

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "qiface/detection.hpp"
#include "qiface/errors.hpp"
#include "qiface/fock.hpp"
#include "qiface/sources.hpp"
#include "qiface/spin.hpp"

// Brute-force enumeration of the interference experiments on the truncated
// Fock space. Every closed-form model in analytics.hpp is validated against
// these routines; they trade speed for explicitness.

namespace qiface {

struct TeleportOptions {
  // Apply the phase-flip correction on PsiMinus heralds (PsiPlus is the
  // reference class).
  bool feedforward = true;
  // Replace the coherent input by an exact single photon in the same qubit
  // state; the ideal limit of the protocol.
  bool ideal_single_photon = false;
  int photon_cap = kSourcePhotonCap;
};

namespace detail {

// Classical mixture of pure states with weights; enumeration scenarios.
struct Scenario {
  double weight;
  FockAmplitudeState state;
};

// Emitter-side scenarios. The emitted photon is spin-entangled:
// 1/sqrt2 (|1>|E> + |0>|L>). Losing it (the no-photon branch) leaves the
// spin fully mixed, which the enumeration represents as two equal-weight
// definite-spin scenarios. The double-excitation photon shares the time
// bin but lives in its own distinguishability class.
inline std::vector<Scenario> nv_scenarios(const NvParams& nv,
                                          bool with_spin) {
  const NvEmissionState em = nv_emission_state(nv);
  std::vector<Scenario> out;
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  auto one_photon = [&](TimeBin bin, DistClass cls) {
    Occupation occ{};
    occ[mode_index(bin, InputPort::BIn, cls)] = 1;
    return occ;
  };

  if (em.w_entangled > 0.0) {
    FockAmplitudeState ent;
    if (with_spin) {
      ent.add({one_photon(TimeBin::Early, DistClass::Matched), 1}, inv_sqrt2);
      ent.add({one_photon(TimeBin::Late, DistClass::Matched), 0}, inv_sqrt2);
    } else {
      // Spin ignored: the photon is a bare early-bin emission.
      ent.add({one_photon(TimeBin::Early, DistClass::Matched), kNoSpin}, 1.0);
    }
    out.push_back({em.w_entangled, ent});
  }
  if (em.w_double > 0.0) {
    FockAmplitudeState dbl;
    auto two = [&](TimeBin bin) {
      Occupation occ = one_photon(bin, DistClass::Matched);
      occ[mode_index(bin, InputPort::BIn, DistClass::OrthogonalNv)] = 1;
      return occ;
    };
    if (with_spin) {
      dbl.add({two(TimeBin::Early), 1}, inv_sqrt2);
      dbl.add({two(TimeBin::Late), 0}, inv_sqrt2);
    } else {
      dbl.add({two(TimeBin::Early), kNoSpin}, 1.0);
    }
    out.push_back({em.w_double, dbl});
  }
  if (em.w_no_photon > 0.0) {
    if (with_spin) {
      out.push_back({em.w_no_photon / 2.0, FockAmplitudeState::vacuum(0)});
      out.push_back({em.w_no_photon / 2.0, FockAmplitudeState::vacuum(1)});
    } else {
      out.push_back({em.w_no_photon, FockAmplitudeState::vacuum()});
    }
  }
  return out;
}

// Coherent-qubit state on the A input, with the indistinguishability
// split applied to each time-bin amplitude. Attributing the mode mismatch
// entirely to this source is general: only the pairwise overlap with the
// emitter photon enters any observable.
inline FockAmplitudeState wcs_input_state(const WcsParams& wcs, double eta,
                                          const TeleportOptions& opt) {
  const auto [alpha_e, alpha_l] = prepare_wcs_amplitudes(wcs);
  const auto [e_m, e_o] = split_indistinguishability(alpha_e, eta);
  const auto [l_m, l_o] = split_indistinguishability(alpha_l, eta);
  const std::vector<std::pair<int, complexd>> amps = {
      {mode_index(TimeBin::Early, InputPort::AIn, DistClass::Matched), e_m},
      {mode_index(TimeBin::Early, InputPort::AIn, DistClass::OrthogonalWcs),
       e_o},
      {mode_index(TimeBin::Late, InputPort::AIn, DistClass::Matched), l_m},
      {mode_index(TimeBin::Late, InputPort::AIn, DistClass::OrthogonalWcs),
       l_o}};
  if (opt.ideal_single_photon) return single_photon_state(amps);
  return coherent_product(amps, opt.photon_cap);
}

}  // namespace detail

/// Mixture detection distribution plus herald-conditioned spin states for
/// one prepared input qubit.
struct TeleportStateResult {
  InputQubit input;
  // Observed-pattern probabilities with conditional spin states, mixture
  // over all source scenarios. Indexed by the 4-bit pattern encoding.
  DetectionResult patterns;
  // Per herald class: probability of the herald per attempt and the
  // conditional spin state after the configured feedforward.
  std::array<double, 2> herald_prob{0.0, 0.0};
  std::array<SpinDensityMatrix, 2> herald_rho{};
  std::array<double, 2> fidelity_per_class{
      std::numeric_limits<double>::quiet_NaN(),
      std::numeric_limits<double>::quiet_NaN()};
  bool no_herald = true;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double herald_mass = 0.0;
  double truncated_mass = 0.0;
};

/// Full protocol enumeration for the input state carried by wcs.qubit:
/// source emissions x beam splitter x threshold detection, conditioned on
/// the two herald classes, with the phase-flip correction applied to
/// PsiMinus when options.feedforward is set.
inline TeleportStateResult teleport_oracle(
    const NvParams& nv, const WcsParams& wcs, double eta,
    const NoiseParams& noise, const TeleportOptions& options = {}) {
  nv.validate();
  wcs.validate();
  noise.validate();
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::domain_error("teleport_oracle: eta not in [0,1]");

  TeleportStateResult res;
  res.input = wcs.qubit;

  const FockAmplitudeState photon_in =
      detail::wcs_input_state(wcs, eta, options);
  res.truncated_mass = photon_in.truncated_mass;

  std::array<SpinDensityMatrix, kNumPatterns> acc{};
  std::array<double, kNumPatterns> prob{};
  for (const auto& sc : detail::nv_scenarios(nv, /*with_spin=*/true)) {
    const auto joint = beam_splitter(tensor_product(photon_in, sc.state));
    const DetectionResult det = detect(joint, noise);
    for (int bits = 0; bits < kNumPatterns; ++bits) {
      const double p = sc.weight * det[bits].probability;
      if (p <= 0.0) continue;
      prob[bits] += p;
      acc[bits].accumulate(det[bits].rho, p);
    }
  }
  for (int bits = 0; bits < kNumPatterns; ++bits) {
    res.patterns[bits].pattern = pattern_from_bits(bits);
    res.patterns[bits].probability = prob[bits];
    if (prob[bits] > 0.0) res.patterns[bits].rho = acc[bits].normalized();
  }

  const auto [t0, t1] = ideal_teleported_state(wcs.qubit);
  SpinDensityMatrix combined;
  double mass = 0.0;
  for (int cls = 0; cls < 2; ++cls) {
    SpinDensityMatrix rho{};
    double m = 0.0;
    for (int bits = 0; bits < kNumPatterns; ++bits) {
      if (herald(pattern_from_bits(bits)) != static_cast<HeraldClass>(cls))
        continue;
      m += prob[bits];
      rho.accumulate(acc[bits], 1.0);
    }
    res.herald_prob[cls] = m;
    if (m <= 0.0) continue;
    if (options.feedforward && cls == static_cast<int>(HeraldClass::PsiMinus))
      rho = rho.phase_flipped();
    res.herald_rho[cls] = rho.normalized();
    res.fidelity_per_class[cls] = res.herald_rho[cls].fidelity_with(t0, t1);
    combined.accumulate(rho, 1.0);
    mass += m;
  }
  res.herald_mass = mass;
  if (mass > 0.0) {
    res.no_herald = false;
    res.fidelity = combined.normalized().fidelity_with(t0, t1);
  }
  return res;
}

/// The six-state tomography set. F_avg averages the three Bloch axes,
/// each axis being the mean of its two antipodal preparations.
struct SixStateResult {
  std::array<TeleportStateResult, 6> states;
  double f_avg = std::numeric_limits<double>::quiet_NaN();
};

inline const std::array<InputQubit, 6>& cardinal_states() {
  static const std::array<InputQubit, 6> s = {
      InputQubit::plus_z(), InputQubit::minus_z(), InputQubit::plus_x(),
      InputQubit::minus_x(), InputQubit::plus_y(), InputQubit::minus_y()};
  return s;
}

inline SixStateResult teleport_oracle_six(const NvParams& nv,
                                          const WcsParams& wcs_template,
                                          double eta, const NoiseParams& noise,
                                          const TeleportOptions& options = {}) {
  SixStateResult out;
  WcsParams wcs = wcs_template;
  for (std::size_t i = 0; i < 6; ++i) {
    wcs.qubit = cardinal_states()[i];
    out.states[i] = teleport_oracle(nv, wcs, eta, noise, options);
  }
  double f_axes = 0.0;
  for (int axis = 0; axis < 3; ++axis)
    f_axes += (out.states[2 * axis].fidelity +
               out.states[2 * axis + 1].fidelity) /
              2.0;
  out.f_avg = f_axes / 3.0;
  return out;
}

/// Distribution of the single-window threshold outcome (bit 0: D1,
/// bit 1: D2) for one interference window where the coherent pulse and the
/// emitter photon overlap. Setting mu = 0 gives the emitter-only window,
/// p_nv = 0 the coherent-only window; both are used by the experiment
/// simulator for the offset (distinguishable) train.
inline std::array<double, 4> window_click_distribution(
    const NvParams& nv, double mu, double eta, const NoiseParams& noise) {
  nv.validate();
  noise.validate();
  if (!(mu >= 0.0))
    throw std::domain_error("window_click_distribution: mu < 0");
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::domain_error("window_click_distribution: eta not in [0,1]");

  const auto [a_m, a_o] = split_indistinguishability(std::sqrt(mu), eta);
  const FockAmplitudeState wcs = coherent_product(
      {{mode_index(TimeBin::Early, InputPort::AIn, DistClass::Matched), a_m},
       {mode_index(TimeBin::Early, InputPort::AIn, DistClass::OrthogonalWcs),
        a_o}},
      kSourcePhotonCap);

  std::array<double, 4> dist{};
  for (const auto& sc : detail::nv_scenarios(nv, /*with_spin=*/false)) {
    const auto joint = beam_splitter(tensor_product(wcs, sc.state));
    const DetectionResult det = detect(joint, noise);
    for (int bits = 0; bits < kNumPatterns; ++bits)
      dist[bits & 3] += sc.weight * det[bits].probability;
  }
  // The late-bin window carries only dark counts here; marginalizing the
  // late outcome leaves the exact early-window distribution.
  return dist;
}

struct TpqiResult {
  double p_ind = 0.0;
  double p_dist = 0.0;
  double visibility = 0.0;
};

/// Two-photon interference coincidence probabilities: p_ind with the
/// configured overlap, p_dist from the identical enumeration with the
/// overlap forced to zero, and V = 1 - p_ind/p_dist.
inline TpqiResult tpqi_oracle(const NvParams& nv, double mu, double eta,
                              const NoiseParams& noise) {
  TpqiResult r;
  const auto ind = window_click_distribution(nv, mu, eta, noise);
  const auto dist = window_click_distribution(nv, mu, 0.0, noise);
  r.p_ind = ind[3];
  r.p_dist = dist[3];
  if (!(r.p_dist > 0.0))
    throw numerical_error("tpqi_oracle: p_dist is zero, visibility undefined");
  r.visibility = 1.0 - r.p_ind / r.p_dist;
  return r;
}

/// Normalized zero-delay autocorrelation from measured probabilities.
inline double g2_estimate(double p_coinc, double p_d1, double p_d2) {
  if (!(p_d1 > 0.0) || !(p_d2 > 0.0))
    throw std::domain_error("g2_estimate: single-detector rates must be > 0");
  return p_coinc / (p_d1 * p_d2);
}

}  // namespace qiface
