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

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace qiface {

using complexd = std::complex<double>;

/// Time-bin qubit a|E> + b e^{i theta}|L> with real nonnegative weights a, b.
/// The six cardinal states are the usual Bloch axes with |E> ~ |0>.
struct InputQubit {
  double a = 1.0;
  double b = 0.0;
  double theta = 0.0;

  static InputQubit plus_z() { return {1.0, 0.0, 0.0}; }
  static InputQubit minus_z() { return {0.0, 1.0, 0.0}; }
  static InputQubit plus_x() { return equatorial(0.0); }
  static InputQubit minus_x() { return equatorial(std::numbers::pi); }
  static InputQubit plus_y() { return equatorial(std::numbers::pi / 2); }
  static InputQubit minus_y() { return equatorial(-std::numbers::pi / 2); }
  static InputQubit equatorial(double theta) {
    const double r = 1.0 / std::numbers::sqrt2;
    return {r, r, theta};
  }

  /// True when the state has support on both poles (a Z-basis leak slot
  /// exists only for pole states).
  bool is_pole() const { return a == 0.0 || b == 0.0; }

  complexd amp_early() const { return a; }
  complexd amp_late() const { return b * std::polar(1.0, theta); }

  void validate() const {
    if (!(std::abs(a * a + b * b - 1.0) <= 1e-12))
      throw std::invalid_argument("InputQubit: |a|^2+|b|^2 must be 1");
    if (!std::isfinite(theta))
      throw std::invalid_argument("InputQubit: theta must be finite");
  }
};

/// Weak-coherent-state qubit parameters. mu is the mean photon number of
/// the main pulse; pole states carry an extra coherent leak of mean
/// leak_epsilon*mu in the orthogonal time bin (leak adds on top of mu, it
/// does not renormalize: leakage is unwanted extra light). theta is an
/// additional preparation phase applied on top of the qubit's own phase.
struct WcsParams {
  double mu = 0.0;
  double leak_epsilon = 0.0;
  double theta = 0.0;
  InputQubit qubit = InputQubit::plus_x();

  void validate() const {
    if (!(mu >= 0.0)) throw std::domain_error("WcsParams: mu must be >= 0");
    if (!(leak_epsilon >= 0.0 && leak_epsilon < 1.0))
      throw std::invalid_argument("WcsParams: leak_epsilon must be in [0,1)");
    if (!std::isfinite(theta))
      throw std::invalid_argument("WcsParams: theta must be finite");
    qubit.validate();
  }
};

/// Single-photon-emitter parameters: detection probability per excitation,
/// autocorrelation at zero delay, and double-excitation probability.
/// g2 and p_de are independent knobs; p_de_from_g2 provides the convention
/// that makes the emitter-only two-detector coincidence equal (1/4)p^2 g2.
struct NvParams {
  double p_nv = 0.0;
  double g2 = 0.0;
  double p_de = 0.0;

  void validate() const {
    if (!(p_nv >= 0.0 && p_nv <= 1.0))
      throw std::invalid_argument("NvParams: p_nv must be in [0,1]");
    if (!(g2 >= 0.0)) throw std::invalid_argument("NvParams: g2 must be >= 0");
    if (!(p_de >= 0.0 && p_de <= 1.0))
      throw std::invalid_argument("NvParams: p_de must be in [0,1]");
  }
};

inline double p_de_from_g2(double g2, double p_nv) { return g2 * p_nv / 2.0; }

/// Photon-number probabilities 0..n_max plus the mass above n_max.
/// Invariant: sum(probs) + truncation_tail == 1 within 1e-12.
struct PhotonNumberDist {
  std::vector<double> probs;
  double truncation_tail = 0.0;
};

/// Poisson photon-number distribution of a coherent pulse with mean mu.
inline PhotonNumberDist wcs_photon_number_dist(double mu, int n_max) {
  if (!(mu >= 0.0)) throw std::domain_error("wcs_photon_number_dist: mu < 0");
  if (n_max < 0)
    throw std::invalid_argument("wcs_photon_number_dist: n_max < 0");
  PhotonNumberDist d;
  d.probs.resize(static_cast<std::size_t>(n_max) + 1);
  double term = std::exp(-mu);  // P(0)
  double sum = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    d.probs[static_cast<std::size_t>(n)] = term;
    sum += term;
    term *= mu / (n + 1);
  }
  d.truncation_tail = std::max(0.0, 1.0 - sum);
  return d;
}

/// Emitter photon-number distribution: [1-p, p(1-p_de), p*p_de], no tail.
inline PhotonNumberDist nv_photon_number_dist(const NvParams& p) {
  p.validate();
  PhotonNumberDist d;
  d.probs = {1.0 - p.p_nv, p.p_nv * (1.0 - p.p_de), p.p_nv * p.p_de};
  d.truncation_tail = 0.0;
  return d;
}

/// Coherent amplitudes of the prepared time-bin qubit, (alpha_E, alpha_L).
/// Equatorial states split mu evenly with the relative phase; pole states
/// put mu in their bin and sqrt(leak_epsilon*mu) in the other, so the total
/// mean photon number is mu for equatorial and mu(1+leak_epsilon) for poles.
inline std::pair<complexd, complexd> prepare_wcs_amplitudes(
    const WcsParams& w) {
  w.validate();
  const complexd extra = std::polar(1.0, w.theta);
  const double root_mu = std::sqrt(w.mu);
  if (w.qubit.is_pole()) {
    const double leak = std::sqrt(w.leak_epsilon * w.mu);
    if (w.qubit.b == 0.0) return {root_mu, leak * extra};
    return {leak, root_mu * extra};
  }
  return {root_mu * w.qubit.amp_early(), root_mu * w.qubit.amp_late() * extra};
}

/// Emission branches of one emitter excitation round, a probability
/// partition over what left the device:
///   - entangled:  1/sqrt2 (|1>|E> + |0>|L>), spin-photon Bell pair
///   - double:     as above with a second, fully distinguishable photon in
///                 the same bin as the first (re-excitation within the
///                 pulse destroys coherence)
///   - no_photon:  the photon was emitted but lost before detection, so the
///                 spin is left fully mixed (tracing out the lost photon)
struct NvEmissionState {
  double w_entangled = 0.0;
  double w_double = 0.0;
  double w_no_photon = 0.0;
};

inline NvEmissionState nv_emission_state(const NvParams& p) {
  p.validate();
  return {p.p_nv * (1.0 - p.p_de), p.p_nv * p.p_de, 1.0 - p.p_nv};
}

}  // namespace qiface
