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
#include <stdexcept>

#include "qiface/fock.hpp"
#include "qiface/spin.hpp"

namespace qiface {

/// Detector background: probability of a dark click per detector per
/// detection window, independent across detectors and windows.
struct NoiseParams {
  double p_noise = 0.0;

  void validate() const {
    if (!(p_noise >= 0.0 && p_noise < 1.0))
      throw std::invalid_argument("NoiseParams: p_noise must be in [0,1)");
  }
};

enum class WindowClick : int { None = 0, D1 = 1, D2 = 2, Both = 3 };

/// Threshold-detector outcome of the two time-bin windows.
struct ClickPattern {
  WindowClick early = WindowClick::None;
  WindowClick late = WindowClick::None;
  auto operator<=>(const ClickPattern&) const = default;
};

enum class HeraldClass : int { PsiPlus = 0, PsiMinus = 1, Invalid = 2 };

/// Bell-state classification of a click pattern: two clicks on the same
/// detector herald Psi+, on different detectors Psi-. Anything without
/// exactly one click per window (including double clicks) is Invalid.
inline HeraldClass herald(const ClickPattern& p) {
  const bool early_single =
      p.early == WindowClick::D1 || p.early == WindowClick::D2;
  const bool late_single =
      p.late == WindowClick::D1 || p.late == WindowClick::D2;
  if (!early_single || !late_single) return HeraldClass::Invalid;
  return p.early == p.late ? HeraldClass::PsiPlus : HeraldClass::PsiMinus;
}

// Dense 4-bit pattern index used internally and by the Monte Carlo layer:
// bit 0 early D1, bit 1 early D2, bit 2 late D1, bit 3 late D2.
inline constexpr int kNumPatterns = 16;

inline ClickPattern pattern_from_bits(int bits) {
  ClickPattern p;
  p.early = static_cast<WindowClick>(bits & 3);
  p.late = static_cast<WindowClick>((bits >> 2) & 3);
  return p;
}

inline int pattern_to_bits(const ClickPattern& p) {
  return static_cast<int>(p.early) | (static_cast<int>(p.late) << 2);
}

/// One row of the detection distribution. rho is the normalized spin state
/// conditioned on the pattern (maximally mixed placeholder when the
/// pattern has zero probability or the input carries no spin).
struct DetectEntry {
  ClickPattern pattern;
  double probability = 0.0;
  SpinDensityMatrix rho = SpinDensityMatrix::maximally_mixed();
};

using DetectionResult = std::array<DetectEntry, kNumPatterns>;

/// Threshold detection of all four (window, detector) cells with exact
/// dark-count convolution: every photon-induced pattern is promoted to
/// each of its observable supersets with weight q^added (1-q)^quiet.
/// For a normalized input the probabilities sum to 1; for a state carrying
/// truncated source mass they sum to the surviving norm. Spin-free
/// amplitude mass enters the conditional states as I/2.
inline DetectionResult detect(const FockAmplitudeState& state,
                              const NoiseParams& noise) {
  noise.validate();
  const double q = noise.p_noise;

  // Per-pattern unnormalized spin accumulators from photons alone.
  std::array<SpinDensityMatrix, kNumPatterns> photon_acc{};
  std::array<bool, kNumPatterns> touched{};

  auto flush = [&](const Occupation& occ, complexd v0, complexd v1,
                   complexd vn) {
    int bits = 0;
    for (int bin = 0; bin < kNumBins; ++bin) {
      for (int det = 0; det < kNumPorts; ++det) {
        int n = 0;
        for (int cls = 0; cls < kNumClasses; ++cls)
          n += occ[mode_slot(bin, det, cls)];
        if (n > 0) bits |= 1 << (bin * 2 + det);
      }
    }
    photon_acc[bits].accumulate_outer(v0, v1, 1.0);
    const double mixed = std::norm(vn);
    photon_acc[bits].m[0][0] += mixed / 2.0;
    photon_acc[bits].m[1][1] += mixed / 2.0;
    touched[bits] = true;
  };

  // Terms are ordered by (occ, spin), so amplitudes sharing an occupation
  // are adjacent and form one conditional spin vector.
  auto it = state.terms.begin();
  while (it != state.terms.end()) {
    const Occupation& occ = it->first.occ;
    complexd v0 = 0.0, v1 = 0.0, vn = 0.0;
    for (; it != state.terms.end() && it->first.occ == occ; ++it) {
      if (it->first.spin == 0)
        v0 = it->second;
      else if (it->first.spin == 1)
        v1 = it->second;
      else
        vn = it->second;
    }
    flush(occ, v0, v1, vn);
  }

  DetectionResult out;
  std::array<SpinDensityMatrix, kNumPatterns> obs_acc{};
  for (int pw = 0; pw < kNumPatterns; ++pw) {
    if (!touched[pw]) continue;
    // Promote to every superset pattern via independent dark counts.
    for (int op = 0; op < kNumPatterns; ++op) {
      if ((pw & op) != pw) continue;
      double w = 1.0;
      for (int cell = 0; cell < 4; ++cell) {
        const bool lit = (pw >> cell) & 1;
        const bool seen = (op >> cell) & 1;
        if (!lit) w *= seen ? q : (1.0 - q);
      }
      if (w > 0.0) obs_acc[op].accumulate(photon_acc[pw], w);
    }
  }
  for (int op = 0; op < kNumPatterns; ++op) {
    out[op].pattern = pattern_from_bits(op);
    out[op].probability = obs_acc[op].trace();
    if (out[op].probability > 0.0) out[op].rho = obs_acc[op].normalized();
  }
  return out;
}

}  // namespace qiface
