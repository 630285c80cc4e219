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
#include <compare>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qiface/sources.hpp"

namespace qiface {

// Photonic mode bookkeeping: 2 time bins x 2 ports x 3 distinguishability
// classes. The port slot holds the input port (A/B) before the beam
// splitter and the detector (D1/D2) after it; beam_splitter() is the only
// operation that reinterprets it.
enum class TimeBin : int { Early = 0, Late = 1 };
enum class InputPort : int { AIn = 0, BIn = 1 };
enum class Detector : int { D1 = 0, D2 = 1 };
enum class DistClass : int { Matched = 0, OrthogonalWcs = 1, OrthogonalNv = 2 };

inline constexpr int kNumBins = 2;
inline constexpr int kNumPorts = 2;
inline constexpr int kNumClasses = 3;
inline constexpr int kNumModes = kNumBins * kNumPorts * kNumClasses;

// Photons per source before any beam splitter; terms beyond this are
// truncated at state construction and their mass is reported, never
// silently dropped.
inline constexpr int kSourcePhotonCap = 3;

// Hard bound on any single occupation number (both sources together).
inline constexpr int kMaxOccupancy = 2 * kSourcePhotonCap;

inline constexpr int mode_slot(int bin, int port, int cls) {
  return bin * (kNumPorts * kNumClasses) + port * kNumClasses + cls;
}
inline constexpr int mode_index(TimeBin b, InputPort p, DistClass c) {
  return mode_slot(static_cast<int>(b), static_cast<int>(p),
                   static_cast<int>(c));
}
inline constexpr int mode_index(TimeBin b, Detector d, DistClass c) {
  return mode_slot(static_cast<int>(b), static_cast<int>(d),
                   static_cast<int>(c));
}

using Occupation = std::array<std::uint8_t, kNumModes>;

inline constexpr std::int8_t kNoSpin = -1;

/// One basis label: photonic occupation numbers plus the spin of the
/// remote two-level system (kNoSpin when the scenario carries no spin).
struct FockTerm {
  Occupation occ{};
  std::int8_t spin = kNoSpin;
  auto operator<=>(const FockTerm&) const = default;
};

inline int total_photons(const Occupation& occ) {
  int n = 0;
  for (auto v : occ) n += v;
  return n;
}

inline int photons_in(const Occupation& occ, TimeBin b, DistClass c) {
  return occ[mode_index(b, InputPort::AIn, c)] +
         occ[mode_index(b, InputPort::BIn, c)];
}

/// Pure photonic+spin state as a sparse amplitude map. States built from a
/// truncated source carry the dropped probability mass in truncated_mass.
/// std::map keeps iteration order deterministic, which keeps every
/// floating-point reduction over terms bit-stable.
struct FockAmplitudeState {
  std::map<FockTerm, complexd> terms;
  double truncated_mass = 0.0;

  static FockAmplitudeState vacuum(std::int8_t spin = kNoSpin) {
    FockAmplitudeState s;
    s.terms[{Occupation{}, spin}] = 1.0;
    return s;
  }

  double norm_sq() const {
    double n = 0.0;
    for (const auto& [k, a] : terms) n += std::norm(a);
    return n;
  }

  void add(const FockTerm& t, complexd amp) {
    auto [it, inserted] = terms.emplace(t, amp);
    if (!inserted) it->second += amp;
  }
};

/// Partial-indistinguishability amplitude split: a coherent amplitude
/// alpha decomposes exactly into sqrt(eta)*alpha on the matched mode and
/// sqrt(1-eta)*alpha on the orthogonal one (coherent states factorize
/// across orthogonal mode decompositions).
inline std::pair<complexd, complexd> split_indistinguishability(complexd alpha,
                                                                double eta) {
  if (!(eta >= 0.0 && eta <= 1.0))
    throw std::domain_error("split_indistinguishability: eta not in [0,1]");
  return {std::sqrt(eta) * alpha, std::sqrt(1.0 - eta) * alpha};
}

namespace detail {

inline const std::array<double, kMaxOccupancy + 1>& factorials() {
  static const auto table = [] {
    std::array<double, kMaxOccupancy + 1> f{};
    f[0] = 1.0;
    for (int n = 1; n <= kMaxOccupancy; ++n) f[n] = f[n - 1] * n;
    return f;
  }();
  return table;
}

inline double binom(int n, int k) {
  const auto& f = factorials();
  return f[n] / (f[k] * f[n - k]);
}

}  // namespace detail

/// Truncated multimode coherent state over the given (mode, alpha) pairs,
/// keeping configurations with at most `cap` photons in total. Amplitudes
/// are those of the untruncated product state, so the missing norm is
/// exactly the truncated probability mass.
inline FockAmplitudeState coherent_product(
    const std::vector<std::pair<int, complexd>>& alphas, int cap,
    std::int8_t spin = kNoSpin) {
  FockAmplitudeState out;
  double prefactor = 0.0;
  for (const auto& [m, a] : alphas) prefactor += std::norm(a);
  const double root_vac = std::exp(-prefactor / 2.0);

  struct Partial {
    Occupation occ{};
    complexd amp;
    int used;
  };
  std::vector<Partial> partials{{Occupation{}, root_vac, 0}};
  for (const auto& [m, a] : alphas) {
    std::vector<Partial> next;
    for (const auto& p : partials) {
      complexd amp = p.amp;
      for (int n = 0; p.used + n <= cap; ++n) {
        if (n > 0) amp *= a / std::sqrt(static_cast<double>(n));
        Partial q = p;
        q.occ[static_cast<std::size_t>(m)] =
            static_cast<std::uint8_t>(q.occ[static_cast<std::size_t>(m)] + n);
        q.amp = amp;
        q.used = p.used + n;
        next.push_back(q);
      }
    }
    partials = std::move(next);
  }
  for (const auto& p : partials) out.add({p.occ, spin}, p.amp);
  out.truncated_mass = std::max(0.0, 1.0 - out.norm_sq());
  return out;
}

/// Exactly one photon distributed over the given modes with the given
/// (normalized) amplitudes; the ideal-single-photon input of the protocol.
inline FockAmplitudeState single_photon_state(
    const std::vector<std::pair<int, complexd>>& amps,
    std::int8_t spin = kNoSpin) {
  double n = 0.0;
  for (const auto& [m, a] : amps) n += std::norm(a);
  if (!(n > 0.0))
    throw std::invalid_argument("single_photon_state: zero amplitude");
  FockAmplitudeState out;
  for (const auto& [m, a] : amps) {
    Occupation occ{};
    occ[static_cast<std::size_t>(m)] = 1;
    out.add({occ, spin}, a / std::sqrt(n));
  }
  return out;
}

/// Tensor product of two states; at most one factor may carry a spin.
inline FockAmplitudeState tensor_product(const FockAmplitudeState& x,
                                         const FockAmplitudeState& y) {
  FockAmplitudeState out;
  for (const auto& [kx, ax] : x.terms) {
    for (const auto& [ky, ay] : y.terms) {
      if (kx.spin != kNoSpin && ky.spin != kNoSpin)
        throw std::invalid_argument("tensor_product: two spins");
      FockTerm t;
      t.spin = kx.spin != kNoSpin ? kx.spin : ky.spin;
      for (int m = 0; m < kNumModes; ++m) {
        const int n = kx.occ[m] + ky.occ[m];
        if (n > kMaxOccupancy)
          throw std::domain_error("tensor_product: occupation above cap");
        t.occ[m] = static_cast<std::uint8_t>(n);
      }
      out.add(t, ax * ay);
    }
  }
  // Tail masses of independent sources add at first order; the cross term
  // is quadratic in already-small tails and is absorbed conservatively.
  out.truncated_mass =
      std::min(1.0, x.truncated_mass + y.truncated_mass);
  return out;
}

/// Balanced beam splitter acting per (time bin, class):
///   a^dag -> (c^dag + d^dag)/sqrt2,  b^dag -> (c^dag - d^dag)/sqrt2.
/// Photon number per (bin, class) and the state norm are conserved; the
/// port slot switches meaning from input port to detector.
inline FockAmplitudeState beam_splitter(const FockAmplitudeState& in) {
  const auto& fact = detail::factorials();
  FockAmplitudeState out;
  out.truncated_mass = in.truncated_mass;

  struct Partial {
    Occupation occ{};
    double coeff;
  };
  for (const auto& [key, amp] : in.terms) {
    double in_norm = 1.0;
    for (int m = 0; m < kNumModes; ++m) {
      if (key.occ[m] > kMaxOccupancy)
        throw std::domain_error("beam_splitter: occupation above cap");
      in_norm *= fact[key.occ[m]];
    }
    // An output detector mode can receive every photon of its (bin, class),
    // so the pairwise sum must also respect the factorial-table bound.
    for (int bin = 0; bin < kNumBins; ++bin)
      for (int cls = 0; cls < kNumClasses; ++cls)
        if (key.occ[mode_slot(bin, 0, cls)] + key.occ[mode_slot(bin, 1, cls)] >
            kMaxOccupancy)
          throw std::domain_error("beam_splitter: occupation above cap");
    // Monomial coefficient of the input term: amp / sqrt(prod n_m!).
    std::vector<Partial> partials{{Occupation{}, 1.0}};
    for (int bin = 0; bin < kNumBins; ++bin) {
      for (int cls = 0; cls < kNumClasses; ++cls) {
        for (int port = 0; port < kNumPorts; ++port) {
          const int n = key.occ[mode_slot(bin, port, cls)];
          if (n == 0) continue;
          const double sign = port == 0 ? 1.0 : -1.0;
          const double scale = std::pow(0.5, n / 2.0);
          std::vector<Partial> next;
          next.reserve(partials.size() * static_cast<std::size_t>(n + 1));
          for (const auto& p : partials) {
            for (int k = 0; k <= n; ++k) {
              // k photons to D1, n-k to D2, with the B-port sign on D2.
              Partial q = p;
              q.occ[mode_slot(bin, 0, cls)] =
                  static_cast<std::uint8_t>(q.occ[mode_slot(bin, 0, cls)] + k);
              q.occ[mode_slot(bin, 1, cls)] = static_cast<std::uint8_t>(
                  q.occ[mode_slot(bin, 1, cls)] + n - k);
              q.coeff *= detail::binom(n, k) * scale *
                         (((n - k) % 2 == 1 && sign < 0.0) ? -1.0 : 1.0);
              next.push_back(q);
            }
          }
          partials = std::move(next);
        }
      }
    }
    const complexd base = amp / std::sqrt(in_norm);
    for (const auto& p : partials) {
      double out_norm = 1.0;
      for (int m = 0; m < kNumModes; ++m) out_norm *= fact[p.occ[m]];
      out.add({p.occ, key.spin}, base * p.coeff * std::sqrt(out_norm));
    }
  }
  return out;
}

}  // namespace qiface
