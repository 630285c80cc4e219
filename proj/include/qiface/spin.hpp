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
#include <complex>
#include <stdexcept>

#include "qiface/sources.hpp"

namespace qiface {

/// 2x2 spin state of the receiving qubit, not necessarily normalized while
/// being accumulated; normalized() enforces the density-matrix invariants.
struct SpinDensityMatrix {
  // m[r][c], basis {|0>, |1>}.
  std::array<std::array<complexd, 2>, 2> m{{{complexd{0.0}, complexd{0.0}},
                                            {complexd{0.0}, complexd{0.0}}}};

  double trace() const { return (m[0][0] + m[1][1]).real(); }

  static SpinDensityMatrix maximally_mixed() {
    SpinDensityMatrix r;
    r.m[0][0] = 0.5;
    r.m[1][1] = 0.5;
    return r;
  }

  /// rho += w |v><v| for the (possibly unnormalized) spin vector v.
  void accumulate_outer(complexd v0, complexd v1, double w) {
    m[0][0] += w * v0 * std::conj(v0);
    m[0][1] += w * v0 * std::conj(v1);
    m[1][0] += w * v1 * std::conj(v0);
    m[1][1] += w * v1 * std::conj(v1);
  }

  void accumulate(const SpinDensityMatrix& o, double w) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m[r][c] += w * o.m[r][c];
  }

  /// Z rho Z: the feedforward phase-flip correction.
  SpinDensityMatrix phase_flipped() const {
    SpinDensityMatrix r = *this;
    r.m[0][1] = -r.m[0][1];
    r.m[1][0] = -r.m[1][0];
    return r;
  }

  SpinDensityMatrix normalized() const {
    const double t = trace();
    if (!(t > 0.0))
      throw std::domain_error("SpinDensityMatrix: trace must be positive");
    SpinDensityMatrix r = *this;
    for (auto& row : r.m)
      for (auto& e : row) e /= t;
    return r;
  }

  /// <psi|rho|psi> for the pure state v0|0> + v1|1>.
  double fidelity_with(complexd v0, complexd v1) const {
    const complexd f = std::conj(v0) * (m[0][0] * v0 + m[0][1] * v1) +
                       std::conj(v1) * (m[1][0] * v0 + m[1][1] * v1);
    return f.real();
  }

  double bloch_x() const { return 2.0 * m[0][1].real(); }
  double bloch_y() const { return -2.0 * m[0][1].imag(); }
  double bloch_z() const { return (m[0][0] - m[1][1]).real(); }

  bool is_valid(double tol = 1e-10) const {
    if (std::abs(trace() - 1.0) > tol) return false;
    if (std::abs(m[0][0].imag()) > tol || std::abs(m[1][1].imag()) > tol)
      return false;
    if (std::abs(m[0][1] - std::conj(m[1][0])) > tol) return false;
    // Eigenvalues of a Hermitian 2x2: t/2 +- sqrt((t/2)^2 - det).
    const double t = trace();
    const double det =
        (m[0][0] * m[1][1] - m[0][1] * m[1][0]).real();
    const double disc = std::max(0.0, t * t / 4.0 - det);
    return t / 2.0 - std::sqrt(disc) >= -tol;
  }
};

/// Ideal teleported spin state for a given input qubit: the protocol maps
/// a|E> + b e^{i theta}|L> onto a|0> + b e^{i theta}|1>.
inline std::pair<complexd, complexd> ideal_teleported_state(
    const InputQubit& q) {
  return {q.amp_early(), q.amp_late()};
}

}  // namespace qiface
