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
#include <cstdint>

namespace qiface {

/// Finalizer of the splitmix64 generator (Steele, Lea, Flood 2014).
/// Used both as a standalone stream and as the mixer that derives
/// independent child seeds from (seed, index) pairs.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256++ 1.0 (Blackman, Vigna 2019). Chosen over std:: distributions
/// because its output sequence is fixed by the algorithm, not by the
/// standard library implementation; results must be stable across platforms
/// and releases.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  /// Seeds the four state words through splitmix64, per the reference
  /// implementation's recommendation. A zero seed is valid.
  explicit Xoshiro256pp(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64_next(sm);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) from the top 53 bits. Exact dyadic rational;
  /// identical on every IEEE-754 platform.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_;
};

/// Derives the RNG stream for one Monte Carlo shot. Streams for distinct
/// (seed, shot) pairs are statistically independent, so shots may be
/// executed on any number of threads in any order with identical results.
inline Xoshiro256pp shot_stream(std::uint64_t seed, std::uint64_t shot) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64_next(s);
  s = a ^ (shot * 0x9e3779b97f4a7c15ULL + 0x243f6a8885a308d3ULL);
  return Xoshiro256pp(splitmix64_next(s));
}

}  // namespace qiface
