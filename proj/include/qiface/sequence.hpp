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

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "qiface/analytics.hpp"
#include "qiface/errors.hpp"
#include "qiface/oracle.hpp"
#include "qiface/rng.hpp"

// Discrete-event reproduction of the experimental sequences. The Monte
// Carlo layer never re-derives physics: per-window outcome probabilities
// come from the enumeration oracle, so sampling adds only multinomial
// statistics on top of exact distributions.
//
// Determinism contract: every shot draws from its own RNG stream derived
// from (seed, shot index), and aggregation is integer-count addition, so
// results are bit-identical for any number of worker threads.

namespace qiface {

struct SequenceConfig {
  int bins_per_train = 10;
  int train_repetitions = 100;
  double bin_spacing_ns = 500.0;  // not published; any value > offset works
  double distinguishable_offset_ns = 50.0;
  double coincidence_window_ns = 30.0;
  int teleport_attempt_cap = 50;
  double herald_window_hw_ns = 50.0;
  double herald_window_ns = 20.0;
  double time_bin_separation_ns = 300.0;
  double cr_pass_prob = 1.0;

  void validate() const {
    if (bins_per_train <= 0 || train_repetitions <= 0 ||
        teleport_attempt_cap <= 0)
      throw std::invalid_argument("SequenceConfig: counts must be positive");
    if (!(bin_spacing_ns > 0.0) || !(distinguishable_offset_ns > 0.0) ||
        !(coincidence_window_ns > 0.0) || !(herald_window_hw_ns > 0.0) ||
        !(herald_window_ns > 0.0) || !(time_bin_separation_ns > 0.0))
      throw std::invalid_argument("SequenceConfig: times must be positive");
    if (herald_window_ns > herald_window_hw_ns)
      throw std::invalid_argument(
          "SequenceConfig: analysis window exceeds hardware window");
    if (!(distinguishable_offset_ns < bin_spacing_ns))
      throw std::invalid_argument(
          "SequenceConfig: offset must be smaller than bin spacing");
    if (!(cr_pass_prob >= 0.0 && cr_pass_prob <= 1.0))
      throw std::invalid_argument(
          "SequenceConfig: cr_pass_prob not in [0,1]");
  }

  double train_duration_ns() const { return bins_per_train * bin_spacing_ns; }
  /// Sequence duration of one CR-gated shot (all repetitions, both trains).
  double shot_duration_ns() const {
    return 2.0 * train_repetitions * train_duration_ns();
  }
};

struct TimetagRecord {
  std::uint64_t shot = 0;
  Detector detector = Detector::D1;
  double time_ns = 0.0;
};

/// Which windows a distinguishable-train coincidence joined.
enum class WindowCombo : int { NvWindow = 0, ConvertedWindow = 1, Combined = 2 };

/// Coincidence counts per time-bin difference, delta in
/// [-(bins-1), bins-1]. The distinguishable sequence additionally splits
/// each delta by window combination.
struct BinDiffHistogram {
  int bins_per_train = 10;
  std::vector<std::int64_t> counts;
  std::array<std::vector<std::int64_t>, 3> combo_counts;

  explicit BinDiffHistogram(int bins = 10)
      : bins_per_train(bins),
        counts(static_cast<std::size_t>(2 * bins - 1), 0) {
    for (auto& c : combo_counts)
      c.assign(static_cast<std::size_t>(2 * bins - 1), 0);
  }

  std::int64_t& at(int delta) {
    return counts[static_cast<std::size_t>(delta + bins_per_train - 1)];
  }
  std::int64_t at(int delta) const {
    return counts[static_cast<std::size_t>(delta + bins_per_train - 1)];
  }
  std::int64_t& combo_at(WindowCombo c, int delta) {
    return combo_counts[static_cast<int>(c)]
                       [static_cast<std::size_t>(delta + bins_per_train - 1)];
  }
  std::int64_t combo_at(WindowCombo c, int delta) const {
    return combo_counts[static_cast<int>(c)]
                       [static_cast<std::size_t>(delta + bins_per_train - 1)];
  }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
  }

  void merge(const BinDiffHistogram& o) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < counts.size(); ++i)
        combo_counts[c][i] += o.combo_counts[c][i];
  }
};

namespace detail {

// One detected click inside a train, before pairing.
struct TrainClick {
  int bin;
  int window;  // 0: emitter/main window, 1: offset (converted) window
  Detector det;
};

// Pairing kernel shared by the simulator and the timetag re-analysis:
// every (D1 click, D2 click) combination in one train contributes one
// coincidence at delta = bin(D2) - bin(D1).
inline void pair_train_clicks(const std::vector<TrainClick>& clicks,
                              bool distinguishable_train,
                              BinDiffHistogram& hist) {
  for (const auto& c1 : clicks) {
    if (c1.det != Detector::D1) continue;
    for (const auto& c2 : clicks) {
      if (c2.det != Detector::D2) continue;
      const int delta = c2.bin - c1.bin;
      hist.at(delta) += 1;
      if (distinguishable_train) {
        WindowCombo combo = WindowCombo::Combined;
        if (c1.window == 0 && c2.window == 0) combo = WindowCombo::NvWindow;
        if (c1.window == 1 && c2.window == 1)
          combo = WindowCombo::ConvertedWindow;
        hist.combo_at(combo, delta) += 1;
      }
    }
  }
}

// Cumulative thresholds of a 4-outcome window distribution
// (bit 0: D1 clicked, bit 1: D2 clicked). Probability mass lost to the
// source truncation (~1e-11 at the default cap) falls on the both-click
// outcome, which is where 4+ photon events would land on threshold
// detectors anyway.
struct WindowSampler {
  double c1, c2, c3;
  explicit WindowSampler(const std::array<double, 4>& p)
      : c1(p[0]), c2(p[0] + p[1]), c3(p[0] + p[1] + p[2]) {}
  int sample(double u) const {
    if (u < c1) return 0;
    if (u < c2) return 1;
    if (u < c3) return 2;
    return 3;
  }
};

}  // namespace detail

struct TpqiRunResult {
  BinDiffHistogram ind_hist;
  BinDiffHistogram dist_hist;
  std::uint64_t shots = 0;
  std::uint64_t cr_passed = 0;
  bool has_estimate = false;
  double v_estimate = std::numeric_limits<double>::quiet_NaN();
  double v_stderr = std::numeric_limits<double>::quiet_NaN();
  std::vector<TimetagRecord> timetags;  // filled only when requested
};

/// Samples the full two-train interference sequence. Each shot is one
/// CR-gated block of `train_repetitions` repetitions of (overlapped train,
/// offset train). The visibility estimate compares the same-bin
/// coincidences of the two trains, V = 1 - c0_ind/c0_dist; its standard
/// error propagates the counting (Poisson/binomial) fluctuations of both.
///
/// Timing layout (exported with timetags): repetition r, train t, bin k
/// has its main window at (2r+t)*train_duration + k*bin_spacing, and the
/// offset train adds a converted window distinguishable_offset_ns later.
/// The offset train sees two noise windows per bin per detector, which
/// raises its dark contribution relative to the single-window oracle
/// p_dist by O(p_noise * (p_nv + mu)); negligible against any reachable
/// statistical error at realistic noise levels.
inline TpqiRunResult run_tpqi_experiment(
    const SequenceConfig& cfg, const NvParams& nv, double mu, double eta,
    const NoiseParams& noise, std::uint64_t seed, std::uint64_t shots,
    unsigned threads = 0, bool collect_timetags = false) {
  cfg.validate();
  if (shots == 0)
    throw std::invalid_argument("run_tpqi_experiment: zero shots");

  const detail::WindowSampler ind_sampler(
      window_click_distribution(nv, mu, eta, noise));
  const detail::WindowSampler nv_sampler(
      window_click_distribution(nv, 0.0, 0.0, noise));
  const detail::WindowSampler wcs_sampler(
      window_click_distribution(NvParams{}, mu, 0.0, noise));

  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, shots));

  struct Worker {
    BinDiffHistogram ind, dist;
    std::uint64_t cr_passed = 0;
    std::vector<TimetagRecord> tags;
    explicit Worker(int bins) : ind(bins), dist(bins) {}
  };
  std::vector<Worker> workers(threads, Worker(cfg.bins_per_train));

  auto run_range = [&](std::uint64_t begin, std::uint64_t end, Worker& w) {
    std::vector<detail::TrainClick> clicks;
    for (std::uint64_t shot = begin; shot < end; ++shot) {
      Xoshiro256pp rng = shot_stream(seed, shot);
      if (rng.uniform() >= cfg.cr_pass_prob) continue;
      ++w.cr_passed;
      for (int rep = 0; rep < cfg.train_repetitions; ++rep) {
        for (int train = 0; train < 2; ++train) {
          const double base =
              (2.0 * rep + train) * cfg.train_duration_ns();
          clicks.clear();
          for (int bin = 0; bin < cfg.bins_per_train; ++bin) {
            const double t0 = base + bin * cfg.bin_spacing_ns;
            auto emit = [&](int outcome, int window, double t) {
              if (outcome & 1) clicks.push_back({bin, window, Detector::D1});
              if (outcome & 2) clicks.push_back({bin, window, Detector::D2});
              if (collect_timetags && (outcome & 1))
                w.tags.push_back({shot, Detector::D1, t});
              if (collect_timetags && (outcome & 2))
                w.tags.push_back({shot, Detector::D2, t});
            };
            if (train == 0) {
              emit(ind_sampler.sample(rng.uniform()), 0, t0);
            } else {
              emit(nv_sampler.sample(rng.uniform()), 0, t0);
              emit(wcs_sampler.sample(rng.uniform()), 1,
                   t0 + cfg.distinguishable_offset_ns);
            }
          }
          detail::pair_train_clicks(clicks, train == 1,
                                    train == 0 ? w.ind : w.dist);
        }
      }
    }
  };

  {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (shots + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t b = t * chunk;
      const std::uint64_t e = std::min(shots, b + chunk);
      if (b >= e) break;
      pool.emplace_back(run_range, b, e, std::ref(workers[t]));
    }
    for (auto& th : pool) th.join();
  }

  TpqiRunResult res{BinDiffHistogram(cfg.bins_per_train),
                    BinDiffHistogram(cfg.bins_per_train), 0, 0,
                    false, 0.0, 0.0, {}};
  res.shots = shots;
  for (auto& w : workers) {
    res.ind_hist.merge(w.ind);
    res.dist_hist.merge(w.dist);
    res.cr_passed += w.cr_passed;
    res.timetags.insert(res.timetags.end(), w.tags.begin(), w.tags.end());
  }

  const double c_i = static_cast<double>(res.ind_hist.at(0));
  const double c_d = static_cast<double>(res.dist_hist.at(0));
  if (c_d > 0.0) {
    res.has_estimate = true;
    res.v_estimate = 1.0 - c_i / c_d;
    res.v_stderr =
        std::sqrt(c_i / (c_d * c_d) + c_i * c_i / (c_d * c_d * c_d));
  }
  return res;
}

/// Itemized re-analysis of a timetag stream with the same pairing kernel
/// the simulator uses. Records that do not fall into any window of the
/// configured sequence are rejected with a reason, never silently skipped.
struct TpqiHistograms {
  BinDiffHistogram ind_hist;
  BinDiffHistogram dist_hist;
  std::vector<std::string> rejected;
};

inline TpqiHistograms histogram_bin_difference(
    const std::vector<TimetagRecord>& tags, const SequenceConfig& cfg) {
  cfg.validate();
  TpqiHistograms out{BinDiffHistogram(cfg.bins_per_train),
                     BinDiffHistogram(cfg.bins_per_train), {}};

  struct Key {
    std::uint64_t shot;
    int rep, train;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<detail::TrainClick>> trains;

  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& rec = tags[i];
    const double dur = cfg.train_duration_ns();
    if (!(rec.time_ns >= 0.0) || rec.time_ns >= cfg.shot_duration_ns()) {
      out.rejected.push_back("record " + std::to_string(i) +
                             ": time outside sequence duration");
      continue;
    }
    const int slot = static_cast<int>(rec.time_ns / dur);
    const double in_train = rec.time_ns - slot * dur;
    const int bin = std::min(cfg.bins_per_train - 1,
                             static_cast<int>(in_train / cfg.bin_spacing_ns));
    const double in_bin = in_train - bin * cfg.bin_spacing_ns;
    const int train = slot % 2;
    int window = -1;
    if (in_bin < cfg.coincidence_window_ns) {
      window = 0;
    } else if (train == 1 &&
               in_bin >= cfg.distinguishable_offset_ns &&
               in_bin <
                   cfg.distinguishable_offset_ns + cfg.coincidence_window_ns) {
      window = 1;
    }
    if (window < 0) {
      out.rejected.push_back("record " + std::to_string(i) +
                             ": time not inside any detection window");
      continue;
    }
    trains[{rec.shot, slot / 2, train}].push_back(
        {bin, window, rec.detector});
  }
  for (const auto& [key, clicks] : trains)
    detail::pair_train_clicks(clicks, key.train == 1,
                              key.train == 1 ? out.dist_hist : out.ind_hist);
  return out;
}

struct TeleportStateRun {
  InputQubit input;
  std::uint64_t blocks = 0;
  std::uint64_t cr_failed = 0;
  std::uint64_t attempts = 0;
  std::array<std::uint64_t, 2> heralds{0, 0};
  std::uint64_t r_ii = 0;
  std::uint64_t r_ji = 0;
  bool no_data = true;
  double fidelity = std::numeric_limits<double>::quiet_NaN();
  double fidelity_stderr = std::numeric_limits<double>::quiet_NaN();
  double oracle_fidelity = std::numeric_limits<double>::quiet_NaN();
};

struct TeleportRunResult {
  std::array<TeleportStateRun, 6> states;
  bool no_data = true;
  double f_avg = std::numeric_limits<double>::quiet_NaN();
  double f_avg_stderr = std::numeric_limits<double>::quiet_NaN();
};

/// Samples the teleportation attempt loop for the six-state tomography
/// set. One shot is a CR check followed (on pass) by up to
/// teleport_attempt_cap attempts; the first herald aborts the block, is
/// classified per the oracle's pattern distribution, and is read out in
/// the basis of the prepared state from the herald-conditioned spin state
/// (ideal readout: the estimator of analytics::readout_fidelity is its
/// exact inverse). CR-failed blocks consume no attempts and enter no
/// denominator.
inline TeleportRunResult run_teleport_experiment(
    const SequenceConfig& cfg, const TeleportModelParams& params,
    std::uint64_t seed, std::uint64_t shots_per_state, unsigned threads = 0,
    const TeleportOptions& options = {}) {
  cfg.validate();
  params.validate();
  if (shots_per_state == 0)
    throw std::invalid_argument("run_teleport_experiment: zero shots");

  if (threads == 0)
    threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::uint64_t>(threads, shots_per_state));

  TeleportRunResult res;
  const NoiseParams noise{params.p_noise};
  for (int s = 0; s < 6; ++s) {
    WcsParams wcs = params.wcs;
    wcs.qubit = cardinal_states()[static_cast<std::size_t>(s)];
    const TeleportStateResult oracle =
        teleport_oracle(params.nv, wcs, params.eta, noise, options);

    const double p_h = oracle.herald_mass;
    const double p_plus_frac =
        p_h > 0.0 ? oracle.herald_prob[0] / p_h : 0.0;
    const auto [t0, t1] = ideal_teleported_state(wcs.qubit);
    std::array<double, 2> p_correct{0.0, 0.0};
    for (int cls = 0; cls < 2; ++cls)
      if (oracle.herald_prob[cls] > 0.0)
        p_correct[cls] = oracle.herald_rho[cls].fidelity_with(t0, t1);
    const int cap = cfg.teleport_attempt_cap;
    const double log1m_ph = p_h > 0.0 ? std::log1p(-p_h) : 0.0;
    const double p_block_herald =
        p_h > 0.0 ? -std::expm1(cap * log1m_ph) : 0.0;

    struct Counts {
      std::uint64_t cr_failed = 0, attempts = 0, r_ii = 0, r_ji = 0;
      std::array<std::uint64_t, 2> heralds{0, 0};
    };
    std::vector<Counts> acc(threads);

    auto run_range = [&](std::uint64_t begin, std::uint64_t end, Counts& c) {
      for (std::uint64_t block = begin; block < end; ++block) {
        Xoshiro256pp rng = shot_stream(
            seed, static_cast<std::uint64_t>(s) * shots_per_state + block);
        if (rng.uniform() >= cfg.cr_pass_prob) {
          ++c.cr_failed;
          continue;
        }
        const double u = rng.uniform();
        if (!(u < p_block_herald)) {
          c.attempts += static_cast<std::uint64_t>(cap);
          continue;
        }
        // Inverse-CDF truncated geometric: first success attempt index.
        int k = 1 + static_cast<int>(std::log1p(-u) / log1m_ph);
        k = std::clamp(k, 1, cap);
        c.attempts += static_cast<std::uint64_t>(k);
        const int cls = rng.uniform() < p_plus_frac ? 0 : 1;
        ++c.heralds[cls];
        if (rng.uniform() < p_correct[cls])
          ++c.r_ii;
        else
          ++c.r_ji;
      }
    };

    {
      std::vector<std::thread> pool;
      const std::uint64_t chunk =
          (shots_per_state + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t b = t * chunk;
        const std::uint64_t e = std::min(shots_per_state, b + chunk);
        if (b >= e) break;
        pool.emplace_back(run_range, b, e, std::ref(acc[t]));
      }
      for (auto& th : pool) th.join();
    }

    TeleportStateRun& run = res.states[static_cast<std::size_t>(s)];
    run.input = wcs.qubit;
    run.blocks = shots_per_state;
    run.oracle_fidelity = oracle.fidelity;
    for (const auto& c : acc) {
      run.cr_failed += c.cr_failed;
      run.attempts += c.attempts;
      run.heralds[0] += c.heralds[0];
      run.heralds[1] += c.heralds[1];
      run.r_ii += c.r_ii;
      run.r_ji += c.r_ji;
    }
    const std::uint64_t n = run.r_ii + run.r_ji;
    if (n > 0) {
      run.no_data = false;
      run.fidelity = readout_fidelity(static_cast<double>(run.r_ii),
                                      static_cast<double>(run.r_ji));
      run.fidelity_stderr = std::sqrt(
          std::max(0.0, run.fidelity * (1.0 - run.fidelity)) /
          static_cast<double>(n));
    }
  }

  if (std::none_of(res.states.begin(), res.states.end(),
                   [](const TeleportStateRun& r) { return r.no_data; })) {
    res.no_data = false;
    std::array<double, 6> f{};
    double var = 0.0;
    for (int s = 0; s < 6; ++s) {
      f[static_cast<std::size_t>(s)] =
          res.states[static_cast<std::size_t>(s)].fidelity;
      var += res.states[static_cast<std::size_t>(s)].fidelity_stderr *
             res.states[static_cast<std::size_t>(s)].fidelity_stderr;
    }
    res.f_avg = avg_fidelity(f);
    res.f_avg_stderr = std::sqrt(var) / 6.0;
  }
  return res;
}

}  // namespace qiface
