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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qiface/sequence.hpp"
#include "qiface/sources.hpp"

namespace qiface {

/// All config problems found in one pass, so a bad file reports every
/// offending field instead of the first one hit.
class config_error : public std::invalid_argument {
 public:
  std::vector<std::string> items;

  explicit config_error(std::vector<std::string> problems)
      : std::invalid_argument(join(problems)), items(std::move(problems)) {}

 private:
  static std::string join(const std::vector<std::string>& problems) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& p : problems) os << "\n  - " << p;
    return os.str();
  }
};

/// Shared simulation parameters a CLI run can load from JSON instead of
/// passing flag by flag. Flags override file values.
struct RunConfig {
  double p_nv = 5.76e-4;
  double g2 = 0.011;
  double mu = 5.4e-4;
  double leak_epsilon = 0.0;
  double eta = 0.895;
  double p_noise = 0.0;
  std::uint64_t shots = 10000;
  int threads = 1;
  SequenceConfig sequence;

  NvParams nv_params() const {
    return NvParams{p_nv, g2, p_de_from_g2(g2, p_nv)};
  }
};

namespace detail {

inline bool get_number(const nlohmann::json& j, const char* key, double& out,
                       std::vector<std::string>& problems) {
  if (!j.contains(key)) return false;
  if (!j.at(key).is_number()) {
    problems.push_back(std::string(key) + ": expected a number");
    return false;
  }
  out = j.at(key).get<double>();
  return true;
}

inline bool get_int(const nlohmann::json& j, const char* key, int& out,
                    std::vector<std::string>& problems) {
  if (!j.contains(key)) return false;
  if (!j.at(key).is_number_integer()) {
    problems.push_back(std::string(key) + ": expected an integer");
    return false;
  }
  out = j.at(key).get<int>();
  return true;
}

inline void check_keys(const nlohmann::json& j,
                       const std::vector<std::string>& allowed,
                       const std::string& scope,
                       std::vector<std::string>& problems) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& a : allowed)
      if (key == a) known = true;
    if (!known) problems.push_back(scope + "unknown key '" + key + "'");
  }
}

inline void require_range(bool ok, const char* message,
                          std::vector<std::string>& problems) {
  if (!ok) problems.push_back(message);
}

}  // namespace detail

/// Strict parse: unknown keys are errors, and every range violation is
/// reported with the field name it concerns.
inline RunConfig parse_run_config(const nlohmann::json& j) {
  std::vector<std::string> problems;
  RunConfig cfg;

  if (!j.is_object()) {
    problems.push_back("top level: expected an object");
    throw config_error(std::move(problems));
  }
  detail::check_keys(j,
                     {"p_nv", "g2", "mu", "leak_epsilon", "eta", "p_noise",
                      "shots", "threads", "sequence"},
                     "", problems);

  detail::get_number(j, "p_nv", cfg.p_nv, problems);
  detail::get_number(j, "g2", cfg.g2, problems);
  detail::get_number(j, "mu", cfg.mu, problems);
  detail::get_number(j, "leak_epsilon", cfg.leak_epsilon, problems);
  detail::get_number(j, "eta", cfg.eta, problems);
  detail::get_number(j, "p_noise", cfg.p_noise, problems);
  if (j.contains("shots")) {
    if (!j.at("shots").is_number_unsigned() || j.at("shots").get<std::uint64_t>() == 0)
      problems.push_back("shots: expected a positive integer");
    else
      cfg.shots = j.at("shots").get<std::uint64_t>();
  }
  detail::get_int(j, "threads", cfg.threads, problems);

  if (j.contains("sequence")) {
    const auto& s = j.at("sequence");
    if (!s.is_object()) {
      problems.push_back("sequence: expected an object");
    } else {
      detail::check_keys(
          s,
          {"bins_per_train", "train_repetitions", "bin_spacing_ns",
           "distinguishable_offset_ns", "coincidence_window_ns",
           "teleport_attempt_cap", "herald_window_hw_ns", "herald_window_ns",
           "time_bin_separation_ns", "cr_pass_prob"},
          "sequence.", problems);
      detail::get_int(s, "bins_per_train", cfg.sequence.bins_per_train,
                      problems);
      detail::get_int(s, "train_repetitions", cfg.sequence.train_repetitions,
                      problems);
      detail::get_number(s, "bin_spacing_ns", cfg.sequence.bin_spacing_ns,
                         problems);
      detail::get_number(s, "distinguishable_offset_ns",
                         cfg.sequence.distinguishable_offset_ns, problems);
      detail::get_number(s, "coincidence_window_ns",
                         cfg.sequence.coincidence_window_ns, problems);
      detail::get_int(s, "teleport_attempt_cap",
                      cfg.sequence.teleport_attempt_cap, problems);
      detail::get_number(s, "herald_window_hw_ns",
                         cfg.sequence.herald_window_hw_ns, problems);
      detail::get_number(s, "herald_window_ns", cfg.sequence.herald_window_ns,
                         problems);
      detail::get_number(s, "time_bin_separation_ns",
                         cfg.sequence.time_bin_separation_ns, problems);
      detail::get_number(s, "cr_pass_prob", cfg.sequence.cr_pass_prob,
                         problems);
    }
  }

  using detail::require_range;
  require_range(cfg.p_nv >= 0.0 && cfg.p_nv <= 1.0, "p_nv: must be in [0,1]",
                problems);
  require_range(cfg.g2 >= 0.0, "g2: must be >= 0", problems);
  require_range(cfg.mu >= 0.0, "mu: must be >= 0", problems);
  require_range(cfg.leak_epsilon >= 0.0 && cfg.leak_epsilon < 1.0,
                "leak_epsilon: must be in [0,1)", problems);
  require_range(cfg.eta >= 0.0 && cfg.eta <= 1.0, "eta: must be in [0,1]",
                problems);
  require_range(cfg.p_noise >= 0.0 && cfg.p_noise < 1.0,
                "p_noise: must be in [0,1)", problems);
  require_range(cfg.threads >= 0, "threads: must be >= 0", problems);

  if (problems.empty()) {
    try {
      cfg.sequence.validate();
    } catch (const std::invalid_argument& e) {
      problems.push_back(std::string("sequence: ") + e.what());
    }
  }
  if (!problems.empty()) throw config_error(std::move(problems));
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f)
    throw config_error({"cannot open " + path.string()});
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error({path.string() + ": " + e.what()});
  }
  return parse_run_config(j);
}

}  // namespace qiface
