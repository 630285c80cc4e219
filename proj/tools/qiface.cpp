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

// Command line front end. Exit codes: 0 success, 2 invalid input or
// configuration, 3 numerical failure, 1 selftest tolerance breach.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qiface/analytics.hpp"
#include "qiface/config.hpp"
#include "qiface/csv.hpp"
#include "qiface/fitting.hpp"
#include "qiface/oracle.hpp"
#include "qiface/sequence.hpp"

namespace {

using namespace qiface;

std::vector<double> geometric_grid(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi >= lo) || points < 1)
    throw std::invalid_argument("sweep: need 0 < min <= max and points >= 1");
  std::vector<double> out;
  if (points == 1) {
    out.push_back(lo);
    return out;
  }
  const double step = std::log(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) out.push_back(lo * std::exp(step * i));
  out.back() = hi;
  return out;
}

std::string fmt(double v) { return format_double(v); }

// Applies --config file values, keeping any flag the user set explicitly.
struct CommonParams {
  RunConfig cfg;
  std::string config_path;

  void attach(CLI::App* cmd, bool with_shots) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--p-nv", cfg.p_nv, "emitter photon probability per shot")
        ->capture_default_str();
    cmd->add_option("--g2", cfg.g2, "emitter residual g2(0)")
        ->capture_default_str();
    cmd->add_option("--mu", cfg.mu, "coherent-state mean photon number")
        ->capture_default_str();
    cmd->add_option("--leak-epsilon", cfg.leak_epsilon,
                    "pole-state preparation leakage")
        ->capture_default_str();
    cmd->add_option("--eta", cfg.eta, "photon indistinguishability")
        ->capture_default_str();
    cmd->add_option("--p-noise", cfg.p_noise,
                    "dark/background click probability per window")
        ->capture_default_str();
    if (with_shots) {
      cmd->add_option("--shots", cfg.shots, "Monte Carlo shots")
          ->capture_default_str();
      cmd->add_option("--threads", cfg.threads, "worker threads (0 = auto)")
          ->capture_default_str();
    }
  }

  void resolve(const CLI::App* cmd) {
    if (config_path.empty()) return;
    RunConfig file_cfg = load_run_config(config_path);
    // flags the user typed win over file values
    auto keep = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (!keep("--p-nv")) cfg.p_nv = file_cfg.p_nv; else file_cfg.p_nv = cfg.p_nv;
    if (!keep("--g2")) cfg.g2 = file_cfg.g2;
    if (!keep("--mu")) cfg.mu = file_cfg.mu;
    if (!keep("--leak-epsilon")) cfg.leak_epsilon = file_cfg.leak_epsilon;
    if (!keep("--eta")) cfg.eta = file_cfg.eta;
    if (!keep("--p-noise")) cfg.p_noise = file_cfg.p_noise;
    if (cmd->count("--shots") == 0) cfg.shots = file_cfg.shots;
    if (cmd->count("--threads") == 0) cfg.threads = file_cfg.threads;
    cfg.sequence = file_cfg.sequence;
  }
};

int cmd_classical_bound(double mu, double mu_min, double mu_max, int points,
                        const std::string& out) {
  if (points > 0) {
    Table t;
    t.header = {"mu", "f_max"};
    for (double m : geometric_grid(mu_min, mu_max, points))
      t.add_row({fmt(m), fmt(classical_bound(m))});
    if (!out.empty()) {
      write_csv(out, t);
    } else {
      for (const auto& r : t.rows)
        std::printf("%s %s\n", r[0].c_str(), r[1].c_str());
    }
    return 0;
  }
  std::printf("%.6f\n", classical_bound(mu));
  return 0;
}

int cmd_visibility_curve(CommonParams& p, double x_min, double x_max,
                         int points, const std::string& out) {
  Table t;
  t.header = {"x", "v_model", "v_oracle"};
  const NvParams nv = p.cfg.nv_params();
  const NoiseParams noise{p.cfg.p_noise};
  for (double x : geometric_grid(x_min, x_max, points)) {
    const VisibilityParams vp{x, p.cfg.g2, p.cfg.p_nv, p.cfg.p_noise,
                              p.cfg.eta};
    const double v_model = visibility_model(vp);
    const double v_oracle =
        tpqi_oracle(nv, x * p.cfg.p_nv, p.cfg.eta, noise).visibility;
    t.add_row({fmt(x), fmt(v_model), fmt(v_oracle)});
  }
  if (!out.empty()) write_csv(out, t);
  for (const auto& r : t.rows)
    std::printf("x=%-10s V_model=%-22s V_oracle=%s\n", r[0].c_str(),
                r[1].c_str(), r[2].c_str());
  return 0;
}

int cmd_teleport_fidelity(CommonParams& p, double x_min, double x_max,
                          int points, bool no_feedforward,
                          const std::string& out) {
  Table t;
  t.header = {"x",       "f_plus_z", "f_minus_z", "f_plus_x",
              "f_minus_x", "f_plus_y", "f_minus_y", "f_avg",
              "f_pole_model", "f_eq_model", "classical_bound"};
  const NvParams nv = p.cfg.nv_params();
  const NoiseParams noise{p.cfg.p_noise};
  TeleportOptions opt;
  opt.feedforward = !no_feedforward;
  for (double x : geometric_grid(x_min, x_max, points)) {
    WcsParams wcs;
    wcs.mu = x * p.cfg.p_nv;
    wcs.leak_epsilon = p.cfg.leak_epsilon;
    const auto six = teleport_oracle_six(nv, wcs, p.cfg.eta, noise, opt);
    TeleportModelParams tm{nv, wcs, p.cfg.eta, p.cfg.p_noise};
    std::vector<std::string> row{fmt(x)};
    for (const auto& st : six.states) row.push_back(fmt(st.fidelity));
    row.push_back(fmt(six.f_avg));
    row.push_back(fmt(fidelity_pole(tm)));
    row.push_back(fmt(fidelity_eq(tm)));
    row.push_back(fmt(classical_bound(wcs.mu)));
    t.add_row(std::move(row));
  }
  if (!out.empty()) write_csv(out, t);
  for (const auto& r : t.rows)
    std::printf("x=%-10s F_avg=%-22s bound=%s\n", r[0].c_str(), r[7].c_str(),
                r[10].c_str());
  return 0;
}

int cmd_simulate_tpqi(CommonParams& p, std::uint64_t seed,
                      const std::string& out, const std::string& tag_out) {
  const NvParams nv = p.cfg.nv_params();
  const NoiseParams noise{p.cfg.p_noise};
  const auto oracle = tpqi_oracle(nv, p.cfg.mu, p.cfg.eta, noise);
  const auto run = run_tpqi_experiment(
      p.cfg.sequence, nv, p.cfg.mu, p.cfg.eta, noise, seed, p.cfg.shots,
      static_cast<unsigned>(p.cfg.threads), !tag_out.empty());

  if (!out.empty()) {
    Table t;
    t.header = {"delta",          "ind",          "dist",
                "dist_nv_window", "dist_converted_window",
                "dist_combined"};
    const int b = p.cfg.sequence.bins_per_train;
    for (int d = -(b - 1); d <= b - 1; ++d)
      t.add_row({std::to_string(d), std::to_string(run.ind_hist.at(d)),
                 std::to_string(run.dist_hist.at(d)),
                 std::to_string(run.dist_hist.combo_at(WindowCombo::NvWindow, d)),
                 std::to_string(
                     run.dist_hist.combo_at(WindowCombo::ConvertedWindow, d)),
                 std::to_string(
                     run.dist_hist.combo_at(WindowCombo::Combined, d))});
    write_csv(out, t);
  }
  if (!tag_out.empty()) {
    Table t;
    t.header = {"shot", "detector", "time_ns"};
    for (const auto& tag : run.timetags)
      t.add_row({std::to_string(tag.shot),
                 tag.detector == Detector::D1 ? "D1" : "D2",
                 fmt(tag.time_ns)});
    write_csv(tag_out, t);
  }

  std::printf("shots=%llu cr_passed=%llu\n",
              static_cast<unsigned long long>(run.shots),
              static_cast<unsigned long long>(run.cr_passed));
  std::printf("c0_ind=%lld c0_dist=%lld\n",
              static_cast<long long>(run.ind_hist.at(0)),
              static_cast<long long>(run.dist_hist.at(0)));
  if (run.has_estimate)
    std::printf("V = %.6f +- %.6f (oracle %.6f)\n", run.v_estimate,
                run.v_stderr, oracle.visibility);
  else
    std::printf("V = n/a (no distinguishable-train coincidences; oracle %.6f)\n",
                oracle.visibility);
  return 0;
}

int cmd_simulate_teleport(CommonParams& p, std::uint64_t seed,
                          bool no_feedforward, const std::string& out) {
  TeleportModelParams tm;
  tm.nv = p.cfg.nv_params();
  tm.wcs.mu = p.cfg.mu;
  tm.wcs.leak_epsilon = p.cfg.leak_epsilon;
  tm.eta = p.cfg.eta;
  tm.p_noise = p.cfg.p_noise;
  TeleportOptions opt;
  opt.feedforward = !no_feedforward;
  const auto run = run_teleport_experiment(
      p.cfg.sequence, tm, seed, p.cfg.shots,
      static_cast<unsigned>(p.cfg.threads), opt);

  static const char* kNames[6] = {"plus_z",  "minus_z", "plus_x",
                                  "minus_x", "plus_y",  "minus_y"};
  if (!out.empty()) {
    Table t;
    t.header = {"state",   "blocks",  "attempts", "heralds_psi_plus",
                "heralds_psi_minus", "r_ii",    "r_ji",
                "fidelity", "fidelity_stderr", "fidelity_oracle"};
    for (int s = 0; s < 6; ++s) {
      const auto& st = run.states[s];
      t.add_row({kNames[s], std::to_string(st.blocks),
                 std::to_string(st.attempts), std::to_string(st.heralds[0]),
                 std::to_string(st.heralds[1]), std::to_string(st.r_ii),
                 std::to_string(st.r_ji), fmt(st.fidelity),
                 fmt(st.fidelity_stderr), fmt(st.oracle_fidelity)});
    }
    write_csv(out, t);
  }
  for (int s = 0; s < 6; ++s) {
    const auto& st = run.states[s];
    std::printf("%-8s heralds=%llu F = %.6f +- %.6f (oracle %.6f)\n",
                kNames[s],
                static_cast<unsigned long long>(st.heralds[0] + st.heralds[1]),
                st.fidelity, st.fidelity_stderr, st.oracle_fidelity);
  }
  if (!run.no_data)
    std::printf("F_avg = %.6f +- %.6f (bound %.6f)\n", run.f_avg,
                run.f_avg_stderr, classical_bound(p.cfg.mu));
  else
    std::printf("F_avg = n/a (some states heralded no events)\n");
  return 0;
}

FitResult run_named_fit(const std::string& which, const Table& in,
                        const CommonParams& p, const std::string& model,
                        PhaseModulatorFit* pm_out) {
  if (which == "visibility") {
    DataSeries d{in.numeric_column("x"), in.numeric_column("v"), {}};
    bool has_sigma = false;
    for (const auto& h : in.header) has_sigma |= h == "sigma";
    if (has_sigma) d.sigma = in.numeric_column("sigma");
    return fit_visibility(d, p.cfg.g2, p.cfg.p_nv, p.cfg.p_noise);
  }
  if (which == "saturation") {
    DataSeries d{in.numeric_column("power_mw"), in.numeric_column("eta"), {}};
    const auto m = model == "hill" ? SaturationModel::Hill
                                   : SaturationModel::SineSquared;
    return fit_saturation(d, m);
  }
  if (which == "phase-modulator") {
    *pm_out = fit_phase_modulator(in.numeric_column("voltage"),
                                  in.numeric_column("d1"),
                                  in.numeric_column("d2"));
    return pm_out->fit;
  }
  if (which == "noise") {
    DataSeries d{in.numeric_column("x"), in.numeric_column("rate"), {}};
    return fit_noise_linear(d);
  }
  throw std::invalid_argument("unknown fit model: " + which);
}

int cmd_fit(const std::string& which, const std::string& in_path,
            const CommonParams& p, const std::string& model) {
  const Table in = read_csv(in_path);
  PhaseModulatorFit pm;
  const FitResult res = run_named_fit(which, in, p, model, &pm);
  for (std::size_t i = 0; i < res.params.size(); ++i)
    std::printf("%-10s = %.10g +- %.3g\n", res.param_names[i].c_str(),
                res.params[i], res.uncertainty(i));
  if (which == "phase-modulator" && !res.non_identifiable)
    std::printf("v_pi      = %.10g\nv_pi_half = %.10g\n", pm.v_pi,
                pm.v_pi_half);
  std::printf("converged=%d iterations=%d residual_norm=%.6g\n",
              res.converged ? 1 : 0, res.iterations, res.residual_norm);
  if (res.non_identifiable) std::printf("flag: non-identifiable\n");
  if (res.unbounded_uncertainty) std::printf("flag: unbounded uncertainty\n");
  if (!res.diagnostics.empty())
    std::printf("diagnostics: %s\n", res.diagnostics.c_str());
  if (!res.converged) throw numerical_error("fit did not converge");
  return 0;
}

struct SelfCheck {
  std::string name;
  double got, want, tol;
};

int cmd_selftest() {
  std::vector<SelfCheck> checks;
  checks.push_back({"classical_bound(6.5e-4)", classical_bound(6.5e-4),
                    0.666694, 5e-7});
  checks.push_back({"classical_bound(mu->0)", classical_bound(1e-12),
                    2.0 / 3.0, 1e-9});

  // interference visibility: enumeration vs closed form
  for (double x : {0.25, 1.0, 1.19, 4.0}) {
    for (double eta : {0.0, 0.5, 1.0}) {
      const double p = 5.76e-4, g2 = 0.011, q = 3.6e-7;
      const NvParams nv{p, g2, p_de_from_g2(g2, p)};
      const double got = tpqi_oracle(nv, x * p, eta, NoiseParams{q}).visibility;
      const VisibilityParams vp{x, g2, p, q, eta};
      checks.push_back({"V(x=" + std::to_string(x) +
                            ",eta=" + std::to_string(eta) + ")",
                        got, visibility_model(vp), 1e-3});
    }
  }

  // heralded fidelity: enumeration vs closed form, pole and equator
  {
    const double p = 4.5e-4, g2 = 0.011, q = 5.5e-6, eta = 0.895;
    const NvParams nv{p, g2, p_de_from_g2(g2, p)};
    for (double x : {0.5, 1.2, 3.0}) {
      WcsParams wcs;
      wcs.mu = x * p;
      wcs.leak_epsilon = 0.04;
      wcs.qubit = InputQubit::plus_z();
      TeleportModelParams tm{nv, wcs, eta, q};
      checks.push_back({"F_pole(x=" + std::to_string(x) + ")",
                        teleport_oracle(nv, wcs, eta, NoiseParams{q}, {}).fidelity,
                        fidelity_pole(tm), 2e-3});
      wcs.leak_epsilon = 0.0;
      wcs.qubit = InputQubit::plus_x();
      tm.wcs = wcs;
      checks.push_back({"F_eq(x=" + std::to_string(x) + ")",
                        teleport_oracle(nv, wcs, eta, NoiseParams{q}, {}).fidelity,
                        fidelity_eq(tm), 2e-3});
    }
  }

  // ideal limits
  {
    NvParams nv{1.0, 0.0, 0.0};
    WcsParams wcs;
    wcs.mu = 1.0;
    wcs.qubit = InputQubit::plus_y();
    TeleportOptions opt;
    opt.ideal_single_photon = true;
    checks.push_back({"F(ideal single photons)",
                      teleport_oracle(nv, wcs, 1.0, NoiseParams{}, opt).fidelity,
                      1.0, 1e-12});
    opt.feedforward = false;
    checks.push_back({"F(equator, no correction)",
                      teleport_oracle(nv, wcs, 1.0, NoiseParams{}, opt).fidelity,
                      0.5, 1e-10});
  }

  int bad = 0;
  for (const auto& c : checks) {
    const bool ok = std::abs(c.got - c.want) <= c.tol;
    std::printf("%-34s got %-22.16g want %-22.16g tol %-8g %s\n",
                c.name.c_str(), c.got, c.want, c.tol, ok ? "ok" : "FAIL");
    if (!ok) ++bad;
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - bad,
              checks.size());
  return bad ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Photonic quantum network interface simulator: emitter/coherent-state "
      "interference, heralded state transfer, and parameter extraction"};
  app.require_subcommand(1);

  // classical-bound
  auto* cb = app.add_subcommand(
      "classical-bound",
      "maximum classically achievable average transfer fidelity");
  double cb_mu = 6.5e-4, cb_min = 1e-5, cb_max = 1e-1;
  int cb_points = 0;
  std::string cb_out;
  cb->add_option("--mu", cb_mu, "mean photon number")->capture_default_str();
  cb->add_option("--mu-min", cb_min, "sweep start")->capture_default_str();
  cb->add_option("--mu-max", cb_max, "sweep end")->capture_default_str();
  cb->add_option("--points", cb_points, "sweep points (0 = single value)")
      ->capture_default_str();
  cb->add_option("--out", cb_out, "CSV output path");

  // visibility-curve
  auto* vc = app.add_subcommand(
      "visibility-curve", "two-photon interference visibility vs ratio x");
  CommonParams vc_p;
  vc_p.attach(vc, false);
  double vc_xmin = 0.25, vc_xmax = 4.0;
  int vc_points = 9;
  std::string vc_out;
  vc->add_option("--x-min", vc_xmin, "smallest x")->capture_default_str();
  vc->add_option("--x-max", vc_xmax, "largest x")->capture_default_str();
  vc->add_option("--points", vc_points, "sweep points")->capture_default_str();
  vc->add_option("--out", vc_out, "CSV output path");

  // teleport-fidelity
  auto* tf = app.add_subcommand(
      "teleport-fidelity", "heralded transfer fidelity vs ratio x");
  CommonParams tf_p;
  tf_p.attach(tf, false);
  double tf_xmin = 0.25, tf_xmax = 4.0;
  int tf_points = 9;
  bool tf_noff = false;
  std::string tf_out;
  tf->add_option("--x-min", tf_xmin, "smallest x")->capture_default_str();
  tf->add_option("--x-max", tf_xmax, "largest x")->capture_default_str();
  tf->add_option("--points", tf_points, "sweep points")->capture_default_str();
  tf->add_flag("--no-feedforward", tf_noff, "skip the heralded correction");
  tf->add_option("--out", tf_out, "CSV output path");

  // simulate-tpqi
  auto* st = app.add_subcommand(
      "simulate-tpqi", "Monte Carlo interference sequence");
  CommonParams st_p;
  st_p.attach(st, true);
  std::uint64_t st_seed = 0;
  std::string st_out, st_tags;
  st->add_option("--seed", st_seed, "RNG seed (runs are reproducible)")
      ->required();
  st->add_option("--out", st_out, "histogram CSV output path");
  st->add_option("--timetags", st_tags, "timetag CSV output path");

  // simulate-teleport
  auto* sp = app.add_subcommand(
      "simulate-teleport", "Monte Carlo heralded transfer over six inputs");
  CommonParams sp_p;
  sp_p.attach(sp, true);
  std::uint64_t sp_seed = 0;
  bool sp_noff = false;
  std::string sp_out;
  sp->add_option("--seed", sp_seed, "RNG seed (runs are reproducible)")
      ->required();
  sp->add_flag("--no-feedforward", sp_noff, "skip the heralded correction");
  sp->add_option("--out", sp_out, "per-state CSV output path");

  // fit
  auto* fit = app.add_subcommand("fit", "least-squares parameter extraction");
  fit->require_subcommand(1);
  const std::vector<std::string> fit_kinds = {"visibility", "saturation",
                                              "phase-modulator", "noise"};
  struct FitArgs {
    std::string in, model = "sin2";
    CommonParams p;
  };
  std::vector<FitArgs> fit_args(fit_kinds.size());
  for (std::size_t i = 0; i < fit_kinds.size(); ++i) {
    auto* sub = fit->add_subcommand(fit_kinds[i]);
    sub->add_option("--in", fit_args[i].in, "input CSV")->required();
    if (fit_kinds[i] == "visibility") {
      fit_args[i].p.attach(sub, false);
    }
    if (fit_kinds[i] == "saturation")
      sub->add_option("--model", fit_args[i].model, "sin2 or hill")
          ->check(CLI::IsMember({"sin2", "hill"}))
          ->capture_default_str();
  }

  // selftest
  app.add_subcommand("selftest",
                     "check enumeration against closed forms and limits");

  try {
    app.parse(argc, argv);

    if (cb->parsed())
      return cmd_classical_bound(cb_mu, cb_min, cb_max, cb_points, cb_out);
    if (vc->parsed()) {
      vc_p.resolve(vc);
      return cmd_visibility_curve(vc_p, vc_xmin, vc_xmax, vc_points, vc_out);
    }
    if (tf->parsed()) {
      tf_p.resolve(tf);
      return cmd_teleport_fidelity(tf_p, tf_xmin, tf_xmax, tf_points, tf_noff,
                                   tf_out);
    }
    if (st->parsed()) {
      st_p.resolve(st);
      return cmd_simulate_tpqi(st_p, st_seed, st_out, st_tags);
    }
    if (sp->parsed()) {
      sp_p.resolve(sp);
      return cmd_simulate_teleport(sp_p, sp_seed, sp_noff, sp_out);
    }
    if (fit->parsed()) {
      for (std::size_t i = 0; i < fit_kinds.size(); ++i) {
        auto* sub = fit->get_subcommand(fit_kinds[i]);
        if (sub->parsed()) {
          fit_args[i].p.resolve(sub);
          return cmd_fit(fit_kinds[i], fit_args[i].in, fit_args[i].p,
                         fit_args[i].model);
        }
      }
    }
    if (app.get_subcommand("selftest")->parsed()) return cmd_selftest();
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const numerical_error& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
}
