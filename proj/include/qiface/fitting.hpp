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
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qiface/analytics.hpp"
#include "qiface/errors.hpp"

namespace qiface {

struct DataSeries {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma;  // empty: unweighted

  void validate(std::size_t min_points) const {
    if (x.size() != y.size())
      throw std::invalid_argument("DataSeries: x/y length mismatch");
    if (!sigma.empty() && sigma.size() != x.size())
      throw std::invalid_argument("DataSeries: sigma length mismatch");
    if (x.size() < min_points)
      throw std::invalid_argument("DataSeries: not enough points");
    for (double s : sigma)
      if (!(s > 0.0))
        throw std::invalid_argument("DataSeries: sigma must be > 0");
    for (double v : x)
      if (!std::isfinite(v))
        throw std::invalid_argument("DataSeries: non-finite x");
    for (double v : y)
      if (!std::isfinite(v))
        throw std::invalid_argument("DataSeries: non-finite y");
  }
};

struct FitResult {
  std::vector<std::string> param_names;
  std::vector<double> params;
  std::vector<std::vector<double>> covariance;
  double residual_norm = 0.0;  // sqrt(sum of squared weighted residuals)
  bool converged = false;
  int iterations = 0;
  bool non_identifiable = false;
  // Covariance has no meaningful scale (zero degrees of freedom with no
  // per-point sigmas).
  bool unbounded_uncertainty = false;
  std::string diagnostics;
  // Accepted-step objective values; nonincreasing by construction.
  std::vector<double> objective_trace;

  double param(const std::string& name) const {
    for (std::size_t i = 0; i < param_names.size(); ++i)
      if (param_names[i] == name) return params[i];
    throw std::invalid_argument("FitResult: unknown parameter " + name);
  }
  double uncertainty(std::size_t i) const {
    return std::sqrt(std::max(0.0, covariance[i][i]));
  }
};

/// Scalar model y = f(x; p) with analytic gradient df/dp.
struct ParametricModel {
  std::function<double(double, const std::vector<double>&)> value;
  std::function<std::vector<double>(double, const std::vector<double>&)>
      gradient;
};

namespace detail {

// Gaussian elimination with partial pivoting; returns false on a (near)
// singular system. a is destroyed. Solves a * x = b for multiple b columns.
inline bool solve_inplace(std::vector<std::vector<double>>& a,
                          std::vector<std::vector<double>>& b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (!(std::abs(a[piv][col]) > 1e-300)) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    const double d = a[col][col];
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / d;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      for (std::size_t c = 0; c < b[r].size(); ++c) b[r][c] -= f * b[col][c];
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    const double d = a[r][r];
    for (auto& v : b[r]) v /= d;
  }
  return true;
}

inline std::vector<std::vector<double>> identity(std::size_t n) {
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
  return m;
}

}  // namespace detail

/// Damped Gauss-Newton (Levenberg-Marquardt) minimizer of |r(p)|^2 over
/// a residual vector with analytic Jacobian dr_i/dp_k. Accepted steps
/// never increase the objective. Converged when both the relative step
/// size and the relative objective change drop below 1e-10 (or after 200
/// iterations). Singular normal equations that damping cannot regularize
/// are reported through `converged = false` plus diagnostics.
inline FitResult lm_minimize(
    const std::function<std::vector<double>(const std::vector<double>&)>&
        residuals,
    const std::function<std::vector<std::vector<double>>(
        const std::vector<double>&)>& jacobian,
    std::vector<double> p, std::vector<std::string> names) {
  constexpr double kTol = 1e-10;
  constexpr int kMaxIter = 200;

  FitResult res;
  res.param_names = std::move(names);

  const std::size_t np = p.size();
  std::vector<double> r = residuals(p);
  double obj = 0.0;
  for (double v : r) obj += v * v;
  res.objective_trace.push_back(obj);

  double lambda = 1e-3;
  bool singular = false;
  int iter = 0;
  for (; iter < kMaxIter; ++iter) {
    const auto jac = jacobian(p);
    // Normal equations: (J^T J + lambda diag(J^T J)) delta = -J^T r.
    std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
    std::vector<double> jtr(np, 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      for (std::size_t a = 0; a < np; ++a) {
        jtr[a] += jac[i][a] * r[i];
        for (std::size_t b = a; b < np; ++b)
          jtj[a][b] += jac[i][a] * jac[i][b];
      }
    }
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];

    double diag_floor = 0.0;
    for (std::size_t a = 0; a < np; ++a)
      diag_floor = std::max(diag_floor, jtj[a][a]);
    diag_floor = diag_floor > 0.0 ? diag_floor * 1e-14 : 1.0;

    bool accepted = false;
    double step_sq = 0.0, new_obj = obj;
    std::vector<double> p_new;
    for (int attempt = 0; attempt < 60; ++attempt) {
      auto a = jtj;
      for (std::size_t k = 0; k < np; ++k)
        a[k][k] += lambda * std::max(jtj[k][k], diag_floor);
      std::vector<std::vector<double>> rhs(np, std::vector<double>(1));
      for (std::size_t k = 0; k < np; ++k) rhs[k][0] = -jtr[k];
      if (!detail::solve_inplace(a, rhs)) {
        lambda *= 10.0;
        if (lambda > 1e30) {
          singular = true;
          break;
        }
        continue;
      }
      p_new = p;
      step_sq = 0.0;
      for (std::size_t k = 0; k < np; ++k) {
        p_new[k] += rhs[k][0];
        step_sq += rhs[k][0] * rhs[k][0];
      }
      const auto r_new = residuals(p_new);
      new_obj = 0.0;
      for (double v : r_new) new_obj += v * v;
      if (std::isfinite(new_obj) && new_obj <= obj) {
        accepted = true;
        p = std::move(p_new);
        r = r_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e30) break;
    }
    if (singular) break;
    if (!accepted) break;  // damping exhausted: stationary to rounding

    double p_sq = 0.0;
    for (double v : p) p_sq += v * v;
    const double rel_step =
        std::sqrt(step_sq) / std::max(std::sqrt(p_sq), 1e-300);
    const double rel_dobj =
        std::abs(obj - new_obj) / std::max(obj, 1e-300);
    obj = new_obj;
    res.objective_trace.push_back(obj);
    if (rel_step < kTol && rel_dobj < kTol) {
      ++iter;
      break;
    }
  }
  res.iterations = iter;
  res.converged = !singular;
  if (singular) res.diagnostics = "singular normal equations";

  res.params = p;
  res.residual_norm = std::sqrt(obj);
  // Covariance from the undamped normal equations at the solution.
  const auto jac = jacobian(p);
  std::vector<std::vector<double>> jtj(np, std::vector<double>(np, 0.0));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t a = 0; a < np; ++a)
      for (std::size_t b = 0; b < np; ++b)
        jtj[a][b] += jac[i][a] * jac[i][b];
  auto cov = detail::identity(np);
  if (detail::solve_inplace(jtj, cov)) {
    res.covariance = cov;
  } else {
    res.covariance.assign(np, std::vector<double>(np, 0.0));
    res.converged = false;
    if (res.diagnostics.empty())
      res.diagnostics = "singular normal equations at solution";
  }
  return res;
}

/// Weighted scalar-model least squares over a DataSeries. Residuals are
/// (y - f(x;p))/sigma; with no sigmas the covariance is scaled by the
/// reduced chi-square (when degrees of freedom exist).
inline FitResult least_squares(const ParametricModel& model,
                               const DataSeries& data,
                               const std::vector<double>& init,
                               std::vector<std::string> names = {}) {
  data.validate(init.size());
  for (double v : init)
    if (!std::isfinite(v))
      throw std::invalid_argument("least_squares: non-finite init");
  if (names.empty())
    for (std::size_t i = 0; i < init.size(); ++i)
      names.push_back("p" + std::to_string(i));

  const std::size_t n = data.x.size();
  auto weight = [&](std::size_t i) {
    return data.sigma.empty() ? 1.0 : 1.0 / data.sigma[i];
  };
  auto residuals = [&, n](const std::vector<double>& p) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = (data.y[i] - model.value(data.x[i], p)) * weight(i);
    return r;
  };
  auto jacobian = [&, n](const std::vector<double>& p) {
    std::vector<std::vector<double>> jac(n);
    for (std::size_t i = 0; i < n; ++i) {
      jac[i] = model.gradient(data.x[i], p);
      for (auto& v : jac[i]) v *= -weight(i);
    }
    return jac;
  };
  FitResult res = lm_minimize(residuals, jacobian, init, std::move(names));

  const std::size_t dof = n > init.size() ? n - init.size() : 0;
  if (data.sigma.empty()) {
    if (dof > 0) {
      const double scale =
          res.residual_norm * res.residual_norm / static_cast<double>(dof);
      for (auto& row : res.covariance)
        for (auto& v : row) v *= scale;
    } else {
      res.unbounded_uncertainty = true;
    }
  }
  return res;
}

/// Central-difference Jacobian of a residual function; the reference the
/// analytic Jacobians are validated against in the test suite.
inline std::vector<std::vector<double>> finite_difference_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& fn,
    const std::vector<double>& p) {
  const std::vector<double> f0 = fn(p);
  std::vector<std::vector<double>> jac(f0.size(),
                                       std::vector<double>(p.size()));
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double h = 6e-6 * std::max(std::abs(p[k]), 1.0);
    auto hi = p, lo = p;
    hi[k] += h;
    lo[k] -= h;
    const auto fh = fn(hi), fl = fn(lo);
    for (std::size_t i = 0; i < f0.size(); ++i)
      jac[i][k] = (fh[i] - fl[i]) / (2.0 * h);
  }
  return jac;
}

// ---------------------------------------------------------------------
// The four parameter extractions.

/// Visibility-curve fit: single parameter eta with (g2, p_nv, p_noise)
/// held fixed. Starts at eta = 0.5. An all-zero visibility column is
/// flagged non-identifiable (eta and the noise floor are degenerate
/// at V == 0).
inline FitResult fit_visibility(const DataSeries& points, double g2,
                                double p_nv, double p_noise) {
  points.validate(1);
  ParametricModel model;
  auto shape = [g2, p_nv, p_noise](double x) {
    VisibilityParams vp{x, g2, p_nv, p_noise, 1.0};
    return visibility_model(vp);
  };
  model.value = [shape](double x, const std::vector<double>& p) {
    return p[0] * shape(x);
  };
  model.gradient = [shape](double x, const std::vector<double>&) {
    return std::vector<double>{shape(x)};
  };
  FitResult res = least_squares(model, points, {0.5}, {"eta"});
  bool all_zero = true;
  for (double v : points.y)
    if (v != 0.0) all_zero = false;
  if (all_zero) res.non_identifiable = true;
  return res;
}

enum class SaturationModel : int { SineSquared = 0, Hill = 1 };

/// Conversion-efficiency saturation fit. Default model
/// eta(P) = eta_max sin^2((pi/2) sqrt(P/P_opt)), the standard
/// sum-frequency conversion saturation, peaking at exactly eta_max when
/// P = P_opt; a Hill form eta_max P/(P + P_sat) is selectable.
inline FitResult fit_saturation(
    const DataSeries& power, SaturationModel which = SaturationModel::SineSquared) {
  power.validate(3);
  for (double v : power.x)
    if (!(v > 0.0))
      throw std::domain_error("fit_saturation: powers must be positive");

  ParametricModel model;
  std::vector<std::string> names;
  if (which == SaturationModel::SineSquared) {
    model.value = [](double x, const std::vector<double>& p) {
      const double u = std::numbers::pi / 2.0 * std::sqrt(x / p[1]);
      const double s = std::sin(u);
      return p[0] * s * s;
    };
    model.gradient = [](double x, const std::vector<double>& p) {
      const double u = std::numbers::pi / 2.0 * std::sqrt(x / p[1]);
      const double s = std::sin(u);
      return std::vector<double>{s * s,
                                 -p[0] * std::sin(2.0 * u) * u / (2.0 * p[1])};
    };
    names = {"eta_max", "p_opt"};
  } else {
    model.value = [](double x, const std::vector<double>& p) {
      return p[0] * x / (x + p[1]);
    };
    model.gradient = [](double x, const std::vector<double>& p) {
      const double d = x + p[1];
      return std::vector<double>{x / d, -p[0] * x / (d * d)};
    };
    names = {"eta_max", "p_sat"};
  }

  std::size_t arg_max = 0;
  for (std::size_t i = 1; i < power.y.size(); ++i)
    if (power.y[i] > power.y[arg_max]) arg_max = i;
  const double eta0 = std::max(power.y[arg_max], 1e-6);
  const double p0 = power.x[arg_max];
  return least_squares(model, power, {eta0, p0}, std::move(names));
}

/// Joint two-detector sinusoid fit sharing (s, o):
///   series 1: A1 sin(s V/2 + o) + c1,  series 2: A2 cos(s V/2 + o) + c2.
struct PhaseModulatorFit {
  FitResult fit;
  double v_pi = std::numeric_limits<double>::quiet_NaN();
  double v_pi_half = std::numeric_limits<double>::quiet_NaN();
};

inline PhaseModulatorFit fit_phase_modulator(const std::vector<double>& v,
                                             const std::vector<double>& y1,
                                             const std::vector<double>& y2) {
  if (v.size() != y1.size() || v.size() != y2.size())
    throw std::invalid_argument("fit_phase_modulator: length mismatch");
  if (v.size() < 6)
    throw std::invalid_argument("fit_phase_modulator: need >= 6 points");
  const std::size_t n = v.size();

  // Frequency seed: periodogram scan over both detrended series.
  const auto [vmin_it, vmax_it] = std::minmax_element(v.begin(), v.end());
  const double span = *vmax_it - *vmin_it;
  if (!(span > 0.0))
    throw std::invalid_argument("fit_phase_modulator: degenerate voltages");
  double mean1 = 0.0, mean2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean1 += y1[i];
    mean2 += y2[i];
  }
  mean1 /= static_cast<double>(n);
  mean2 /= static_cast<double>(n);
  double best_omega = std::numbers::pi / span, best_power = -1.0;
  const int n_freq = 4096;
  for (int f = 1; f <= n_freq; ++f) {
    const double omega =
        f * (std::numbers::pi * static_cast<double>(n)) / (span * n_freq);
    std::complex<double> z1 = 0.0, z2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto ph = std::polar(1.0, -omega * v[i]);
      z1 += (y1[i] - mean1) * ph;
      z2 += (y2[i] - mean2) * ph;
    }
    const double power = std::norm(z1) + std::norm(z2);
    if (power > best_power) {
      best_power = power;
      best_omega = omega;
    }
  }
  const double s0 = 2.0 * best_omega;

  // Linear prefit of amplitude/phase/offset at the seeded frequency:
  // y1 ~ a sin(u) + b cos(u) + c with u = s0 v/2.
  std::vector<std::vector<double>> m(3, std::vector<double>(3, 0.0));
  std::vector<std::vector<double>> rhs(3, std::vector<double>(1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s0 * v[i] / 2.0;
    const double basis[3] = {std::sin(u), std::cos(u), 1.0};
    for (int a = 0; a < 3; ++a) {
      rhs[a][0] += basis[a] * y1[i];
      for (int b = 0; b < 3; ++b) m[a][b] += basis[a] * basis[b];
    }
  }
  double a1 = 1.0, b1 = 0.0, c1 = mean1;
  if (detail::solve_inplace(m, rhs)) {
    a1 = rhs[0][0];
    b1 = rhs[1][0];
    c1 = rhs[2][0];
  }
  const double o0 = std::atan2(b1, a1);
  const double amp1 = std::hypot(a1, b1);

  std::vector<double> p0 = {s0, o0, amp1, c1, amp1, mean2};
  std::vector<std::string> names = {"s", "o", "A1", "c1", "A2", "c2"};

  auto residuals = [&](const std::vector<double>& p) {
    std::vector<double> r(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = p[0] * v[i] / 2.0 + p[1];
      r[i] = y1[i] - (p[2] * std::sin(u) + p[3]);
      r[n + i] = y2[i] - (p[4] * std::cos(u) + p[5]);
    }
    return r;
  };
  auto jacobian = [&](const std::vector<double>& p) {
    std::vector<std::vector<double>> jac(2 * n, std::vector<double>(6, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      const double u = p[0] * v[i] / 2.0 + p[1];
      const double su = std::sin(u), cu = std::cos(u);
      jac[i][0] = -p[2] * cu * v[i] / 2.0;
      jac[i][1] = -p[2] * cu;
      jac[i][2] = -su;
      jac[i][3] = -1.0;
      jac[n + i][0] = p[4] * su * v[i] / 2.0;
      jac[n + i][1] = p[4] * su;
      jac[n + i][4] = -cu;
      jac[n + i][5] = -1.0;
    }
    return jac;
  };

  PhaseModulatorFit out;
  out.fit = lm_minimize(residuals, jacobian, p0, names);
  const double s = out.fit.param("s");
  // s is meaningless when the scan covers no phase or the modulation
  // amplitude vanished (constant count series).
  double y_lo = y1[0], y_hi = y1[0];
  for (double yv : y1) {
    y_lo = std::min(y_lo, yv);
    y_hi = std::max(y_hi, yv);
  }
  for (double yv : y2) {
    y_lo = std::min(y_lo, yv);
    y_hi = std::max(y_hi, yv);
  }
  const double a_scale =
      std::max(std::abs(out.fit.param("A1")), std::abs(out.fit.param("A2")));
  if (!(std::abs(s) * span > 1e-9) ||
      a_scale <= 1e-9 * std::max(y_hi - y_lo, 1.0)) {
    out.fit.non_identifiable = true;
    return out;
  }
  out.v_pi = std::abs(std::numbers::pi / s);
  out.v_pi_half = out.v_pi / 2.0;
  return out;
}

/// Weighted straight-line fit; the intercept is the photon-independent
/// background of the noise-vs-attenuation calibration.
inline FitResult fit_noise_linear(const DataSeries& control) {
  control.validate(2);
  const double x0 = control.x.front();
  bool degenerate = true;
  for (double v : control.x)
    if (v != x0) degenerate = false;
  if (degenerate)
    throw std::invalid_argument("fit_noise_linear: degenerate abscissa");

  ParametricModel model;
  model.value = [](double x, const std::vector<double>& p) {
    return p[0] * x + p[1];
  };
  model.gradient = [](double x, const std::vector<double>&) {
    return std::vector<double>{x, 1.0};
  };
  return least_squares(model, control, {0.0, 0.0}, {"slope", "intercept"});
}

}  // namespace qiface
