// Copyright 2026 The locmagic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "locmagic/magic.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {

// ---------------------------------------------------------------------------
// Anderson (non-interacting l-bit) limit.

/// sum_sigma tr(rho_k(t) sigma)^4 for a single precessing spin:
///   (4 - sin^2(2 theta) - sin^4(theta) sin^2(delta)) / 2,  delta = 4 h t + 2 phi.
inline double anderson_site_factor(double theta, double phi, double h, double t) {
  const double s2t = std::sin(2.0 * theta);
  const double st = std::sin(theta);
  const double sd = std::sin(4.0 * h * t + 2.0 * phi);
  return 0.5 * (4.0 - s2t * s2t - st * st * st * st * sd * sd);
}

struct QuadratureSpec {
  double abs_tol = 1e-8;
  unsigned max_depth = 20;
};

namespace detail {

/// -log2(site factor / 2) as a function of u = delta.
struct AndersonIntegrand {
  double s2;  // sin^2(2 theta)
  double s4;  // sin^4(theta)
  double operator()(double u) const {
    const double su = std::sin(u);
    return -std::log2(0.25 * (4.0 - s2 - s4 * su * su));
  }
};

inline double integrate_checked(const AndersonIntegrand& f, double a, double b, const QuadratureSpec& q,
                                double* err_out) {
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, q.max_depth, 1e-14, &err);
  *err_out = err;
  return v;
}

/// Mean over h uniform in [-W, W] of -log2(factor/2) for one site.
/// The integrand is pi-periodic in delta, so the delta range is split into
/// whole periods plus a remainder; both pieces use adaptive Gauss-Kronrod.
inline double anderson_site_average(double theta, double phi, double W, double t, const QuadratureSpec& q,
                                    double* err_out) {
  const double st = std::sin(theta);
  const double s2t = std::sin(2.0 * theta);
  const AndersonIntegrand f{s2t * s2t, st * st * st * st};
  *err_out = 0.0;
  if (f.s4 == 0.0 || t == 0.0) return f(2.0 * phi);
  const double half_span = 4.0 * W * t;
  const double a = 2.0 * phi - half_span;
  const double span = 2.0 * half_span;
  constexpr double pi = std::numbers::pi;
  const double periods = std::floor(span / pi);
  double total = 0.0, err = 0.0;
  if (periods > 0.0) {
    double e = 0.0;
    total += periods * integrate_checked(f, 0.0, pi, q, &e);
    err += periods * e;
  }
  const double rest = span - periods * pi;
  if (rest > 0.0) {
    const double start = std::fmod(a, pi);
    double e = 0.0;
    total += integrate_checked(f, start, start + rest, q, &e);
    err += e;
  }
  *err_out = err / span;
  return total / span;
}

}  // namespace detail

/// Disorder-averaged M_2 (bits) of a product state under pure spin precession,
/// fields uniform in [-W, W]: sum over sites of the average of -log2(factor/2).
/// At t = 0 this is the exact SRE of the initial product state.
inline double anderson_sre(const BlochAngles& angles, double W, double t, const QuadratureSpec& q = {}) {
  angles.validate();
  if (!(W > 0.0)) throw std::invalid_argument("anderson_sre: W must be > 0");
  if (!(t >= 0.0)) throw std::invalid_argument("anderson_sre: t must be >= 0");
  const std::size_t n = angles.size();
  if (n == 0) return 0.0;
  QuadratureSpec per_site = q;
  per_site.abs_tol = q.abs_tol / static_cast<double>(n);
  double total = 0.0;
  double prev_theta = std::numeric_limits<double>::quiet_NaN(), prev_phi = prev_theta, prev_val = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (angles.theta[k] == prev_theta && angles.phi[k] == prev_phi) {
      total += prev_val;
      continue;
    }
    double err = 0.0;
    const double v = detail::anderson_site_average(angles.theta[k], angles.phi[k], W, t, per_site, &err);
    if (!(err <= per_site.abs_tol) || !std::isfinite(v)) {
      throw NumericalError("anderson_sre: quadrature error " + std::to_string(err) + " > tolerance " +
                           std::to_string(per_site.abs_tol) + " at site " + std::to_string(k) +
                           " (theta=" + std::to_string(angles.theta[k]) + ", phi=" +
                           std::to_string(angles.phi[k]) + ", W=" + std::to_string(W) +
                           ", t=" + std::to_string(t) + ")");
    }
    prev_theta = angles.theta[k];
    prev_phi = angles.phi[k];
    prev_val = v;
    total += v;
  }
  return total;
}

/// Late-time window used for the analytic plateau.
inline constexpr double kPlateauTmin = 1e5;
inline constexpr double kPlateauTmax = 1e6;
inline constexpr int kPlateauPoints = 16;

/// Long-time plateau of anderson_sre, averaged over t in [1e5, 1e6].
inline double anderson_plateau(const BlochAngles& angles, double W, const QuadratureSpec& q = {}) {
  double s = 0.0;
  for (int i = 0; i < kPlateauPoints; ++i) {
    const double t = kPlateauTmin * std::pow(kPlateauTmax / kPlateauTmin, static_cast<double>(i) / (kPlateauPoints - 1));
    s += anderson_sre(angles, W, t, q);
  }
  return s / kPlateauPoints;
}

/// Nonstabilizerness gain: plateau minus the t = 0 value.
inline double magic_gain(const BlochAngles& angles, double W, const QuadratureSpec& q = {}) {
  return anderson_plateau(angles, W, q) - anderson_sre(angles, W, 0.0, q);
}

// ---------------------------------------------------------------------------
// Fits.

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  int n = 0;
};

/// Ordinary least squares y = intercept + slope x with standard errors.
inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("linear_fit: length mismatch");
  const int n = static_cast<int>(x.size());
  if (n < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: all x values equal");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / (n - 2);
    f.slope_stderr = std::sqrt(s2 / sxx);
    f.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

/// Inclusive time window. Edges carry a 1e-9 relative slack so that grid
/// times computed as t_min 10^{k/n} still land on decade boundaries.
struct FitWindow {
  double lo = 10.0;
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double t) const { return t >= lo * (1.0 - 1e-9) && t <= hi * (1.0 + 1e-9); }
};

/// M(t) = m_sat - c t^{-beta}.
struct SaturationFit {
  double m_sat = 0.0;   // bits
  double c = 0.0;       // bits
  double beta = 0.0;
  double m_sat_stderr = 0.0;
  double c_stderr = 0.0;
  double beta_stderr = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double residual_rms = 0.0;
  int n_points = 0;
  bool degenerate = false;  ///< constant data; beta undefined (NaN)

  double operator()(double t) const { return m_sat - c * std::pow(t, -beta); }
};

inline constexpr double kBetaMin = 0.01;
inline constexpr double kBetaMax = 2.0;

namespace detail {

struct InnerSolve {
  double m = 0.0, c = 0.0, rss = 0.0;
};

inline InnerSolve saturation_inner(std::span<const double> t, std::span<const double> v, double beta) {
  const std::size_t n = t.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::pow(t[i], -beta);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (v[i] - my);
  }
  InnerSolve s;
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  s.m = my - slope * mx;
  s.c = -slope;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = v[i] - s.m - slope * x[i];
    s.rss += r * r;
  }
  return s;
}

}  // namespace detail

/// Least-squares fit of m_sat - c t^{-beta} on points with t in `window`.
/// beta: 200-point grid over [0.01, 2], then golden-section refinement around
/// the best grid point; (m_sat, c) solved in closed form for each beta.
/// Points are sorted first, so the result does not depend on input order.
inline SaturationFit fit_power_law_saturation(std::span<const double> times, std::span<const double> values,
                                              FitWindow window = {}) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_power_law_saturation: length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (window.contains(times[i])) {
      if (!std::isfinite(values[i]) || !(times[i] > 0.0)) {
        throw std::invalid_argument("fit_power_law_saturation: non-finite value or non-positive time in window");
      }
      pts.emplace_back(times[i], values[i]);
    }
  }
  if (pts.size() < 8) {
    throw std::invalid_argument("fit_power_law_saturation: need >= 8 points in window, got " +
                                std::to_string(pts.size()));
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> t(pts.size()), v(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) std::tie(t[i], v[i]) = pts[i];

  SaturationFit fit;
  fit.t_lo = t.front();
  fit.t_hi = t.back();
  fit.n_points = static_cast<int>(t.size());
  const auto [vmin, vmax] = std::minmax_element(v.begin(), v.end());
  if (*vmax - *vmin <= 1e-12 * std::max(1.0, std::abs(*vmax))) {
    fit.degenerate = true;
    fit.m_sat = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    fit.c = 0.0;
    fit.beta = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }

  constexpr int kGrid = 200;
  auto rss_at = [&](double b) { return detail::saturation_inner(t, v, b).rss; };
  int best = 0;
  double best_rss = std::numeric_limits<double>::infinity();
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = kBetaMin + (kBetaMax - kBetaMin) * i / (kGrid - 1);
    const double r = rss_at(grid[i]);
    if (r < best_rss) {
      best_rss = r;
      best = i;
    }
  }
  double lo = grid[std::max(best - 1, 0)];
  double hi = grid[std::min(best + 1, kGrid - 1)];
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = rss_at(x1), f2 = rss_at(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = rss_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = rss_at(x2);
    }
  }
  double beta = 0.5 * (lo + hi);
  if (best_rss < rss_at(beta)) beta = grid[best];
  const auto inner = detail::saturation_inner(t, v, beta);
  fit.beta = beta;
  fit.m_sat = inner.m;
  fit.c = inner.c;
  fit.residual_rms = std::sqrt(inner.rss / t.size());

  // Linearized covariance at the optimum.
  const int n = fit.n_points;
  if (n > 3) {
    Eigen::MatrixXd jac(n, 3);
    for (int i = 0; i < n; ++i) {
      const double x = std::pow(t[i], -beta);
      jac(i, 0) = 1.0;
      jac(i, 1) = -x;
      jac(i, 2) = fit.c * x * std::log(t[i]);
    }
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::Matrix3d> lu(jtj);
    if (lu.isInvertible()) {
      const Eigen::Matrix3d cov = lu.inverse() * (inner.rss / (n - 3));
      fit.m_sat_stderr = std::sqrt(std::max(cov(0, 0), 0.0));
      fit.c_stderr = std::sqrt(std::max(cov(1, 1), 0.0));
      fit.beta_stderr = std::sqrt(std::max(cov(2, 2), 0.0));
    } else {
      fit.beta_stderr = std::numeric_limits<double>::infinity();
    }
  }
  return fit;
}

/// W(t) = amplitude * t^{-lambda}.
struct PowerLawDecayFit {
  double amplitude = 0.0;
  double lambda = 0.0;
  double lambda_stderr = 0.0;
  int n_points = 0;
};

/// Regression of ln W on ln t over points with t in `window`.
inline PowerLawDecayFit fit_power_law_decay(std::span<const double> times, std::span<const double> values,
                                            FitWindow window = {0.0, std::numeric_limits<double>::infinity()}) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_power_law_decay: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!window.contains(times[i])) continue;
    if (!(values[i] > 0.0) || !(times[i] > 0.0)) {
      throw std::invalid_argument("fit_power_law_decay: values and times must be positive");
    }
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 8) throw std::invalid_argument("fit_power_law_decay: need >= 8 points");
  const LinearFit lf = linear_fit(lx, ly);
  return {std::exp(lf.intercept), -lf.slope, lf.slope_stderr, lf.n};
}

/// Delta M_2^inf(L) = prefactor * exp(-lambda L).
struct AsymptoteFit {
  double prefactor = 0.0;
  double lambda = 0.0;
  double lambda_stderr = 0.0;
};

inline AsymptoteFit delta_m2_asymptote_fit(std::span<const double> sizes, std::span<const double> delta) {
  if (sizes.size() != delta.size()) throw std::invalid_argument("delta_m2_asymptote_fit: length mismatch");
  if (sizes.size() < 3) throw std::invalid_argument("delta_m2_asymptote_fit: need >= 3 sizes");
  std::vector<double> ly(delta.size());
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (!(delta[i] > 0.0)) throw std::invalid_argument("delta_m2_asymptote_fit: values must be positive");
    ly[i] = std::log(delta[i]);
  }
  const LinearFit lf = linear_fit(sizes, ly);
  return {std::exp(lf.intercept), -lf.slope, lf.slope_stderr};
}

// ---------------------------------------------------------------------------
// Entanglement-clock collapse.

/// M_2 as a function of entanglement entropy S.
struct SmCurve {
  std::vector<double> s;
  std::vector<double> m;
};

struct CollapseResult {
  double f = 1.0;
  std::vector<double> s_grid;
  std::vector<double> reference;  ///< reference M on s_grid
  std::vector<double> target;     ///< target M on s_grid
  double deviation = 0.0;         ///< RMS of target/f - reference on the grid
};

inline constexpr int kCollapseGridPoints = 64;

namespace detail {

/// Sort by S and keep only strictly increasing S; non-finite points are dropped.
inline SmCurve clean_curve(const SmCurve& c) {
  if (c.s.size() != c.m.size()) throw std::invalid_argument("collapse_factor: curve length mismatch");
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < c.s.size(); ++i) {
    if (std::isfinite(c.s[i]) && std::isfinite(c.m[i])) pts.emplace_back(c.s[i], c.m[i]);
  }
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  SmCurve out;
  for (const auto& [s, m] : pts) {
    if (!out.s.empty() && s <= out.s.back()) continue;
    out.s.push_back(s);
    out.m.push_back(m);
  }
  return out;
}

inline double interp(const SmCurve& c, double s) {
  auto it = std::upper_bound(c.s.begin(), c.s.end(), s);
  if (it == c.s.begin()) return c.m.front();
  if (it == c.s.end()) return c.m.back();
  const std::size_t j = static_cast<std::size_t>(it - c.s.begin());
  const double w = (s - c.s[j - 1]) / (c.s[j] - c.s[j - 1]);
  return c.m[j - 1] + w * (c.m[j] - c.m[j - 1]);
}

}  // namespace detail

/// f minimizing sum (M_target / f - M_reference)^2 on a common 64-point S grid
/// over the overlap of both curves: f = sum M_t^2 / sum M_t M_r.
inline CollapseResult collapse_factor(const SmCurve& reference, const SmCurve& target) {
  const SmCurve ref = detail::clean_curve(reference);
  const SmCurve tgt = detail::clean_curve(target);
  if (ref.s.size() < 2 || tgt.s.size() < 2) throw std::invalid_argument("collapse_factor: need >= 2 distinct S values per curve");
  const double lo = std::max(ref.s.front(), tgt.s.front());
  const double hi = std::min(ref.s.back(), tgt.s.back());
  if (!(hi > lo)) throw std::invalid_argument("collapse_factor: curves have no overlapping S range");
  CollapseResult r;
  double stt = 0.0, str = 0.0;
  for (int i = 0; i < kCollapseGridPoints; ++i) {
    const double s = lo + (hi - lo) * i / (kCollapseGridPoints - 1);
    const double mr = detail::interp(ref, s);
    const double mt = detail::interp(tgt, s);
    r.s_grid.push_back(s);
    r.reference.push_back(mr);
    r.target.push_back(mt);
    stt += mt * mt;
    str += mt * mr;
  }
  if (!(str != 0.0)) throw std::invalid_argument("collapse_factor: curves are orthogonal on the overlap");
  r.f = stt / str;
  double dev = 0.0;
  for (int i = 0; i < kCollapseGridPoints; ++i) {
    const double d = r.target[i] / r.f - r.reference[i];
    dev += d * d;
  }
  r.deviation = std::sqrt(dev / kCollapseGridPoints);
  return r;
}

// ---------------------------------------------------------------------------
// ETH-MBL crossover.

struct CrossoverCell {
  int L = 0;
  double W = 0.0;
  double m2 = 0.0;
};

struct CrossoverRow {
  int L = 0;
  double W = 0.0;
  double m2 = 0.0;
  double delta = 0.0;
  bool above_haar = false;  ///< delta < -1e-6, reported rather than clipped
};

struct CrossoverSlope {
  double W = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = 0.0;
  int n_sizes = 0;
};

struct CrossoverTable {
  std::vector<CrossoverRow> rows;
  std::vector<CrossoverSlope> slopes;
  std::vector<std::pair<int, double>> missing;  ///< (L, W) cells absent from the input
};

/// Delta M_2 = haar_sre2(L) - M_2 per cell and, per W, the least-squares slope in L.
inline CrossoverTable crossover_scan(const std::vector<CrossoverCell>& cells) {
  std::set<int> sizes;
  std::set<double> strengths;
  std::map<std::pair<double, int>, double> by_cell;
  for (const auto& c : cells) {
    sizes.insert(c.L);
    strengths.insert(c.W);
    if (!by_cell.emplace(std::make_pair(c.W, c.L), c.m2).second) {
      throw std::invalid_argument("crossover_scan: duplicate cell L=" + std::to_string(c.L) +
                                  " W=" + std::to_string(c.W));
    }
  }
  CrossoverTable out;
  for (double w : strengths) {
    std::vector<double> ls, ds;
    for (int l : sizes) {
      auto it = by_cell.find({w, l});
      if (it == by_cell.end()) {
        out.missing.emplace_back(l, w);
        continue;
      }
      CrossoverRow row{l, w, it->second, delta_m2(it->second, l), false};
      row.above_haar = row.delta < -1e-6;
      out.rows.push_back(row);
      ls.push_back(l);
      ds.push_back(row.delta);
    }
    CrossoverSlope sl;
    sl.W = w;
    sl.n_sizes = static_cast<int>(ls.size());
    if (ls.size() >= 2) {
      const auto lf = linear_fit(ls, ds);
      sl.slope = lf.slope;
      sl.slope_stderr = lf.slope_stderr;
    }
    out.slopes.push_back(sl);
  }
  return out;
}

}  // namespace locmagic
