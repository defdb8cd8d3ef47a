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

#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "locmagic/common.hpp"
#include "locmagic/entangle.hpp"
#include "locmagic/magic.hpp"
#include "locmagic/models.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {

/// Spectrum bounds did not contain H: the Chebyshev recurrence blew up.
class ChebyshevBoundsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// J_0(x) .. J_{n_max}(x) by Miller's backward recurrence, normalized with
/// J_0 + 2 sum_{k>=1} J_{2k} = 1. Accurate for all orders at x >= 0.
inline std::vector<double> bessel_j_sequence(double x, int n_max) {
  if (!(x >= 0.0) || n_max < 0) throw std::invalid_argument("bessel_j_sequence: need x >= 0, n_max >= 0");
  std::vector<double> out(n_max + 1, 0.0);
  if (x < 1e-300) {
    out[0] = 1.0;
    return out;
  }
  const double top = std::max<double>(n_max, std::ceil(x));
  int start = static_cast<int>(top + 50.0 + 2.0 * std::sqrt(40.0 * top));
  start += start & 1;
  double j_next = 0.0;  // J_{k+1}
  double j_cur = 1e-30; // J_k, arbitrary scale
  double norm = 0.0;
  constexpr double kBig = 1e250;
  for (int k = start; k >= 1; --k) {
    const double j_prev = (2.0 * k / x) * j_cur - j_next;
    j_next = j_cur;
    j_cur = j_prev;
    const int order = k - 1;
    if (order <= n_max) out[order] = j_cur;
    if (order > 0 && order % 2 == 0) norm += 2.0 * j_cur;
    if (std::abs(j_cur) > kBig) {
      j_cur /= kBig;
      j_next /= kBig;
      norm /= kBig;
      for (int i = order; i <= n_max; ++i) out[i] /= kBig;
    }
  }
  norm += j_cur;  // J_0
  for (auto& v : out) v /= norm;
  return out;
}

inline constexpr double kDefaultChebyshevTol = 1e-10;
/// Longest single expansion, in units of the rescaled time a*dt.
inline constexpr double kMaxChebyshevChunk = 1000.0;

struct ChebyshevStats {
  int terms = 0;        ///< total recurrence terms across sub-steps
  int substeps = 0;
  double norm_drift = 0.0;
  bool renormalized = false;
};

/// exp(-i H dt) |psi> by Chebyshev expansion.
///
/// With b = (E_max + E_min)/2 and a = (E_max - E_min)/2, H~ = (H - b)/a has
/// its spectrum in [-1, 1] and
///   exp(-i H dt) = exp(-i b dt) sum_k (2 - delta_k0) (-i)^k J_k(a dt) T_k(H~).
/// The series stops once |c_k| < tol for three consecutive k > a dt. Steps
/// with a dt > 1000 are split into equal sub-steps. `apply_h(in, out)` must
/// write H in into out.
template <typename Apply>
StateVector chebyshev_step(Apply&& apply_h, const EnergyBounds& bounds, const StateVector& psi,
                           double dt, double tol = kDefaultChebyshevTol,
                           ChebyshevStats* stats = nullptr) {
  if (!(dt > 0.0)) throw std::invalid_argument("chebyshev_step: dt must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("chebyshev_step: tol must be > 0");
  if (!(bounds.hi > bounds.lo)) throw std::invalid_argument("chebyshev_step: empty spectrum bounds");
  const double a = bounds.half_width();
  const double b = bounds.center();
  const std::size_t dim = psi.dim();
  const int n_sub = std::max(1, static_cast<int>(std::ceil(a * dt / kMaxChebyshevChunk)));
  const double tau = dt / n_sub;
  const double x = a * tau;
  const int n_max = static_cast<int>(x + 20.0 * std::cbrt(x) + 60.0);
  const std::vector<double> bessel = bessel_j_sequence(x, n_max);
  const cplx global = std::polar(1.0, -b * tau);
  const double norm0 = psi.norm_squared();

  ChebyshevStats local;
  local.substeps = n_sub;
  std::vector<cplx> cur(psi.amplitudes().begin(), psi.amplitudes().end());
  std::vector<cplx> prev(dim), next(dim), hv(dim), acc(dim);
  const cplx minus_i{0.0, -1.0};
  for (int step = 0; step < n_sub; ++step) {
    // k = 0
    for (std::size_t i = 0; i < dim; ++i) acc[i] = bessel[0] * cur[i];
    // k = 1: T_1 = H~
    prev.swap(cur);  // prev = T_0 psi
    apply_h(std::span<const cplx>(prev), std::span<cplx>(hv));
    cplx c = 2.0 * minus_i * bessel[1];
    for (std::size_t i = 0; i < dim; ++i) {
      cur[i] = (hv[i] - b * prev[i]) / a;
      acc[i] += c * cur[i];
    }
    int small_run = 0;
    int k = 1;
    cplx phase = minus_i;
    while (true) {
      ++k;
      if (k > n_max) {
        throw NumericalError("chebyshev_step: series did not converge within " + std::to_string(n_max) + " terms");
      }
      phase *= minus_i;
      c = 2.0 * bessel[k] * phase;
      apply_h(std::span<const cplx>(cur), std::span<cplx>(hv));
      const double two_over_a = 2.0 / a;
      for (std::size_t i = 0; i < dim; ++i) {
        next[i] = two_over_a * (hv[i] - b * cur[i]) - prev[i];
        acc[i] += c * next[i];
      }
      prev.swap(cur);
      cur.swap(next);
      if (k % 16 == 0) {
        double nn = 0.0;
        for (const auto& v : cur) nn += std::norm(v);
        if (!(nn <= 4.0 * norm0)) {
          throw ChebyshevBoundsError("chebyshev_step: |T_k psi| grew to " + std::to_string(std::sqrt(nn)) +
                                     " at k=" + std::to_string(k) + "; spectrum bounds violated");
        }
      }
      if (std::abs(c) < tol && k > x) {
        if (++small_run >= 3) break;
      } else {
        small_run = 0;
      }
    }
    local.terms += k + 1;
    for (std::size_t i = 0; i < dim; ++i) cur[i] = global * acc[i];
  }
  StateVector out(psi.n_qubits(), std::move(cur));
  const double n1 = out.norm_squared();
  local.norm_drift = std::abs(std::sqrt(n1) - std::sqrt(norm0));
  if (local.norm_drift > 1e-12) {
    local.renormalized = true;
    const double s = std::sqrt(norm0 / n1);
    for (auto& v : out.amplitudes()) v *= s;
  }
  if (local.norm_drift > 1e-6) {
    throw ChebyshevBoundsError("chebyshev_step: norm drift " + std::to_string(local.norm_drift));
  }
  if (stats) *stats = local;
  return out;
}

/// amplitudes[n] *= exp(-i E[n] t); exact.
inline StateVector diagonal_evolve(std::span<const double> energies, const StateVector& psi, double t) {
  if (energies.size() != psi.dim()) throw std::invalid_argument("diagonal_evolve: table length != 2^L");
  StateVector out = psi;
  for (std::size_t n = 0; n < energies.size(); ++n) out[n] *= std::polar(1.0, -energies[n] * t);
  return out;
}

/// Geometric time grid, `per_decade` points per decade from t_min, t_max appended.
struct TimeGrid {
  std::vector<double> times;
  double t_min = 0.1;
  double t_max = 2e4;
  int per_decade = 10;

  std::size_t size() const { return times.size(); }
};

inline TimeGrid make_time_grid(double t_min = 0.1, double t_max = 2e4, int per_decade = 10) {
  if (!(t_min > 0.0) || !(t_max > t_min)) throw std::invalid_argument("make_time_grid: need 0 < t_min < t_max");
  if (per_decade < 1) throw std::invalid_argument("make_time_grid: per_decade must be >= 1");
  TimeGrid g{{}, t_min, t_max, per_decade};
  const double decades = std::log10(t_max / t_min);
  const int steps = static_cast<int>(std::floor(per_decade * decades + 1e-9));
  for (int k = 0; k < steps; ++k) g.times.push_back(t_min * std::pow(10.0, static_cast<double>(k) / per_decade));
  g.times.push_back(t_max);
  return g;
}

enum class SreMethodKind { kExact, kProduct, kSampled };

struct SreMethod {
  SreMethodKind kind = SreMethodKind::kExact;
  int samples = 15000;

  static SreMethod exact() { return {SreMethodKind::kExact, 0}; }
  static SreMethod product() { return {SreMethodKind::kProduct, 0}; }
  static SreMethod sampled(int n) { return {SreMethodKind::kSampled, n}; }
};

inline std::string_view to_string(SreMethodKind k) {
  switch (k) {
    case SreMethodKind::kExact: return "exact";
    case SreMethodKind::kProduct: return "product";
    case SreMethodKind::kSampled: return "sampled";
  }
  return "?";
}

inline SreMethodKind parse_sre_method(std::string_view s) {
  if (s == "exact") return SreMethodKind::kExact;
  if (s == "product") return SreMethodKind::kProduct;
  if (s == "sampled") return SreMethodKind::kSampled;
  throw std::invalid_argument("unknown SRE method '" + std::string(s) + "'");
}

struct Observables {
  bool m2 = true;
  bool entropy = true;
  bool wz = true;
};

/// Observables of one trajectory on a grid. Units: M2 bits, S nats, W_Z dimensionless.
/// Observables that were not requested hold NaN.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> m2;
  std::vector<double> m2_stderr;  ///< sampled method only, else zeros
  std::vector<double> entropy;
  std::vector<double> wz;
  Observables observables;
  std::uint64_t seed = 0;
  int cut = 0;
  double max_norm_drift = 0.0;
  long chebyshev_terms = 0;
};

struct EvolveOptions {
  Observables observables;
  SreMethod sre;
  int cut = 0;  ///< 0 means L/2
  double chebyshev_tol = kDefaultChebyshevTol;
};

/// Steps `initial` through the grid (Chebyshev for TFIM, exact phases for the
/// l-bit model) and evaluates the requested observables at every grid time.
/// `sampling_rng` is required for the sampled SRE method.
inline TimeSeries evolve_and_measure(const DisorderRealization& model, const StateVector& initial,
                                     const TimeGrid& grid, const EvolveOptions& opt,
                                     Rng* sampling_rng = nullptr) {
  const int n = model.n_qubits();
  if (initial.n_qubits() != n) throw std::invalid_argument("evolve_and_measure: state/model size mismatch");
  if (grid.times.empty()) throw std::invalid_argument("evolve_and_measure: empty grid");
  if (opt.sre.kind == SreMethodKind::kProduct && opt.observables.m2 && model.interacting()) {
    throw std::invalid_argument("evolve_and_measure: product fast path needs a non-interacting l-bit model");
  }
  if (opt.sre.kind == SreMethodKind::kSampled && opt.observables.m2 && sampling_rng == nullptr) {
    throw std::invalid_argument("evolve_and_measure: sampled SRE needs an rng");
  }
  if (opt.sre.kind == SreMethodKind::kExact && opt.observables.m2) {
    require_qubits(n, kMaxExactQubits, "evolve_and_measure (exact SRE)");
  }
  const int cut = opt.cut == 0 ? n / 2 : opt.cut;
  const bool want_entropy = opt.observables.entropy && n >= 2;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::size_t len = grid.size();
  TimeSeries ts;
  ts.times = grid.times;
  ts.m2.assign(len, nan);
  ts.m2_stderr.assign(len, 0.0);
  ts.entropy.assign(len, nan);
  ts.wz.assign(len, nan);
  ts.observables = opt.observables;
  ts.observables.entropy = want_entropy;
  ts.seed = model.seed;
  ts.cut = cut;

  auto measure = [&](std::size_t i, const StateVector& s) {
    if (opt.observables.m2) {
      switch (opt.sre.kind) {
        case SreMethodKind::kExact: ts.m2[i] = sre(s, 2); break;
        case SreMethodKind::kProduct: ts.m2[i] = sre2_product(site_densities(s)); break;
        case SreMethodKind::kSampled: {
          const auto est = sre2_sampled(s, opt.sre.samples, *sampling_rng);
          ts.m2[i] = est.estimate;
          ts.m2_stderr[i] = est.std_error;
          break;
        }
      }
    }
    if (want_entropy) ts.entropy[i] = entanglement_entropy(s, cut);
    if (opt.observables.wz) ts.wz[i] = w_z(s);
    ts.max_norm_drift = std::max(ts.max_norm_drift, std::abs(s.norm() - 1.0));
  };

  if (model.kind() == ModelKind::kLBit) {
    const auto table = lbit_energy_table(model);
    for (std::size_t i = 0; i < len; ++i) measure(i, diagonal_evolve(table, initial, grid.times[i]));
    return ts;
  }

  TfimOperator op(model);
  EnergyBounds bounds = energy_bounds(model);
  auto apply = [&op](std::span<const cplx> in, std::span<cplx> out) { op.apply(in, out); };
  StateVector state = initial;
  double t_prev = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double dt = grid.times[i] - t_prev;
    if (dt > 0.0) {
      ChebyshevStats st;
      state = chebyshev_step(apply, bounds, state, dt, opt.chebyshev_tol, &st);
      ts.chebyshev_terms += st.terms;
      ts.max_norm_drift = std::max(ts.max_norm_drift, st.norm_drift);
    }
    t_prev = grid.times[i];
    measure(i, state);
  }
  return ts;
}

}  // namespace locmagic
