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
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "locmagic/common.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {

enum class ModelKind { kTfim, kLBit };

inline std::string_view to_string(ModelKind k) { return k == ModelKind::kTfim ? "tfim" : "lbit"; }

inline ModelKind parse_model_kind(std::string_view s) {
  if (s == "tfim") return ModelKind::kTfim;
  if (s == "lbit") return ModelKind::kLBit;
  throw std::invalid_argument("unknown model '" + std::string(s) + "'");
}

/// Disordered transverse-field Ising chain with open boundaries:
///   H = sum_i J_{i,i+1} Z_i Z_{i+1} + sum_i h_i Z_i + g sum_i X_i,
/// h_i uniform in [-W, W], J_{i,i+1} uniform in [J_low, J_high].
struct TfimParams {
  int L = 0;
  double W = 0.0;
  double g = 1.0;
  double J_low = 0.8;
  double J_high = 1.2;

  void validate() const {
    require_qubits(L, kMaxQubits, "TfimParams");
    if (!(W >= 0.0)) throw std::invalid_argument("TfimParams: W must be >= 0");
    if (!(J_low < J_high)) throw std::invalid_argument("TfimParams: need J_low < J_high");
    if (!std::isfinite(g)) throw std::invalid_argument("TfimParams: g must be finite");
  }
};

/// On-site field law for the l-bit model: uniform on [a, b] or normal(mean a, sd b).
struct FieldDistribution {
  enum class Kind { kUniform, kNormal };
  Kind kind = Kind::kUniform;
  double a = -1.0;
  double b = 1.0;

  static FieldDistribution symmetric_uniform(double w) { return {Kind::kUniform, -w, w}; }

  void validate() const {
    if (kind == Kind::kUniform && !(a <= b)) throw std::invalid_argument("FieldDistribution: a > b");
    if (kind == Kind::kNormal && !(b >= 0.0)) throw std::invalid_argument("FieldDistribution: sd < 0");
  }

  double sample(Rng& rng) const {
    if (kind == Kind::kUniform) return std::uniform_real_distribution<double>(a, b)(rng);
    return std::normal_distribution<double>(a, b)(rng);
  }
};

/// Phenomenological l-bit model in the tau^z basis (dressing U = I):
///   H = sum_i h_i t_i + sum_{|S| = 2..max_order} J_S prod_{i in S} t_i,
/// J_S ~ N(0, exp(-d(S)/xi)), d(S) = largest distance between sites of S.
struct LBitParams {
  int L = 0;
  double xi = 1.0;
  int max_order = 3;
  FieldDistribution field;

  void validate() const {
    require_qubits(L, kMaxQubits, "LBitParams");
    if (!(xi > 0.0)) throw std::invalid_argument("LBitParams: xi must be > 0");
    if (max_order < 1 || max_order > 3) throw std::invalid_argument("LBitParams: max_order must be 1..3");
    field.validate();
  }
};

/// Multi-spin l-bit coupling on the sites set in `sites`.
struct LBitCoupling {
  std::uint64_t sites = 0;
  double value = 0.0;
  friend bool operator==(const LBitCoupling&, const LBitCoupling&) = default;
};

inline int max_separation(std::uint64_t sites) {
  if (sites == 0) return 0;
  return 63 - std::countl_zero(sites) - std::countr_zero(sites);
}

/// One disorder instance. TFIM uses h, bonds and g; the l-bit model uses h and couplings.
struct DisorderRealization {
  std::variant<TfimParams, LBitParams> params;
  std::uint64_t seed = 0;
  std::vector<double> h;
  std::vector<double> bonds;
  double g = 0.0;
  std::vector<LBitCoupling> couplings;

  ModelKind kind() const {
    return std::holds_alternative<TfimParams>(params) ? ModelKind::kTfim : ModelKind::kLBit;
  }
  int n_qubits() const { return static_cast<int>(h.size()); }

  /// False for the Anderson limit (l-bit model without multi-spin terms).
  bool interacting() const {
    if (kind() == ModelKind::kTfim) return true;
    return std::any_of(couplings.begin(), couplings.end(),
                       [](const LBitCoupling& c) { return c.value != 0.0; });
  }

  friend bool operator==(const DisorderRealization& a, const DisorderRealization& b) {
    return a.kind() == b.kind() && a.seed == b.seed && a.h == b.h && a.bonds == b.bonds &&
           a.g == b.g && a.couplings == b.couplings;
  }
};

inline DisorderRealization sample_tfim(const TfimParams& p, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  DisorderRealization r;
  r.params = p;
  r.seed = seed;
  r.g = p.g;
  std::uniform_real_distribution<double> field(-p.W, p.W);
  std::uniform_real_distribution<double> bond(p.J_low, p.J_high);
  r.h.resize(p.L);
  for (auto& v : r.h) v = p.W > 0.0 ? field(rng) : 0.0;
  r.bonds.resize(p.L - 1);
  for (auto& v : r.bonds) v = bond(rng);
  return r;
}

inline DisorderRealization sample_lbit(const LBitParams& p, std::uint64_t seed) {
  p.validate();
  Rng rng(seed);
  DisorderRealization r;
  r.params = p;
  r.seed = seed;
  r.h.resize(p.L);
  for (auto& v : r.h) v = p.field.sample(rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto add = [&](std::uint64_t sites) {
    const double sd = std::exp(-0.5 * max_separation(sites) / p.xi);
    r.couplings.push_back({sites, sd * gauss(rng)});
  };
  if (p.max_order >= 2) {
    for (int i = 0; i < p.L; ++i)
      for (int j = i + 1; j < p.L; ++j) add((1ULL << i) | (1ULL << j));
  }
  if (p.max_order >= 3) {
    for (int i = 0; i < p.L; ++i)
      for (int j = i + 1; j < p.L; ++j)
        for (int k = j + 1; k < p.L; ++k) add((1ULL << i) | (1ULL << j) | (1ULL << k));
  }
  return r;
}

inline constexpr int kMaxTableQubits = 26;

/// Diagonal (ZZ + Z) part of the TFIM Hamiltonian in the computational basis.
inline std::vector<double> tfim_diagonal(const DisorderRealization& r) {
  if (r.kind() != ModelKind::kTfim) throw std::invalid_argument("tfim_diagonal: not a TFIM realization");
  const int n = r.n_qubits();
  require_qubits(n, kMaxTableQubits, "tfim_diagonal");
  std::vector<double> e(dim_of(n));
  for (std::size_t s = 0; s < e.size(); ++s) {
    double v = 0.0;
    for (int i = 0; i < n; ++i) {
      const double si = ((s >> i) & 1U) ? -1.0 : 1.0;
      v += r.h[i] * si;
      if (i + 1 < n) v += r.bonds[i] * si * (((s >> (i + 1)) & 1U) ? -1.0 : 1.0);
    }
    e[s] = v;
  }
  return e;
}

/// Energies E[n] = sum_i h_i s_i + sum_S J_S prod_{i in S} s_i, s_i = +1 for bit 0.
inline std::vector<double> lbit_energy_table(const DisorderRealization& r) {
  if (r.kind() != ModelKind::kLBit) throw std::invalid_argument("lbit_energy_table: not an l-bit realization");
  const int n = r.n_qubits();
  require_qubits(n, kMaxTableQubits, "lbit_energy_table");
  std::vector<double> e(dim_of(n), 0.0);
  for (int i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    const double hi = r.h[i];
    for (std::size_t s = 0; s < e.size(); ++s) e[s] += (s & bit) ? -hi : hi;
  }
  for (const auto& c : r.couplings) {
    for (std::size_t s = 0; s < e.size(); ++s) e[s] += parity(s & c.sites) ? -c.value : c.value;
  }
  return e;
}

/// Matrix-free TFIM Hamiltonian: diagonal table plus L bit-flip passes.
class TfimOperator {
 public:
  explicit TfimOperator(const DisorderRealization& r)
      : n_qubits_(r.n_qubits()), g_(r.g), diag_(tfim_diagonal(r)) {}

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return diag_.size(); }
  const std::vector<double>& diagonal() const { return diag_; }

  /// out = H in. `out` must not alias `in`.
  void apply(std::span<const cplx> in, std::span<cplx> out) const {
    const std::size_t d = diag_.size();
    if (in.size() != d || out.size() != d) throw std::invalid_argument("TfimOperator: dimension mismatch");
    for (std::size_t s = 0; s < d; ++s) out[s] = diag_[s] * in[s];
    if (g_ == 0.0) return;
    for (int i = 0; i < n_qubits_; ++i) {
      const std::size_t stride = std::size_t{1} << i;
      for (std::size_t base = 0; base < d; base += 2 * stride) {
        cplx* lo = out.data() + base;
        cplx* hi = lo + stride;
        const cplx* in_lo = in.data() + base;
        const cplx* in_hi = in_lo + stride;
        for (std::size_t j = 0; j < stride; ++j) {
          lo[j] += g_ * in_hi[j];
          hi[j] += g_ * in_lo[j];
        }
      }
    }
  }

  /// Upper bound on the spectral radius from row sums.
  double gershgorin_radius() const {
    double m = 0.0;
    for (double v : diag_) m = std::max(m, std::abs(v));
    return m + std::abs(g_) * n_qubits_;
  }

 private:
  int n_qubits_;
  double g_;
  std::vector<double> diag_;
};

inline StateVector tfim_apply(const DisorderRealization& r, const StateVector& psi) {
  if (r.kind() != ModelKind::kTfim) throw std::invalid_argument("tfim_apply: not a TFIM realization");
  if (psi.n_qubits() != r.n_qubits()) throw std::invalid_argument("tfim_apply: dimension mismatch");
  TfimOperator op(r);
  StateVector out(psi.n_qubits());
  op.apply(psi.amplitudes(), out.amplitudes());
  return out;
}

/// <psi|H|psi> for either model.
inline double energy_expectation(const DisorderRealization& r, const StateVector& psi) {
  if (psi.n_qubits() != r.n_qubits()) throw std::invalid_argument("energy_expectation: dimension mismatch");
  if (r.kind() == ModelKind::kTfim) return inner(psi, tfim_apply(r, psi)).real();
  const auto e = lbit_energy_table(r);
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += e[i] * std::norm(psi[i]);
  return s;
}

/// Interval meant to contain the spectrum of H.
struct EnergyBounds {
  double lo = 0.0;
  double hi = 0.0;
  bool converged = true;   ///< false: iteration cap hit, margin widened to 10%
  int iterations = 0;

  double center() const { return 0.5 * (hi + lo); }
  double half_width() const { return 0.5 * (hi - lo); }
};

namespace detail {

/// Extremal Ritz values by Lanczos with full reorthogonalization (when the
/// Krylov basis fits in memory). Each end is pushed out by its residual norm,
/// then both by `margin` times the width (10% instead if not converged).
template <typename Apply>
EnergyBounds lanczos_bounds(Apply&& apply, std::size_t dim, std::uint64_t seed,
                            double margin = 0.02, int max_iter = 200) {
  using Vec = std::vector<cplx>;
  const int cap = static_cast<int>(std::min<std::size_t>(dim, max_iter));
  const bool keep_basis = dim * static_cast<std::size_t>(cap) <= (std::size_t{1} << 25);

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim), v_prev(dim, 0.0), w(dim);
  double nrm = 0.0;
  for (auto& a : v) {
    a = {gauss(rng), gauss(rng)};
    nrm += std::norm(a);
  }
  nrm = std::sqrt(nrm);
  for (auto& a : v) a /= nrm;

  std::vector<Vec> basis;
  std::vector<double> alpha, beta;  // beta[j] couples j and j+1
  auto dot = [dim](const Vec& a, const Vec& b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < dim; ++i) s += std::conj(a[i]) * b[i];
    return s;
  };

  EnergyBounds out;
  out.converged = false;
  double th_lo = 0.0, th_hi = 0.0, res_lo = 0.0, res_hi = 0.0;
  for (int j = 0; j < cap; ++j) {
    if (keep_basis) basis.push_back(v);
    apply(std::span<const cplx>(v), std::span<cplx>(w));
    const double a = dot(v, w).real();
    alpha.push_back(a);
    const double b_prev = beta.empty() ? 0.0 : beta.back();
    for (std::size_t i = 0; i < dim; ++i) w[i] -= a * v[i] + b_prev * v_prev[i];
    if (keep_basis) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
          const cplx c = dot(q, w);
          for (std::size_t i = 0; i < dim; ++i) w[i] -= c * q[i];
        }
      }
    }
    double b = 0.0;
    for (const auto& x : w) b += std::norm(x);
    b = std::sqrt(b);

    const int m = j + 1;
    const bool last = (m == cap);
    const double scale = std::max(1.0, std::abs(a));
    const bool exhausted = b <= 1e-12 * scale;
    if (m % 5 == 0 || last || exhausted || m <= 2) {
      Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
      Eigen::VectorXd sub(std::max(m - 1, 0));
      for (int i = 0; i + 1 < m; ++i) sub[i] = beta[i];
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
      es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      th_lo = es.eigenvalues()[0];
      th_hi = es.eigenvalues()[m - 1];
      res_lo = exhausted ? 0.0 : b * std::abs(es.eigenvectors()(m - 1, 0));
      res_hi = exhausted ? 0.0 : b * std::abs(es.eigenvectors()(m - 1, m - 1));
      const double tol = 1e-8 * std::max({1.0, std::abs(th_lo), std::abs(th_hi)});
      out.iterations = m;
      if (exhausted || (res_lo <= tol && res_hi <= tol) || (m == static_cast<int>(dim))) {
        out.converged = true;
        break;
      }
    }
    if (exhausted) break;
    beta.push_back(b);
    v_prev.swap(v);
    for (std::size_t i = 0; i < dim; ++i) v[i] = w[i] / b;
  }
  const double frac = out.converged ? margin : 0.10;
  const double lo = th_lo - res_lo;
  const double hi = th_hi + res_hi;
  const double width = std::max(hi - lo, 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)}));
  out.lo = lo - frac * width;
  out.hi = hi + frac * width;
  return out;
}

}  // namespace detail

/// Spectrum bounds. l-bit: exact min/max of the energy table. TFIM: Lanczos
/// extremes widened by 2% of the width, clipped to the Gershgorin interval.
inline EnergyBounds energy_bounds(const DisorderRealization& r) {
  if (r.kind() == ModelKind::kLBit) {
    const auto e = lbit_energy_table(r);
    const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
    return EnergyBounds{*lo, *hi, true, 0};
  }
  TfimOperator op(r);
  auto apply = [&op](std::span<const cplx> in, std::span<cplx> out) { op.apply(in, out); };
  EnergyBounds b = detail::lanczos_bounds(apply, op.dim(), r.seed ^ 0x1a7c2052ULL);
  const double g = op.gershgorin_radius();
  b.lo = std::max(b.lo, -g);
  b.hi = std::min(b.hi, g);
  return b;
}

// JSON form for reproducibility audits.

inline nlohmann::json to_json(const FieldDistribution& f) {
  return {{"kind", f.kind == FieldDistribution::Kind::kUniform ? "uniform" : "normal"},
          {"a", f.a}, {"b", f.b}};
}

inline FieldDistribution field_distribution_from_json(const nlohmann::json& j) {
  FieldDistribution f;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "uniform") f.kind = FieldDistribution::Kind::kUniform;
  else if (kind == "normal") f.kind = FieldDistribution::Kind::kNormal;
  else throw std::invalid_argument("unknown field distribution '" + kind + "'");
  f.a = j.at("a").get<double>();
  f.b = j.at("b").get<double>();
  return f;
}

inline nlohmann::json to_json(const DisorderRealization& r) {
  nlohmann::json j;
  j["model"] = std::string(to_string(r.kind()));
  j["seed"] = r.seed;
  j["h"] = r.h;
  if (const auto* t = std::get_if<TfimParams>(&r.params)) {
    j["params"] = {{"L", t->L}, {"W", t->W}, {"g", t->g}, {"J_low", t->J_low}, {"J_high", t->J_high}};
    j["bonds"] = r.bonds;
    j["g"] = r.g;
  } else {
    const auto& l = std::get<LBitParams>(r.params);
    j["params"] = {{"L", l.L}, {"xi", l.xi}, {"max_order", l.max_order}, {"field", to_json(l.field)}};
    auto& arr = j["couplings"] = nlohmann::json::array();
    for (const auto& c : r.couplings) arr.push_back({{"sites", c.sites}, {"value", c.value}});
  }
  return j;
}

inline DisorderRealization realization_from_json(const nlohmann::json& j) {
  DisorderRealization r;
  const auto kind = parse_model_kind(j.at("model").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.h = j.at("h").get<std::vector<double>>();
  const auto& p = j.at("params");
  if (kind == ModelKind::kTfim) {
    TfimParams t;
    t.L = p.at("L").get<int>();
    t.W = p.at("W").get<double>();
    t.g = p.at("g").get<double>();
    t.J_low = p.at("J_low").get<double>();
    t.J_high = p.at("J_high").get<double>();
    r.params = t;
    r.bonds = j.at("bonds").get<std::vector<double>>();
    r.g = j.at("g").get<double>();
  } else {
    LBitParams l;
    l.L = p.at("L").get<int>();
    l.xi = p.at("xi").get<double>();
    l.max_order = p.at("max_order").get<int>();
    l.field = field_distribution_from_json(p.at("field"));
    r.params = l;
    for (const auto& c : j.at("couplings")) {
      r.couplings.push_back({c.at("sites").get<std::uint64_t>(), c.at("value").get<double>()});
    }
  }
  if (static_cast<int>(r.h.size()) < 1) throw std::invalid_argument("realization_from_json: empty h");
  return r;
}

}  // namespace locmagic
