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
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locmagic/common.hpp"

namespace locmagic {

/// Dense pure state of L qubits.
///
/// Basis convention: site k is bit k of the basis index (site 0 is the least
/// significant bit); bit value 0 is |up> (Z = +1), bit value 1 is |down>.
class StateVector {
 public:
  StateVector() = default;

  /// |0...0> on `n_qubits` qubits.
  explicit StateVector(int n_qubits) : n_qubits_(n_qubits) {
    require_qubits(n_qubits, kMaxQubits, "StateVector");
    amps_.assign(dim_of(n_qubits), cplx{0.0, 0.0});
    amps_[0] = 1.0;
  }

  StateVector(int n_qubits, std::vector<cplx> amplitudes)
      : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {
    require_qubits(n_qubits, kMaxQubits, "StateVector");
    if (amps_.size() != dim_of(n_qubits)) {
      throw std::invalid_argument("StateVector: amplitude count " + std::to_string(amps_.size()) +
                                  " != 2^" + std::to_string(n_qubits));
    }
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }

  std::span<const cplx> amplitudes() const { return amps_; }
  std::span<cplx> amplitudes() { return amps_; }

  const cplx& operator[](std::size_t i) const { return amps_[i]; }
  cplx& operator[](std::size_t i) { return amps_[i]; }

  double norm_squared() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return s;
  }
  double norm() const { return std::sqrt(norm_squared()); }

  void normalize() {
    const double n = norm();
    if (!(n > 0.0)) throw std::invalid_argument("StateVector::normalize: zero vector");
    for (auto& a : amps_) a /= n;
  }

  /// Probability vector |amplitude|^2.
  std::vector<double> probabilities() const {
    std::vector<double> p(amps_.size());
    std::transform(amps_.begin(), amps_.end(), p.begin(), [](cplx a) { return std::norm(a); });
    return p;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;

 private:
  int n_qubits_ = 0;
  std::vector<cplx> amps_;
};

/// <a|b>
inline cplx inner(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("inner: dimension mismatch");
  cplx s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dim(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline double max_abs_diff(const StateVector& a, const StateVector& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("max_abs_diff: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Per-site Bloch angles for a product state cos(theta/2)|up> + e^{i phi} sin(theta/2)|down>.
struct BlochAngles {
  std::vector<double> theta;  // [0, pi]
  std::vector<double> phi;    // [0, 2 pi)

  std::size_t size() const { return theta.size(); }

  static BlochAngles uniform(int n_sites, double theta, double phi) {
    return BlochAngles{std::vector<double>(n_sites, theta), std::vector<double>(n_sites, phi)};
  }

  void validate() const {
    if (theta.size() != phi.size()) {
      throw std::invalid_argument("BlochAngles: theta/phi length mismatch");
    }
    constexpr double eps = 1e-12;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      if (!(theta[k] >= -eps && theta[k] <= std::numbers::pi + eps)) {
        throw std::invalid_argument("BlochAngles: theta[" + std::to_string(k) + "] outside [0, pi]");
      }
      if (!(phi[k] >= -eps && phi[k] < 2.0 * std::numbers::pi + eps)) {
        throw std::invalid_argument("BlochAngles: phi[" + std::to_string(k) + "] outside [0, 2pi)");
      }
    }
  }
};

inline StateVector make_product_state(const BlochAngles& angles) {
  angles.validate();
  const int n = static_cast<int>(angles.size());
  require_qubits(n, kMaxQubits, "make_product_state");
  std::vector<cplx> amps{cplx{1.0, 0.0}};
  amps.reserve(dim_of(n));
  for (int k = 0; k < n; ++k) {
    const cplx up = std::cos(angles.theta[k] / 2.0);
    const cplx down = std::polar(std::sin(angles.theta[k] / 2.0), angles.phi[k]);
    const std::size_t half = amps.size();
    amps.resize(2 * half);
    for (std::size_t i = 0; i < half; ++i) {
      amps[half + i] = amps[i] * down;
      amps[i] *= up;
    }
  }
  return StateVector(n, std::move(amps));
}

/// Same as above, but also checks the angle count against the requested L.
inline StateVector make_product_state(const BlochAngles& angles, int n_qubits) {
  if (static_cast<int>(angles.size()) != n_qubits) {
    throw std::invalid_argument("make_product_state: " + std::to_string(angles.size()) +
                                " angle pairs for L=" + std::to_string(n_qubits));
  }
  return make_product_state(angles);
}

enum class StateFamily { kZRandom, kXRandom, kYRandom, kXPlus, kTProduct, kBlochRandom, kHamming };

inline std::string_view to_string(StateFamily f) {
  switch (f) {
    case StateFamily::kZRandom: return "z-random";
    case StateFamily::kXRandom: return "x-random";
    case StateFamily::kYRandom: return "y-random";
    case StateFamily::kXPlus: return "x-plus";
    case StateFamily::kTProduct: return "t-product";
    case StateFamily::kBlochRandom: return "bloch-random";
    case StateFamily::kHamming: return "hamming";
  }
  return "?";
}

inline StateFamily parse_state_family(std::string_view s) {
  for (auto f : {StateFamily::kZRandom, StateFamily::kXRandom, StateFamily::kYRandom,
                 StateFamily::kXPlus, StateFamily::kTProduct, StateFamily::kBlochRandom,
                 StateFamily::kHamming}) {
    if (to_string(f) == s) return f;
  }
  throw std::invalid_argument("unknown state family '" + std::string(s) + "'");
}

/// Eigenbasis used for random basis-state families.
enum class Basis { kZ, kX, kY };

inline StateFamily family_of(Basis b) {
  switch (b) {
    case Basis::kZ: return StateFamily::kZRandom;
    case Basis::kX: return StateFamily::kXRandom;
    case Basis::kY: return StateFamily::kYRandom;
  }
  return StateFamily::kZRandom;
}

inline std::optional<Basis> basis_of(StateFamily f) {
  switch (f) {
    case StateFamily::kZRandom: return Basis::kZ;
    case StateFamily::kXRandom: return Basis::kX;
    case StateFamily::kYRandom: return Basis::kY;
    default: return std::nullopt;
  }
}

/// Bloch angles drawn for a named product family. One draw sequence per site,
/// site 0 first, so the result depends only on the rng state.
inline BlochAngles draw_family_angles(StateFamily family, int n_qubits, Rng& rng) {
  using std::numbers::pi;
  require_qubits(n_qubits, kMaxQubits, "make_named_state");
  BlochAngles a;
  a.theta.resize(n_qubits);
  a.phi.resize(n_qubits);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto coin = [&rng] { return (rng() >> 63) != 0; };
  for (int k = 0; k < n_qubits; ++k) {
    switch (family) {
      case StateFamily::kZRandom:
        a.theta[k] = coin() ? pi : 0.0;
        a.phi[k] = 0.0;
        break;
      case StateFamily::kXRandom:
        a.theta[k] = pi / 2;
        a.phi[k] = coin() ? pi : 0.0;
        break;
      case StateFamily::kYRandom:
        a.theta[k] = pi / 2;
        a.phi[k] = coin() ? 3 * pi / 2 : pi / 2;
        break;
      case StateFamily::kXPlus:
        a.theta[k] = pi / 2;
        a.phi[k] = 0.0;
        break;
      case StateFamily::kTProduct:
        a.theta[k] = pi / 2;
        a.phi[k] = pi / 4;
        break;
      case StateFamily::kBlochRandom: {
        // Haar-uniform on the sphere: cos(theta) uniform in [-1, 1].
        const double cos_theta = std::clamp(2.0 * unit(rng) - 1.0, -1.0, 1.0);
        a.theta[k] = std::acos(cos_theta);
        a.phi[k] = 2.0 * pi * unit(rng);
        break;
      }
      case StateFamily::kHamming:
        throw std::invalid_argument("make_named_state: hamming states need make_hamming_state");
    }
  }
  return a;
}

inline StateVector make_named_state(StateFamily family, int n_qubits, Rng& rng) {
  return make_product_state(draw_family_angles(family, n_qubits, rng));
}

inline int hamming_distance(std::size_t a, std::size_t b) { return popcount(a ^ b); }

/// Amplitudes e^{-alpha d(i, center)}, divided by sqrt(sum e^{-2 alpha d}) when
/// `normalize` is set. All amplitudes are real and positive.
inline StateVector make_hamming_state(int n_qubits, double alpha, std::size_t center,
                                      bool normalize = true) {
  require_qubits(n_qubits, kMaxQubits, "make_hamming_state");
  if (!(alpha >= 0.0)) throw std::invalid_argument("make_hamming_state: alpha must be >= 0");
  if (center >= dim_of(n_qubits)) throw std::out_of_range("make_hamming_state: center out of range");
  // Weights only depend on the distance; tabulate L+1 values.
  std::vector<double> w(n_qubits + 1);
  for (int d = 0; d <= n_qubits; ++d) w[d] = std::exp(-alpha * d);
  std::vector<cplx> amps(dim_of(n_qubits));
  for (std::size_t i = 0; i < amps.size(); ++i) amps[i] = w[hamming_distance(i, center)];
  StateVector s(n_qubits, std::move(amps));
  if (normalize) s.normalize();
  return s;
}

/// Haar-random pure state (normalized complex Gaussian vector).
inline StateVector make_haar_state(int n_qubits, Rng& rng) {
  require_qubits(n_qubits, kMaxQubits, "make_haar_state");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<cplx> amps(dim_of(n_qubits));
  for (auto& a : amps) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    a = cplx{re, im};
  }
  StateVector s(n_qubits, std::move(amps));
  s.normalize();
  return s;
}

/// Reduced 2x2 density matrix of one site, rho[a][b] = <a|rho|b>.
struct SiteDensity {
  cplx r00, r01, r10, r11;

  static SiteDensity from_bloch(double theta, double phi) {
    const cplx up = std::cos(theta / 2.0);
    const cplx down = std::polar(std::sin(theta / 2.0), phi);
    return {up * std::conj(up), up * std::conj(down), down * std::conj(up), down * std::conj(down)};
  }

  double expect_x() const { return (r01 + r10).real(); }
  double expect_y() const { return (cplx{0.0, 1.0} * (r01 - r10)).real(); }
  double expect_z() const { return (r00 - r11).real(); }

  /// Hermitian, unit trace, positive semidefinite, all within `tol`.
  void validate(double tol = 1e-10) const {
    const bool hermitian = std::abs(r00.imag()) <= tol && std::abs(r11.imag()) <= tol &&
                           std::abs(r01 - std::conj(r10)) <= tol;
    const bool unit_trace = std::abs(r00.real() + r11.real() - 1.0) <= tol;
    const double det = r00.real() * r11.real() - std::norm(r01);
    const bool psd = r00.real() >= -tol && r11.real() >= -tol && det >= -tol;
    if (!(hermitian && unit_trace && psd)) {
      throw std::invalid_argument("SiteDensity: not a valid density matrix");
    }
  }
};

/// Single-site reduced density matrices of a pure state, O(L 2^L).
inline std::vector<SiteDensity> site_densities(const StateVector& s) {
  std::vector<SiteDensity> out(s.n_qubits(), SiteDensity{0.0, 0.0, 0.0, 0.0});
  const auto a = s.amplitudes();
  for (int k = 0; k < s.n_qubits(); ++k) {
    const std::size_t bit = std::size_t{1} << k;
    SiteDensity& d = out[k];
    for (std::size_t n = 0; n < a.size(); ++n) {
      if (n & bit) continue;
      const cplx up = a[n];
      const cplx down = a[n | bit];
      d.r00 += up * std::conj(up);
      d.r01 += up * std::conj(down);
      d.r10 += down * std::conj(up);
      d.r11 += down * std::conj(down);
    }
  }
  return out;
}

}  // namespace locmagic
