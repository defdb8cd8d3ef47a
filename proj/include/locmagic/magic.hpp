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
#include <bit>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "locmagic/common.hpp"
#include "locmagic/fwht.hpp"
#include "locmagic/pauli.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {

/// Exact spectra and SRE evaluation are capped here (4^13 complex entries ~ 1 GB).
inline constexpr int kMaxExactQubits = 13;
/// Monte-Carlo Pauli sampling only needs O(2^L) memory.
inline constexpr int kMaxSampledQubits = 24;
/// W_Z needs one transform of the probability vector.
inline constexpr int kMaxWzQubits = 26;

/// All 4^L Pauli expectations of a pure state.
///
/// Index layout: base-4 digits, digit k belongs to site k (site 0 least
/// significant), with digit values I=0, X=1, Y=2, Z=3.
struct PauliSpectrum {
  int n_qubits = 0;
  std::vector<double> values;

  double operator[](const PauliString& p) const { return values[index_of(p)]; }

  std::size_t index_of(const PauliString& p) const {
    std::size_t idx = 0;
    for (int k = n_qubits - 1; k >= 0; --k) {
      const unsigned xb = (p.x >> k) & 1U;
      const unsigned zb = (p.z >> k) & 1U;
      const unsigned digit = xb ? (zb ? 2U : 1U) : (zb ? 3U : 0U);
      idx = idx * 4 + digit;
    }
    return idx;
  }
};

namespace detail {

/// Spreads the low 32 bits of v to the even bit positions.
inline std::uint64_t spread_bits(std::uint64_t v) {
  v &= 0xffffffffULL;
  v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
  v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
  v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  v = (v | (v << 2)) & 0x3333333333333333ULL;
  v = (v | (v << 1)) & 0x5555555555555555ULL;
  return v;
}

}  // namespace detail

/// Exhaustive Pauli spectrum by L per-site linear maps on the density matrix.
///
/// rho is stored with per-site digit 2*row_bit + col_bit, i.e. blocks
/// (rho00, rho01, rho10, rho11); each site pass replaces a block with
/// (tr I, tr X, tr Y, tr Z) = (r00 + r11, r01 + r10, i(r01 - r10), r00 - r11).
/// O(L 4^L) time, 4^L complex memory.
inline PauliSpectrum pauli_spectrum_exact(const StateVector& psi) {
  const int n = psi.n_qubits();
  require_qubits(n, kMaxExactQubits, "pauli_spectrum_exact");
  const std::size_t dim = psi.dim();
  const std::size_t total = dim * dim;
  std::vector<cplx> rho(total);
  for (std::size_t r = 0; r < dim; ++r) {
    const std::uint64_t rs = detail::spread_bits(r) << 1;
    const cplx a = psi[r];
    for (std::size_t c = 0; c < dim; ++c) {
      rho[rs | detail::spread_bits(c)] = a * std::conj(psi[c]);
    }
  }
  const cplx i_unit{0.0, 1.0};
  for (int k = 0; k < n; ++k) {
    const std::size_t stride = std::size_t{1} << (2 * k);
    for (std::size_t base = 0; base < total; base += 4 * stride) {
      for (std::size_t j = base; j < base + stride; ++j) {
        const cplx r00 = rho[j];
        const cplx r01 = rho[j + stride];
        const cplx r10 = rho[j + 2 * stride];
        const cplx r11 = rho[j + 3 * stride];
        rho[j] = r00 + r11;
        rho[j + stride] = r01 + r10;
        rho[j + 2 * stride] = i_unit * (r01 - r10);
        rho[j + 3 * stride] = r00 - r11;
      }
    }
  }
  PauliSpectrum out{n, std::vector<double>(total)};
  for (std::size_t i = 0; i < total; ++i) out.values[i] = rho[i].real();
  return out;
}

namespace detail {

/// Streams the Pauli spectrum one x-mask at a time in O(2^L) memory.
///
/// For x = 0 the callback gets (0, wht(|psi|^2), {}) with length 2^L.
/// For x != 0, with p the lowest set bit of x and f(n) = conj(psi[n^x]) psi[n],
/// f(n ^ x) = conj(f(n)), so only n with bit p clear is needed. The callback
/// gets (x, R, I), each of length 2^{L-1}, R = wht(Re f) and I = wht(Im f)
/// over the compressed index. Then, for z' = z with bit p removed,
///   <P_{x,z}> = i^{|x&z|}     * 2 R[z']   if popcount(z & x) is even,
///   <P_{x,z}> = i^{|x&z| + 1} * 2 I[z']   otherwise,
/// both real. Total cost O(L 4^L).
template <typename Fn>
void for_each_x_transform(const StateVector& psi, Fn&& fn) {
  const std::size_t dim = psi.dim();
  std::vector<double> re(dim), im(dim);
  const auto amps = psi.amplitudes();
  for (std::size_t i = 0; i < dim; ++i) re[i] = std::norm(amps[i]);
  fwht(std::span<double>(re));
  fn(std::uint64_t{0}, std::span<const double>(re), std::span<const double>());

  std::vector<double> pr(dim), pi(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    pr[i] = amps[i].real();
    pi[i] = amps[i].imag();
  }
  const std::size_t half = dim / 2;
  std::span<double> rs(re.data(), half), is(im.data(), half);
  for (std::uint64_t x = 1; x < dim; ++x) {
    const int p = std::countr_zero(x);
    const std::size_t lo_count = std::size_t{1} << p;
    const std::size_t hi_count = dim >> (p + 1);
    std::size_t out = 0;
    for (std::size_t hi = 0; hi < hi_count; ++hi) {
      const std::size_t block = hi << (p + 1);
      for (std::size_t lo = 0; lo < lo_count; ++lo, ++out) {
        const std::size_t a = block | lo;
        const std::size_t b = a ^ x;
        re[out] = pr[b] * pr[a] + pi[b] * pi[a];
        im[out] = pr[b] * pi[a] - pi[b] * pr[a];
      }
    }
    fwht(rs);
    fwht(is);
    fn(x, std::span<const double>(rs), std::span<const double>(is));
  }
}

inline double int_pow(double v, int e) {
  double r = 1.0;
  while (e > 0) {
    if (e & 1) r *= v;
    v *= v;
    e >>= 1;
  }
  return r;
}

}  // namespace detail

/// <P_{x,z}> for fixed x and every z (length 2^L), via one transform.
inline std::vector<double> pauli_row(const StateVector& psi, std::uint64_t x) {
  const std::size_t dim = psi.dim();
  if (x >= dim) throw std::out_of_range("pauli_row: x mask wider than L");
  std::vector<double> row(dim);
  if (x == 0) {
    row = psi.probabilities();
    detail::fwht(std::span<double>(row));
    return row;
  }
  const int p = std::countr_zero(x);
  std::vector<double> re(dim / 2), im(dim / 2);
  for (std::size_t c = 0; c < dim / 2; ++c) {
    const std::size_t a = detail::insert_zero_bit(c, p);
    const cplx f = std::conj(psi[a ^ x]) * psi[a];
    re[c] = f.real();
    im[c] = f.imag();
  }
  detail::fwht(std::span<double>(re));
  detail::fwht(std::span<double>(im));
  for (std::size_t z = 0; z < dim; ++z) {
    const std::size_t c = detail::remove_bit(z, p);
    const int y = popcount(x & z);
    if (parity(z & x) == 0) {
      row[z] = ((y & 3) == 0 ? 2.0 : -2.0) * re[c];
    } else {
      row[z] = (((y + 1) & 3) == 0 ? 2.0 : -2.0) * im[c];
    }
  }
  return row;
}

/// sum_P <P>^{2k} over all 4^L strings.
inline double pauli_power_sum(const StateVector& psi, int k) {
  require_qubits(psi.n_qubits(), kMaxExactQubits, "pauli_power_sum");
  if (k < 1) throw std::invalid_argument("pauli_power_sum: k must be >= 1");
  const int e = 2 * k;
  double total = 0.0;
  detail::for_each_x_transform(psi, [&](std::uint64_t x, std::span<const double> r,
                                        std::span<const double> i) {
    double acc = 0.0;
    if (x == 0) {
      for (double v : r) acc += detail::int_pow(v, e);
    } else {
      for (std::size_t c = 0; c < r.size(); ++c) {
        acc += detail::int_pow(2.0 * r[c], e) + detail::int_pow(2.0 * i[c], e);
      }
    }
    total += acc;
  });
  return total;
}

/// Shannon entropy (bits) of Xi_P = <P>^2 / D.
inline double pauli_shannon_entropy(const StateVector& psi) {
  require_qubits(psi.n_qubits(), kMaxExactQubits, "pauli_shannon_entropy");
  const double inv_d = 1.0 / static_cast<double>(psi.dim());
  auto term = [inv_d](double v) {
    const double p = v * v * inv_d;
    return p > 0.0 ? -p * std::log2(p) : 0.0;
  };
  double h = 0.0;
  detail::for_each_x_transform(psi, [&](std::uint64_t x, std::span<const double> r,
                                        std::span<const double> i) {
    double acc = 0.0;
    if (x == 0) {
      for (double v : r) acc += term(v);
    } else {
      for (std::size_t c = 0; c < r.size(); ++c) acc += term(2.0 * r[c]) + term(2.0 * i[c]);
    }
    h += acc;
  });
  return h;
}

/// Stabilizer Renyi entropy M_k in bits. k = 1 is the limit k -> 1, computed
/// as the Shannon entropy of Xi_P minus L.
inline double sre(const StateVector& psi, int k = 2) {
  if (k < 1) throw std::invalid_argument("sre: Renyi index must be 1 or an integer >= 2");
  require_qubits(psi.n_qubits(), kMaxExactQubits, "sre");
  if (k == 1) return pauli_shannon_entropy(psi) - psi.n_qubits();
  const double sum = pauli_power_sum(psi, k) / static_cast<double>(psi.dim());
  return std::log2(sum) / (1.0 - k);
}

/// sum_sigma tr(rho sigma)^4 for one site.
inline double site_fourth_moment(const SiteDensity& d) {
  const double x = d.expect_x(), y = d.expect_y(), z = d.expect_z();
  const double tr = (d.r00 + d.r11).real();
  return tr * tr * tr * tr + x * x * x * x + y * y * y * y + z * z * z * z;
}

/// M_2 of a product state from its single-site density matrices, O(L).
inline double sre2_product(std::span<const SiteDensity> sites) {
  double m = 0.0;
  for (const auto& d : sites) {
    d.validate();
    m -= std::log2(site_fourth_moment(d) / 2.0);
  }
  return m;
}

inline double sre2_product(const BlochAngles& angles) {
  angles.validate();
  std::vector<SiteDensity> sites;
  sites.reserve(angles.size());
  for (std::size_t k = 0; k < angles.size(); ++k) {
    sites.push_back(SiteDensity::from_bloch(angles.theta[k], angles.phi[k]));
  }
  return sre2_product(sites);
}

/// Average M_2 of Haar-random states: log2(2^L + 3) - 2.
inline double haar_sre2(int n_qubits) {
  if (n_qubits < 1) throw std::invalid_argument("haar_sre2: L must be >= 1");
  return std::log2(std::ldexp(1.0, n_qubits) + 3.0) - 2.0;
}

/// Weight of the {I, Z} strings: sum_{x=0} <P>^2 / D, via one transform of |psi|^2.
inline double w_z(const StateVector& psi) {
  require_qubits(psi.n_qubits(), kMaxWzQubits, "w_z");
  std::vector<double> p = psi.probabilities();
  detail::fwht(std::span<double>(p));
  double s = 0.0;
  for (double v : p) s += v * v;
  return s / static_cast<double>(psi.dim());
}

inline double delta_m2(double m2, int n_qubits) { return haar_sre2(n_qubits) - m2; }
inline double delta_m2(const StateVector& psi) { return delta_m2(sre(psi, 2), psi.n_qubits()); }

/// Exact sampler for Xi_P = <P>^2 / D.
///
/// The x-mask marginal is sum_n p(n) p(n ^ x), so x is drawn as n ^ m with n, m
/// independent draws from |psi|^2. Given x, z is drawn site by site: with
/// F_j the transform of f(n) = conj(psi[n^x]) psi[n] contracted over sites < j,
/// the conditional weight of z_j = s is sum |F_j[2i] + (-1)^s F_j[2i+1]|^2.
/// The fully contracted F is G(z), and <P> = i^{|x&z|} G(z). O(2^L) per draw.
class PauliSampler {
 public:
  struct Draw {
    PauliString pauli;
    double expectation;
  };

  explicit PauliSampler(const StateVector& psi) : psi_(psi), cdf_(psi.dim()), work_(psi.dim()) {
    require_qubits(psi.n_qubits(), kMaxSampledQubits, "sample_pauli");
    double acc = 0.0;
    for (std::size_t i = 0; i < psi.dim(); ++i) {
      acc += std::norm(psi[i]);
      cdf_[i] = acc;
    }
    if (!(acc > 0.0)) throw std::invalid_argument("sample_pauli: zero state");
  }

  Draw operator()(Rng& rng) {
    const std::uint64_t x = draw_basis(rng) ^ draw_basis(rng);
    const std::size_t dim = psi_.dim();
    for (std::size_t n = 0; n < dim; ++n) work_[n] = std::conj(psi_[n ^ x]) * psi_[n];
    std::uint64_t z = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int j = 0, len = static_cast<int>(dim); j < psi_.n_qubits(); ++j, len >>= 1) {
      double w0 = 0.0, w1 = 0.0;
      for (int i = 0; i < len; i += 2) {
        w0 += std::norm(work_[i] + work_[i + 1]);
        w1 += std::norm(work_[i] - work_[i + 1]);
      }
      const bool one = unit(rng) * (w0 + w1) >= w0;
      if (one) z |= std::uint64_t{1} << j;
      for (int i = 0; i < len / 2; ++i) {
        work_[i] = one ? work_[2 * i] - work_[2 * i + 1] : work_[2 * i] + work_[2 * i + 1];
      }
    }
    const double value = (i_pow(popcount(x & z)) * work_[0]).real();
    return Draw{PauliString{x, z}, value};
  }

 private:
  std::uint64_t draw_basis(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, cdf_.back());
    const double r = u(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), r);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint64_t>(it - cdf_.begin());
  }

  const StateVector& psi_;
  std::vector<double> cdf_;
  std::vector<cplx> work_;
};

inline PauliString sample_pauli(const StateVector& psi, Rng& rng) {
  PauliSampler sampler(psi);
  return sampler(rng).pauli;
}

/// Monte-Carlo M_2 (bits) with a delete-1 jackknife standard error.
///
/// The estimator -log2(mean <P_s>^2) is biased at O(1/N) (log of a mean).
struct SampledEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  int n_samples = 0;
  bool degenerate = false;  ///< all sampled values identical; stderr forced to 0
};

inline SampledEstimate sre2_sampled(const StateVector& psi, int n_samples, Rng& rng) {
  if (n_samples < 100) throw std::invalid_argument("sre2_sampled: need at least 100 samples");
  PauliSampler sampler(psi);
  std::vector<double> v(n_samples);
  for (auto& s : v) {
    const double e = sampler(rng).expectation;
    s = e * e;
  }
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  const double n = static_cast<double>(n_samples);
  SampledEstimate out;
  out.n_samples = n_samples;
  out.estimate = -std::log2(sum / n);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi - *lo <= 1e-14 * std::max(1.0, *hi)) {
    out.degenerate = true;
    return out;
  }
  std::vector<double> theta(n_samples);
  for (int i = 0; i < n_samples; ++i) theta[i] = -std::log2((sum - v[i]) / (n - 1.0));
  const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / n;
  double ss = 0.0;
  for (double t : theta) ss += (t - mean) * (t - mean);
  out.std_error = std::sqrt((n - 1.0) / n * ss);
  return out;
}

}  // namespace locmagic
