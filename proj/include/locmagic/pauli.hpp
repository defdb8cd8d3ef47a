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
#include <cstdint>
#include <iterator>
#include <string>
#include <string_view>

#include "locmagic/common.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {

/// Hermitian Pauli string as two bitmasks. Per site: (x,z) = (0,0) I, (1,0) X,
/// (0,1) Z, (1,1) Y, where Y = i X Z.
///
/// Action on a basis state:
///   P |n> = i^{popcount(x & z)} (-1)^{popcount(z & n)} |n ^ x>
/// The i^{popcount(x & z)} factor is the Y phase that makes P Hermitian.
struct PauliString {
  std::uint64_t x = 0;
  std::uint64_t z = 0;

  int weight() const { return popcount(x | z); }
  bool is_identity() const { return (x | z) == 0; }
  friend bool operator==(const PauliString&, const PauliString&) = default;

  /// Letter string, site 0 leftmost, e.g. "XIZY".
  std::string to_string(int n_qubits) const {
    std::string s(n_qubits, 'I');
    for (int k = 0; k < n_qubits; ++k) {
      const bool xb = (x >> k) & 1U;
      const bool zb = (z >> k) & 1U;
      s[k] = xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return s;
  }

  static PauliString parse(std::string_view letters) {
    if (letters.size() > 64) throw std::invalid_argument("PauliString::parse: more than 64 sites");
    PauliString p;
    for (std::size_t k = 0; k < letters.size(); ++k) {
      const std::uint64_t bit = std::uint64_t{1} << k;
      switch (letters[k]) {
        case 'I': break;
        case 'X': p.x |= bit; break;
        case 'Z': p.z |= bit; break;
        case 'Y': p.x |= bit; p.z |= bit; break;
        default:
          throw std::invalid_argument("PauliString::parse: bad letter '" +
                                      std::string(1, letters[k]) + "'");
      }
    }
    return p;
  }
};

/// i^k for integer k.
inline cplx i_pow(int k) {
  switch (k & 3) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

inline void check_fits(const PauliString& p, int n_qubits, const char* what) {
  const std::uint64_t allowed = n_qubits >= 64 ? ~0ULL : ((std::uint64_t{1} << n_qubits) - 1);
  if (((p.x | p.z) & ~allowed) != 0) {
    throw std::out_of_range(std::string(what) + ": Pauli mask wider than L=" + std::to_string(n_qubits));
  }
}

/// P|psi>.
inline StateVector apply_pauli(const StateVector& psi, const PauliString& p) {
  check_fits(p, psi.n_qubits(), "apply_pauli");
  const cplx phase = i_pow(popcount(p.x & p.z));
  std::vector<cplx> out(psi.dim());
  for (std::size_t n = 0; n < psi.dim(); ++n) {
    const cplx v = parity(p.z & n) ? -psi[n] : psi[n];
    out[n ^ p.x] = phase * v;
  }
  return StateVector(psi.n_qubits(), std::move(out));
}

/// Raw <psi|P|psi> including its imaginary residue; O(2^L).
inline cplx pauli_inner(const StateVector& psi, const PauliString& p) {
  check_fits(p, psi.n_qubits(), "pauli_expectation");
  cplx acc{0.0, 0.0};
  for (std::size_t n = 0; n < psi.dim(); ++n) {
    const cplx t = std::conj(psi[n ^ p.x]) * psi[n];
    acc += parity(p.z & n) ? -t : t;
  }
  return i_pow(popcount(p.x & p.z)) * acc;
}

/// <psi|P|psi>. The imaginary residue is checked and dropped.
inline double pauli_expectation(const StateVector& psi, const PauliString& p) {
  const cplx v = pauli_inner(psi, p);
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, psi.norm_squared())) {
    throw NumericalError("pauli_expectation: imaginary residue " + std::to_string(v.imag()));
  }
  return v.real();
}

/// Range over the 2^L strings built from I and Z only, in increasing z-mask order.
class IzSubgroup {
 public:
  static constexpr int kMaxSites = 30;

  explicit IzSubgroup(int n_qubits) : n_qubits_(n_qubits) {
    require_qubits(n_qubits, kMaxSites, "iz_subgroup");
  }

  class iterator {
   public:
    using value_type = PauliString;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    explicit iterator(std::uint64_t z) : z_(z) {}
    PauliString operator*() const { return PauliString{0, z_}; }
    iterator& operator++() { ++z_; return *this; }
    iterator operator++(int) { auto t = *this; ++z_; return t; }
    friend bool operator==(const iterator&, const iterator&) = default;

   private:
    std::uint64_t z_ = 0;
  };

  iterator begin() const { return iterator(0); }
  iterator end() const { return iterator(std::uint64_t{1} << n_qubits_); }
  std::size_t size() const { return std::size_t{1} << n_qubits_; }

 private:
  int n_qubits_;
};

inline IzSubgroup iz_subgroup(int n_qubits) { return IzSubgroup(n_qubits); }

}  // namespace locmagic
