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

#include <bit>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace locmagic {

using cplx = std::complex<double>;

/// Hard ceiling on qubit counts anywhere in the library (bitmasks are 64-bit,
/// state vectors are dense).
inline constexpr int kMaxQubits = 30;

/// Engine used for every random draw. Seeds always come from derive_seed().
using Rng = std::mt19937_64;

/// Raised when a numerical routine fails at run time (as opposed to a bad
/// argument, which is std::invalid_argument / std::out_of_range).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline int popcount(std::uint64_t v) { return std::popcount(v); }
inline int parity(std::uint64_t v) { return std::popcount(v) & 1; }

inline std::size_t dim_of(int n_qubits) { return std::size_t{1} << n_qubits; }

inline void require_qubits(int n_qubits, int max_qubits, const char* what) {
  if (n_qubits < 1 || n_qubits > max_qubits) {
    throw std::out_of_range(std::string(what) + ": qubit count " + std::to_string(n_qubits) +
                            " outside [1, " + std::to_string(max_qubits) + "]");
  }
}

}  // namespace locmagic
