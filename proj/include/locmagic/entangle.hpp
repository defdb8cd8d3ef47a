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

#include <Eigen/Dense>

#include "locmagic/qstate.hpp"

namespace locmagic {

/// Von Neumann entropy (nats) of sites [0, cut) against the rest.
inline double entanglement_entropy(const StateVector& psi, int cut) {
  const int n = psi.n_qubits();
  if (cut < 1 || cut > n - 1) {
    throw std::out_of_range("entanglement_entropy: cut " + std::to_string(cut) + " outside [1, " +
                            std::to_string(n - 1) + "]");
  }
  // Site 0 is the lowest bit, so column-major (2^cut x 2^{L-cut}) puts the
  // subsystem on the rows.
  const Eigen::Index rows = Eigen::Index{1} << cut;
  const Eigen::Index cols = Eigen::Index{1} << (n - cut);
  Eigen::Map<const Eigen::MatrixXcd> m(psi.amplitudes().data(), rows, cols);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()[i] * svd.singularValues()[i];
    if (p > 0.0) s -= p * std::log(p);
  }
  return std::max(s, 0.0);
}

/// Half-chain entropy, cut at floor(L/2).
inline double half_chain_entropy(const StateVector& psi) {
  return entanglement_entropy(psi, psi.n_qubits() / 2);
}

/// Leading-order Page value (L/2) ln 2 - 1/2 for an equal bipartition.
inline double page_value(int n_qubits) {
  if (n_qubits < 2 || n_qubits % 2 != 0) throw std::invalid_argument("page_value: L must be even and >= 2");
  return 0.5 * n_qubits * std::numbers::ln2 - 0.5;
}

}  // namespace locmagic
