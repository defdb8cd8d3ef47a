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
#include <utility>

#include "locmagic/models.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {

inline constexpr int kDefaultMidSpectrumCandidates = 100;

struct MidSpectrumChoice {
  StateVector state;
  double energy = 0.0;
  double target = 0.0;
  int candidate = 0;
};

/// Draws `n_candidates` random product states of the given basis and keeps the
/// one whose <H> is closest to the centre of the spectrum. Ties (within 1e-9
/// relative) go to the lowest candidate index.
inline MidSpectrumChoice select_mid_spectrum_state(const DisorderRealization& model, Basis basis,
                                                   int n_candidates, Rng& rng) {
  if (n_candidates < 1) throw std::invalid_argument("select_mid_spectrum_state: n_candidates must be >= 1");
  const int n = model.n_qubits();
  const StateFamily family = family_of(basis);
  if (n_candidates == 1) {
    StateVector s = make_named_state(family, n, rng);
    const double e = energy_expectation(model, s);
    return {std::move(s), e, e, 0};
  }
  const EnergyBounds bounds = energy_bounds(model);
  const double target = bounds.center();
  const double scale = std::max(1.0, bounds.half_width());
  MidSpectrumChoice best{StateVector(n), 0.0, target, -1};
  double best_gap = 0.0;
  for (int c = 0; c < n_candidates; ++c) {
    StateVector s = make_named_state(family, n, rng);
    const double e = energy_expectation(model, s);
    const double gap = std::abs(e - target);
    if (best.candidate < 0 || gap < best_gap - 1e-9 * scale) {
      best = {std::move(s), e, target, c};
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace locmagic
