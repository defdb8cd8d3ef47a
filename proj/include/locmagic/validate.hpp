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
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "locmagic/entangle.hpp"
#include "locmagic/harness.hpp"
#include "locmagic/magic.hpp"
#include "locmagic/models.hpp"
#include "locmagic/pauli.hpp"
#include "locmagic/propagate.hpp"
#include "locmagic/qstate.hpp"
#include "locmagic/theory.hpp"

namespace locmagic {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast self-checks of core invariants (seconds at the sizes used here).
inline std::vector<CheckResult> run_validation_suite(std::uint64_t seed = 1) {
  std::vector<CheckResult> out;
  auto check = [&out](std::string name, const std::function<std::string()>& body, auto&& pass) {
    try {
      std::string detail = body();
      out.push_back({std::move(name), pass(), std::move(detail)});
    } catch (const std::exception& e) {
      out.push_back({std::move(name), false, std::string("exception: ") + e.what()});
    }
  };
  constexpr double pi = std::numbers::pi;

  {
    double worst = 0.0;
    check("stabilizer product states have zero SRE", [&] {
      Rng rng(seed);
      for (auto fam : {StateFamily::kZRandom, StateFamily::kXRandom, StateFamily::kYRandom}) {
        for (int rep = 0; rep < 5; ++rep) worst = std::max(worst, std::abs(sre(make_named_state(fam, 6, rng), 2)));
      }
      return fmt::format("max |M2| = {}", worst);
    }, [&] { return worst <= 1e-9; });
  }
  {
    double dev = 0.0;
    check("T-state SRE is additive", [&] {
      for (int l = 1; l <= 6; ++l) {
        const double m = sre(make_product_state(BlochAngles::uniform(l, pi / 2, pi / 4)), 2);
        dev = std::max(dev, std::abs(m - l * std::log2(4.0 / 3.0)));
      }
      return fmt::format("max deviation = {}", dev);
    }, [&] { return dev <= 1e-8; });
  }
  {
    double rel = 0.0;
    check("Pauli purity sum equals 2^L", [&] {
      Rng rng(seed + 1);
      const StateVector s = make_haar_state(7, rng);
      rel = std::abs(pauli_power_sum(s, 1) / 128.0 - 1.0);
      return fmt::format("relative error = {}", rel);
    }, [&] { return rel <= 1e-9; });
  }
  {
    double diff = 0.0;
    check("spectrum routes agree", [&] {
      Rng rng(seed + 2);
      const StateVector s = make_haar_state(5, rng);
      const PauliSpectrum spec = pauli_spectrum_exact(s);
      double sum4 = 0.0;
      for (double v : spec.values) sum4 += v * v * v * v;
      diff = std::abs(sum4 - pauli_power_sum(s, 2));
      return fmt::format("|difference| = {}", diff);
    }, [&] { return diff <= 1e-10; });
  }
  {
    double drift = 0.0;
    check("Chebyshev evolution conserves norm and energy", [&] {
      const auto model = sample_tfim({6, 3.0}, seed);
      Rng rng(seed + 3);
      const StateVector s0 = make_named_state(StateFamily::kZRandom, 6, rng);
      const auto op = TfimOperator(model);
      auto apply = [&op](std::span<const cplx> in, std::span<cplx> o) { op.apply(in, o); };
      const StateVector s1 = chebyshev_step(apply, energy_bounds(model), s0, 37.0);
      const double e0 = energy_expectation(model, s0), e1 = energy_expectation(model, s1);
      drift = std::max(std::abs(s1.norm() - 1.0), std::abs(e1 - e0) / std::max(1.0, std::abs(e0)));
      return fmt::format("max drift = {}", drift);
    }, [&] { return drift <= 1e-8; });
  }
  {
    double diff = 0.0;
    check("Anderson quadrature at t=0 matches the product-state SRE", [&] {
      const BlochAngles a{{0.3, 1.1, 2.0, pi / 2}, {0.0, 0.7, 4.0, pi / 4}};
      diff = std::abs(anderson_sre(a, 1.0, 0.0) - sre(make_product_state(a), 2));
      return fmt::format("|difference| = {}", diff);
    }, [&] { return diff <= 1e-8; });
  }
  {
    double s = 0.0;
    check("product states are unentangled", [&] {
      Rng rng(seed + 4);
      s = half_chain_entropy(make_named_state(StateFamily::kBlochRandom, 8, rng));
      return fmt::format("S = {}", s);
    }, [&] { return std::abs(s) <= 1e-10; });
  }
  {
    double z = 0.0;
    check("sampled SRE agrees with exact", [&] {
      Rng rng(seed + 5);
      const StateVector st = make_haar_state(6, rng);
      const auto est = sre2_sampled(st, 4000, rng);
      z = std::abs(est.estimate - sre(st, 2)) / std::max(est.std_error, 1e-12);
      return fmt::format("|z| = {}", z);
    }, [&] { return z <= 5.0; });
  }
  {
    bool same = false;
    check("ensemble runs are deterministic", [&] {
      RunConfig c;
      c.L = 6;
      c.n_realizations = 3;
      c.t_max = 10.0;
      c.per_decade = 2;
      c.seed = seed;
      c.workers = 1;
      const auto a = record_to_string(run_ensemble(c));
      c.workers = 3;
      const auto b = record_to_string(run_ensemble(c));
      same = a == b;
      return std::string(same ? "identical" : "differ");
    }, [&] { return same; });
  }
  return out;
}

}  // namespace locmagic
