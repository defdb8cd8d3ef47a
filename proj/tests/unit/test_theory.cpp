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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "locmagic/magic.hpp"
#include "locmagic/theory.hpp"
#include "support/oracles.hpp"

namespace locmagic {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(AndersonSiteFactor, Examples) {
  EXPECT_DOUBLE_EQ(anderson_site_factor(0.0, 1.3, 0.7, 5.0), 2.0);
  EXPECT_NEAR(anderson_site_factor(kPi / 2, kPi / 4, 0.0, 0.0), 1.5, 1e-15);
}

TEST(AndersonSiteFactor, MatchesDensityMatrixOracle) {
  Rng rng(80);
  std::uniform_real_distribution<double> th(0.0, kPi), ph(0.0, 2 * kPi), hh(-2.0, 2.0), tt(0.0, 50.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = th(rng), b = ph(rng), h = hh(rng), t = tt(rng);
    const double f = anderson_site_factor(a, b, h, t);
    EXPECT_NEAR(f, oracle::precessing_site_moment(a, b, h, t), 1e-12);
    EXPECT_GT(f, 0.0);
    EXPECT_LE(f, 2.0 + 1e-15);
  }
}

TEST(AndersonSre, InitialPlusStateIsStabilizer) {
  EXPECT_NEAR(anderson_sre(BlochAngles::uniform(10, kPi / 2, 0.0), 1.0, 0.0), 0.0, 1e-15);
}

TEST(AndersonSre, LateTimePlateauPerSite) {
  const double per_site = anderson_sre(BlochAngles::uniform(1, kPi / 2, 0.0), 1.0, 1e6);
  EXPECT_NEAR(per_site, 0.2000627, 1e-6);
  EXPECT_NEAR(per_site, oracle::anderson_plateau_closed_form(kPi / 2), 1e-6);
  EXPECT_NEAR(anderson_sre(BlochAngles::uniform(10, kPi / 2, 0.0), 1.0, 1e6), 10 * per_site, 1e-8);
  // The simple log-of-mean estimate L log2(8/7) is a different, smaller number.
  EXPECT_GT(per_site - std::log2(8.0 / 7.0), 0.007);
}

TEST(AndersonSre, PlateauMatchesClosedFormForVariousAngles) {
  for (double th : {0.3, 1.0, kPi / 2, 2.5}) {
    for (double ph : {0.0, 0.4, kPi / 4}) {
      const BlochAngles a = BlochAngles::uniform(1, th, ph);
      EXPECT_NEAR(anderson_plateau(a, 1.0), oracle::anderson_plateau_closed_form(th), 2e-6) << th << " " << ph;
    }
  }
}

TEST(AndersonSre, InitialValueMatchesFullSre) {
  Rng rng(81);
  for (int L = 1; L <= 8; ++L) {
    const BlochAngles a = draw_family_angles(StateFamily::kBlochRandom, L, rng);
    EXPECT_NEAR(anderson_sre(a, 1.0, 0.0), sre(make_product_state(a), 2), 1e-8);
  }
}

TEST(AndersonSre, MatchesBruteForceFieldAverage) {
  const BlochAngles a{{kPi / 2, 1.1}, {0.0, 0.6}};
  for (double t : {0.1, 1.0, 3.0, 40.0}) {
    const double W = 1.3;
    const int n = 400000;
    double sum = 0.0;
    for (int k = 0; k < 2; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) {
        const double h = -W + (i + 0.5) * 2.0 * W / n;
        s += -std::log2(anderson_site_factor(a.theta[k], a.phi[k], h, t) / 2.0);
      }
      sum += s / n;
    }
    EXPECT_NEAR(anderson_sre(a, W, t), sum, 1e-8) << t;
  }
}

TEST(AndersonSre, RejectsBadArguments) {
  const auto a = BlochAngles::uniform(2, 1.0, 0.0);
  EXPECT_THROW(anderson_sre(a, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(anderson_sre(a, 1.0, -1.0), std::invalid_argument);
  EXPECT_THROW(anderson_sre(BlochAngles::uniform(2, 5.0, 0.0), 1.0, 1.0), std::invalid_argument);
}

TEST(MagicGain, PoleStateGainsNothing) { EXPECT_NEAR(magic_gain(BlochAngles::uniform(3, 0.0, 0.0), 1.0), 0.0, 1e-12); }

TEST(MagicGain, PlusIsMaximalAndTIsMinimalOnTheEquator) {
  const double plus = magic_gain(BlochAngles::uniform(1, kPi / 2, 0.0), 1.0);
  const double t = magic_gain(BlochAngles::uniform(1, kPi / 2, kPi / 4), 1.0);
  for (int i = 0; i <= 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double g = magic_gain(BlochAngles::uniform(1, kPi * i / 8, 2 * kPi * j / 8), 1.0);
      EXPECT_LE(g, plus + 1e-9);
      if (i == 4) EXPECT_GE(g, t - 1e-9);
    }
  }
  EXPECT_GT(plus, t);
}

std::vector<double> geom(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return t;
}

TEST(SaturationFit, RecoversExactParameters) {
  const auto t = geom(10.0, 2e4, 34);
  std::vector<double> v;
  for (double x : t) v.push_back(14.0 - 8.3178 * std::pow(x, -0.3466));
  const auto f = fit_power_law_saturation(t, v);
  EXPECT_NEAR(f.m_sat, 14.0, 1e-6);
  EXPECT_NEAR(f.c, 8.3178, 1e-6);
  EXPECT_NEAR(f.beta, 0.3466, 1e-6);
  EXPECT_LT(f.residual_rms, 1e-8);
  EXPECT_FALSE(f.degenerate);
  EXPECT_DOUBLE_EQ(f.t_lo, 10.0);
  EXPECT_DOUBLE_EQ(f.t_hi, 2e4);
}

TEST(SaturationFit, NoisyDataCoveredByStderr) {
  const auto t = geom(10.0, 2e4, 34);
  std::mt19937_64 rng(82);
  std::normal_distribution<double> noise(0.0, 0.05);
  int covered = 0;
  const int trials = 200;
  for (int k = 0; k < trials; ++k) {
    std::vector<double> v;
    for (double x : t) v.push_back(14.0 - 8.3178 * std::pow(x, -0.3466) + noise(rng));
    const auto f = fit_power_law_saturation(t, v);
    covered += std::abs(f.beta - 0.3466) < 3.0 * f.beta_stderr;
  }
  // Three standard errors cover ~99.7% for a well-behaved estimator.
  EXPECT_GE(covered, static_cast<int>(0.95 * trials));
}

TEST(SaturationFit, InvariantUnderReordering) {
  const auto t = geom(1.0, 1e3, 25);
  std::mt19937_64 rng(83);
  std::normal_distribution<double> noise(0.0, 0.02);
  std::vector<double> v;
  for (double x : t) v.push_back(5.0 - 3.0 * std::pow(x, -0.5) + noise(rng));
  const auto a = fit_power_law_saturation(t, v, {1.0, 1e3});
  std::vector<std::size_t> idx(t.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::vector<double> t2, v2;
  for (auto i : idx) {
    t2.push_back(t[i]);
    v2.push_back(v[i]);
  }
  const auto b = fit_power_law_saturation(t2, v2, {1.0, 1e3});
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(a.m_sat, b.m_sat);
  EXPECT_EQ(a.c, b.c);
}

TEST(SaturationFit, WindowAndDegenerateCases) {
  const auto t = geom(0.1, 100.0, 31);
  std::vector<double> flat(t.size(), 2.5);
  const auto f = fit_power_law_saturation(t, flat);
  EXPECT_TRUE(f.degenerate);
  EXPECT_TRUE(std::isnan(f.beta));
  EXPECT_DOUBLE_EQ(f.m_sat, 2.5);
  // Window [10, 100] holds 11 points; [50, 100] too few.
  EXPECT_EQ(fit_power_law_saturation(t, flat, {10.0, 100.0}).n_points, 11);
  EXPECT_THROW(fit_power_law_saturation(t, flat, {50.0, 100.0}), std::invalid_argument);
  std::vector<double> bad = flat;
  bad[30] = std::nan("");
  EXPECT_THROW(fit_power_law_saturation(t, bad), std::invalid_argument);
}

TEST(DecayFit, ExactPowerLaw) {
  const auto t = geom(0.1, 2e4, 40);
  std::vector<double> v;
  for (double x : t) v.push_back(2.0 * std::pow(x, -0.3));
  const auto f = fit_power_law_decay(t, v);
  EXPECT_NEAR(f.amplitude, 2.0, 1e-10);
  EXPECT_NEAR(f.lambda, 0.3, 1e-10);
}

TEST(DecayFit, ConstantSeriesHasZeroExponent) {
  const auto t = geom(0.1, 2e4, 40);
  std::vector<double> v(t.size(), 0.125);
  const auto f = fit_power_law_decay(t, v);
  EXPECT_LE(std::abs(f.lambda), std::max(f.lambda_stderr, 1e-14));
}

TEST(DecayFit, RejectsBadInput) {
  const auto t = geom(0.1, 10.0, 10);
  std::vector<double> v(t.size(), 1.0);
  v[3] = 0.0;
  EXPECT_THROW(fit_power_law_decay(t, v), std::invalid_argument);
  EXPECT_THROW(fit_power_law_decay(std::vector<double>(t.begin(), t.begin() + 5), std::vector<double>(5, 1.0)),
               std::invalid_argument);
}

SmCurve sample_curve(double scale) {
  SmCurve c;
  for (int i = 0; i <= 40; ++i) {
    const double s = 0.05 * i;
    c.s.push_back(s);
    c.m.push_back(scale * (3.0 * s - 0.4 * s * s));
  }
  return c;
}

TEST(Collapse, IdenticalCurves) {
  const auto r = collapse_factor(sample_curve(1.0), sample_curve(1.0));
  EXPECT_DOUBLE_EQ(r.f, 1.0);
  EXPECT_DOUBLE_EQ(r.deviation, 0.0);
  EXPECT_EQ(r.s_grid.size(), 64u);
}

TEST(Collapse, DoubledTarget) {
  const auto r = collapse_factor(sample_curve(1.0), sample_curve(2.0));
  EXPECT_DOUBLE_EQ(r.f, 2.0);
  EXPECT_NEAR(r.deviation, 0.0, 1e-14);
}

TEST(Collapse, ScaleEquivariance) {
  SmCurve ref = sample_curve(1.0);
  SmCurve tgt;
  std::mt19937_64 rng(84);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int i = 0; i < 30; ++i) {
    tgt.s.push_back(0.1 + 0.06 * i);
    tgt.m.push_back(2.0 * tgt.s.back() + u(rng));
  }
  const double f1 = collapse_factor(ref, tgt).f;
  for (double s : {0.5, 3.7, 1e3}) {
    SmCurve scaled = tgt;
    for (auto& m : scaled.m) m *= s;
    EXPECT_NEAR(collapse_factor(ref, scaled).f / (s * f1), 1.0, 1e-12);
  }
}

TEST(Collapse, CleansUnsortedAndRepeatedPoints) {
  SmCurve messy = sample_curve(1.0);
  std::reverse(messy.s.begin(), messy.s.end());
  std::reverse(messy.m.begin(), messy.m.end());
  messy.s.push_back(messy.s[3]);
  messy.m.push_back(99.0);
  const auto r = collapse_factor(sample_curve(1.0), messy);
  EXPECT_NEAR(r.f, 1.0, 1e-12);
}

TEST(Collapse, EmptyOverlapRejected) {
  SmCurve a{{0.0, 1.0}, {0.0, 1.0}}, b{{2.0, 3.0}, {1.0, 2.0}};
  EXPECT_THROW(collapse_factor(a, b), std::invalid_argument);
}

TEST(Crossover, ErgodicInputHasZeroDeviation) {
  std::vector<CrossoverCell> cells;
  for (int L : {8, 10, 12})
    for (double W : {1.0, 5.0}) cells.push_back({L, W, haar_sre2(L)});
  const auto tab = crossover_scan(cells);
  ASSERT_EQ(tab.rows.size(), 6u);
  for (const auto& r : tab.rows) EXPECT_NEAR(r.delta, 0.0, 1e-14);
  for (const auto& s : tab.slopes) EXPECT_NEAR(s.slope, 0.0, 1e-13);
  EXPECT_TRUE(tab.missing.empty());
}

TEST(Crossover, SlopesMissingCellsAndFlags) {
  std::vector<CrossoverCell> cells{{8, 5.0, haar_sre2(8) - 1.0}, {10, 5.0, haar_sre2(10) - 1.5},
                                   {12, 5.0, haar_sre2(12) - 2.0}, {8, 1.0, haar_sre2(8) - 0.3},
                                   {12, 1.0, haar_sre2(12) + 0.01}};
  const auto tab = crossover_scan(cells);
  ASSERT_EQ(tab.missing.size(), 1u);
  EXPECT_EQ(tab.missing[0].first, 10);
  EXPECT_EQ(tab.missing[0].second, 1.0);
  for (const auto& s : tab.slopes) {
    if (s.W == 5.0) EXPECT_NEAR(s.slope, 0.25, 1e-12);
    if (s.W == 1.0) EXPECT_LT(s.slope, 0.0);
  }
  const auto it = std::find_if(tab.rows.begin(), tab.rows.end(), [](const auto& r) { return r.L == 12 && r.W == 1.0; });
  ASSERT_NE(it, tab.rows.end());
  EXPECT_TRUE(it->above_haar);
  EXPECT_NEAR(it->delta, -0.01, 1e-12);
  EXPECT_THROW(crossover_scan({{8, 1.0, 1.0}, {8, 1.0, 2.0}}), std::invalid_argument);
}

TEST(AsymptoteFit, ExactExponential) {
  std::vector<double> L{6, 7, 8, 9, 10, 11, 12}, d, d2;
  for (double l : L) {
    d.push_back(0.7 * std::exp(-l * std::log(2.0)));
    d2.push_back(2.0 * d.back());
  }
  const auto a = delta_m2_asymptote_fit(L, d);
  EXPECT_NEAR(a.lambda, std::log(2.0), 1e-10);
  EXPECT_NEAR(a.prefactor, 0.7, 1e-10);
  const auto b = delta_m2_asymptote_fit(L, d2);
  EXPECT_NEAR(b.lambda, a.lambda, 1e-10);
  EXPECT_NEAR(b.prefactor, 2.0 * a.prefactor, 1e-10);
}

TEST(AsymptoteFit, RejectsBadInput) {
  EXPECT_THROW(delta_m2_asymptote_fit(std::vector<double>{6, 8}, std::vector<double>{0.1, 0.05}), std::invalid_argument);
  EXPECT_THROW(delta_m2_asymptote_fit(std::vector<double>{6, 8, 10}, std::vector<double>{0.1, 0.0, 0.01}),
               std::invalid_argument);
}

}  // namespace
}  // namespace locmagic
