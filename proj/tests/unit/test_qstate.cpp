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

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "locmagic/magic.hpp"
#include "locmagic/mid_spectrum.hpp"
#include "locmagic/qstate.hpp"

namespace locmagic {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ProductState, PoleStateIsBasisIndexZero) {
  const StateVector s = make_product_state(BlochAngles::uniform(3, 0.0, 0.0));
  EXPECT_DOUBLE_EQ(std::abs(s[0]), 1.0);
  for (std::size_t i = 1; i < s.dim(); ++i) EXPECT_EQ(s[i], cplx(0.0));
}

TEST(ProductState, PlusStateIsUniform) {
  const StateVector s = make_product_state(BlochAngles::uniform(4, kPi / 2, 0.0));
  for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(std::abs(s[i] - cplx(0.25)), 0.0, 1e-15);
}

TEST(ProductState, TStateAmplitudes) {
  const StateVector s = make_product_state(BlochAngles::uniform(2, kPi / 2, kPi / 4));
  const cplx w = std::polar(1.0, kPi / 4);
  EXPECT_NEAR(std::abs(s[0] - 0.5), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[1] - 0.5 * w), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[2] - 0.5 * w), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(s[3] - 0.5 * w * w), 0.0, 1e-15);
}

TEST(ProductState, SiteZeroIsLeastSignificantBit) {
  // Only site 0 flipped down.
  BlochAngles a = BlochAngles::uniform(3, 0.0, 0.0);
  a.theta[0] = kPi;
  const StateVector s = make_product_state(a);
  EXPECT_NEAR(std::abs(s[1]), 1.0, 1e-15);
}

TEST(ProductState, RejectsLengthMismatchAndBadAngles) {
  EXPECT_THROW(make_product_state(BlochAngles::uniform(3, 0.1, 0.2), 4), std::invalid_argument);
  EXPECT_THROW(make_product_state(BlochAngles::uniform(2, 4.0, 0.0)), std::invalid_argument);
  EXPECT_THROW(make_product_state(BlochAngles{{0.1, 0.2}, {0.0}}), std::invalid_argument);
}

TEST(NamedState, XPlusMatchesProductState) {
  Rng rng(1);
  EXPECT_EQ(make_named_state(StateFamily::kXPlus, 3, rng), make_product_state(BlochAngles::uniform(3, kPi / 2, 0.0)));
}

TEST(NamedState, ZRandomIsABasisStateWithZeroMagic) {
  Rng rng(42);
  const StateVector s = make_named_state(StateFamily::kZRandom, 2, rng);
  int nonzero = 0;
  for (std::size_t i = 0; i < s.dim(); ++i) nonzero += std::abs(s[i]) > 1e-12;
  EXPECT_EQ(nonzero, 1);
  EXPECT_NEAR(sre(s, 2), 0.0, 1e-12);
}

TEST(NamedState, BasisFamiliesAreSiteEigenstates) {
  Rng rng(3);
  for (auto [fam, axis] : {std::pair{StateFamily::kXRandom, 0}, std::pair{StateFamily::kYRandom, 1}}) {
    const StateVector s = make_named_state(fam, 4, rng);
    for (const auto& d : site_densities(s)) {
      const double v = axis == 0 ? d.expect_x() : d.expect_y();
      EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
    }
  }
}

TEST(NamedState, BlochRandomIsUniformOnTheSphere) {
  Rng rng(11);
  const int n = 20000;
  double sz = 0.0, sz2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = site_densities(make_named_state(StateFamily::kBlochRandom, 1, rng))[0].expect_z();
    sz += z;
    sz2 += z * z;
  }
  // Uniform cos(theta): mean 0, variance 1/3.
  EXPECT_LT(std::abs(sz / n), 3.0 * std::sqrt(1.0 / 3.0 / n));
  EXPECT_NEAR(sz2 / n, 1.0 / 3.0, 0.02);
}

TEST(NamedState, FamilyNamesRoundTrip) {
  for (auto f : {StateFamily::kZRandom, StateFamily::kXRandom, StateFamily::kYRandom, StateFamily::kXPlus,
                 StateFamily::kTProduct, StateFamily::kBlochRandom, StateFamily::kHamming}) {
    EXPECT_EQ(parse_state_family(to_string(f)), f);
  }
  EXPECT_THROW(parse_state_family("w-random"), std::invalid_argument);
}

TEST(NamedState, DependsOnlyOnSeed) {
  Rng a(99), b(99);
  Rng other(5);
  (void)make_named_state(StateFamily::kBlochRandom, 5, other);
  EXPECT_EQ(make_named_state(StateFamily::kBlochRandom, 5, a), make_named_state(StateFamily::kBlochRandom, 5, b));
}

TEST(HammingState, LargeAlphaLocalizesOnCenter) {
  const StateVector s = make_hamming_state(5, 50.0, 0b10110);
  EXPECT_GE(std::abs(s[0b10110]), 1.0 - 1e-10);
}

TEST(HammingState, ZeroAlphaIsUniform) {
  const StateVector s = make_hamming_state(3, 0.0, 5);
  for (std::size_t i = 0; i < s.dim(); ++i) EXPECT_NEAR(s[i].real(), 1.0 / std::sqrt(8.0), 1e-15);
}

TEST(HammingState, TwoSiteAmplitudes) {
  const StateVector raw = make_hamming_state(2, 1.0, 0, false);
  const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
  EXPECT_DOUBLE_EQ(raw[0].real(), 1.0);
  EXPECT_DOUBLE_EQ(raw[1].real(), e1);
  EXPECT_DOUBLE_EQ(raw[2].real(), e1);
  EXPECT_DOUBLE_EQ(raw[3].real(), e2);
  const double z = 1.0 + 2.0 * std::exp(-2.0) + std::exp(-4.0);
  const StateVector s = make_hamming_state(2, 1.0, 0);
  EXPECT_NEAR(s[3].real(), e2 / std::sqrt(z), 1e-15);
  EXPECT_NEAR(s.norm(), 1.0, 1e-14);
}

TEST(HammingState, SitePermutationSymmetry) {
  // Reversing the site order of both index and center leaves amplitudes unchanged.
  const int L = 5;
  auto reverse = [L](std::size_t v) {
    std::size_t r = 0;
    for (int k = 0; k < L; ++k) r |= ((v >> k) & 1U) << (L - 1 - k);
    return r;
  };
  const std::size_t c = 0b00111;
  const StateVector a = make_hamming_state(L, 0.7, c), b = make_hamming_state(L, 0.7, reverse(c));
  for (std::size_t i = 0; i < a.dim(); ++i) EXPECT_DOUBLE_EQ(a[i].real(), b[reverse(i)].real());
}

TEST(HammingState, RejectsBadArguments) {
  EXPECT_THROW(make_hamming_state(3, 1.0, 8), std::out_of_range);
  EXPECT_THROW(make_hamming_state(3, -1.0, 0), std::invalid_argument);
}

TEST(HaarState, IsNormalized) {
  Rng rng(8);
  for (int L = 1; L <= 8; ++L) EXPECT_NEAR(make_haar_state(L, rng).norm(), 1.0, 1e-12);
}

TEST(SiteDensity, ValidatesPhysicalMatrices) {
  EXPECT_NO_THROW(SiteDensity::from_bloch(1.0, 2.0).validate());
  SiteDensity bad{2.0, 0.0, 0.0, -1.0};
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(MidSpectrum, SingleCandidateIsReturnedUnconditionally) {
  const auto model = sample_tfim({6, 3.0}, 17);
  Rng a(4), b(4);
  const auto pick = select_mid_spectrum_state(model, Basis::kZ, 1, a);
  EXPECT_EQ(pick.state, make_named_state(StateFamily::kZRandom, 6, b));
  EXPECT_EQ(pick.candidate, 0);
}

TEST(MidSpectrum, TieGoesToLowestCandidateIndex) {
  // L=2, h=0, J=1, g=1: spectrum symmetric, so the target is 0; |00> and |01>
  // have <H> = +1 and -1 and are equally far from it.
  DisorderRealization r = sample_tfim({2, 0.0}, 0);
  r.bonds = {1.0};
  r.g = 1.0;
  Rng rng(0);
  const auto pick = select_mid_spectrum_state(r, Basis::kZ, 8, rng);
  EXPECT_NEAR(pick.target, 0.0, 1e-9);
  EXPECT_NEAR(std::abs(pick.energy), 1.0, 1e-12);
  // The first candidate already attains the minimal distance.
  EXPECT_EQ(pick.candidate, 0);
}

TEST(MidSpectrum, DeterministicAndCloserThanTypical) {
  const auto model = sample_tfim({8, 2.0}, 5);
  Rng a(12), b(12);
  const auto p1 = select_mid_spectrum_state(model, Basis::kX, 50, a);
  const auto p2 = select_mid_spectrum_state(model, Basis::kX, 50, b);
  EXPECT_EQ(p1.state, p2.state);
  EXPECT_EQ(p1.candidate, p2.candidate);
  Rng c(12);
  for (int i = 0; i < 50; ++i) {
    const double e = energy_expectation(model, make_named_state(StateFamily::kXRandom, 8, c));
    EXPECT_LE(std::abs(p1.energy - p1.target), std::abs(e - p1.target) + 1e-12);
  }
}

}  // namespace
}  // namespace locmagic
