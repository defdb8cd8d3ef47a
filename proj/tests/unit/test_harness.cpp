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
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "locmagic/harness.hpp"

namespace locmagic {
namespace {

RunConfig small_config() {
  RunConfig c;
  c.model = ModelKind::kTfim;
  c.L = 6;
  c.W = 3.0;
  c.state = StateFamily::kZRandom;
  c.n_realizations = 5;
  c.t_min = 0.1;
  c.t_max = 50.0;
  c.per_decade = 3;
  c.seed = 1234;
  c.workers = 1;
  return c;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("locmagic_test_" + name);
}

TEST(Seeds, StreamsAndIndicesAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < 100; ++r)
    for (auto s : {Stream::kDisorder, Stream::kInitialState, Stream::kPauliSampling, Stream::kLanczos})
      seen.insert(derive_seed(7, r, s));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(7, 3, Stream::kDisorder), derive_seed(7, 3, Stream::kDisorder));
  EXPECT_NE(derive_seed(7, 3, Stream::kDisorder), derive_seed(8, 3, Stream::kDisorder));
}

TEST(RunConfig, JsonRoundTripAndValidation) {
  RunConfig c = small_config();
  c.model = ModelKind::kLBit;
  c.xi = 0.5;
  c.max_order = 2;
  c.state = StateFamily::kHamming;
  c.alpha = 0.3;
  c.sre = SreMethod::sampled(500);
  const RunConfig back = run_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  RunConfig bad = small_config();
  bad.L = 14;
  EXPECT_THROW(bad.validate(), std::out_of_range);
  bad = small_config();
  bad.n_realizations = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = small_config();
  bad.sre = SreMethod::product();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(RunConfig, HashIgnoresSeedAndCountOnly) {
  RunConfig a = small_config(), b = small_config();
  b.seed = 99;
  b.n_realizations = 17;
  b.workers = 3;
  b.out = "elsewhere.csv";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.W = 3.5;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Ensemble, SingleRealizationEqualsTrajectory) {
  RunConfig c = small_config();
  c.n_realizations = 1;
  const auto rec = run_ensemble(c);
  const auto ts = run_realization(c, 0, c.grid());
  EXPECT_EQ(rec.m2.mean, ts.m2);
  EXPECT_EQ(rec.entropy.mean, ts.entropy);
  EXPECT_EQ(rec.wz.mean, ts.wz);
  for (double s : rec.m2.sem) EXPECT_EQ(s, 0.0);
  EXPECT_TRUE(rec.sem_undefined());
  EXPECT_FALSE(rec.incomplete());
}

TEST(Ensemble, MeanOfPerRealizationValues) {
  const RunConfig c = small_config();
  const auto rec = run_ensemble(c);
  const auto grid = c.grid();
  std::vector<TimeSeries> runs;
  for (int r = 0; r < c.n_realizations; ++r) runs.push_back(run_realization(c, r, grid));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double s = 0.0;
    for (const auto& ts : runs) s += ts.m2[i];
    const double mean = s / c.n_realizations;
    double ss = 0.0;
    for (const auto& ts : runs) ss += (ts.m2[i] - mean) * (ts.m2[i] - mean);
    EXPECT_NEAR(rec.m2.mean[i], mean, 1e-14);
    EXPECT_NEAR(rec.m2.sem[i], std::sqrt(ss / (c.n_realizations - 1) / c.n_realizations), 1e-14);
    EXPECT_GE(rec.m2.sem[i], 0.0);
  }
  EXPECT_EQ(rec.n_completed, c.n_realizations);
}

TEST(Ensemble, DeterministicAcrossWorkerCounts) {
  RunConfig c = small_config();
  const std::string one = record_to_string(run_ensemble(c));
  c.workers = 4;
  EXPECT_EQ(record_to_string(run_ensemble(c)), one);
  c.workers = 2;
  EXPECT_EQ(record_to_string(run_ensemble(c)), one);
}

TEST(Ensemble, FailuresAreSkippedAndFlagged) {
  const RunConfig c = small_config();
  auto flaky = [](const RunConfig& cfg, int r, const TimeGrid& g) {
    if (r == 2) throw NumericalError("synthetic failure");
    return run_realization(cfg, r, g);
  };
  const auto rec = run_ensemble(c, flaky);
  EXPECT_EQ(rec.n_completed, 4);
  EXPECT_TRUE(rec.incomplete());
  ASSERT_EQ(rec.failures.size(), 1u);
  EXPECT_EQ(rec.failures[0].index, 2);
  EXPECT_EQ(rec.failures[0].seed, derive_seed(c.seed, 2, Stream::kDisorder));
  EXPECT_EQ(rec.failures[0].message, "synthetic failure");
  const auto back = record_from_string(record_to_string(rec));
  EXPECT_EQ(back, rec);
}

TEST(Ensemble, SemShrinksLikeInverseRootN) {
  std::mt19937_64 rng(90);
  std::normal_distribution<double> d(3.0, 1.5);
  std::vector<double> v(40000);
  for (auto& x : v) x = d(rng);
  double m1, s1, m2, s2;
  detail::mean_sem(std::vector<double>(v.begin(), v.begin() + 20000), &m1, &s1);
  detail::mean_sem(v, &m2, &s2);
  EXPECT_NEAR(s1 / s2, std::sqrt(2.0), 0.15 * std::sqrt(2.0));
}

TEST(Record, SaveLoadRoundTrip) {
  RunConfig c = small_config();
  c.model = ModelKind::kLBit;
  c.state = StateFamily::kXPlus;
  c.observables.wz = false;
  const auto rec = run_ensemble(c);
  const auto path = temp_path("roundtrip.csv");
  save_record(rec, path.string());
  const auto back = load_record(path.string());
  EXPECT_EQ(back, rec);
  EXPECT_EQ(record_to_string(back), record_to_string(rec));
  std::filesystem::remove(path);
}

TEST(Record, ColumnsAreFixed) {
  const std::string text = record_to_string(run_ensemble(small_config()));
  const auto second = text.substr(text.find('\n') + 1, text.find('\n', text.find('\n') + 1) - text.find('\n') - 1);
  EXPECT_EQ(second, "model,L,W,xi,state,sre_method,n_real,t,M2_mean,M2_sem,S_mean,S_sem,WZ_mean,WZ_sem");
}

TEST(Record, TruncationIsAnError) {
  const std::string text = record_to_string(run_ensemble(small_config()));
  EXPECT_THROW(record_from_string(text.substr(0, text.size() - 12)), RecordParseError);
  EXPECT_THROW(record_from_string(text.substr(0, text.size() / 2)), RecordParseError);
  EXPECT_THROW(record_from_string(""), RecordParseError);
}

TEST(Record, SchemaVersionMismatchRejected) {
  std::string text = record_to_string(run_ensemble(small_config()));
  const auto pos = text.find("\"schema_version\":1");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 18, "\"schema_version\":7");
  try {
    record_from_string(text);
    FAIL() << "expected a parse error";
  } catch (const RecordParseError& e) {
    EXPECT_NE(std::string(e.what()).find("schema version 7"), std::string::npos);
  }
}

TEST(Record, MergeRequiresMatchingHashAndDistinctSeeds) {
  RunConfig a = small_config(), b = small_config();
  a.n_realizations = 3;
  b.n_realizations = 2;
  b.seed = 777;
  const auto ra = run_ensemble(a), rb = run_ensemble(b);
  const auto m = merge_records(ra, rb);
  EXPECT_EQ(m.n_completed, 5);
  EXPECT_EQ(m.base_seeds, (std::vector<std::uint64_t>{a.seed, b.seed}));
  const auto grid = a.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> vals;
    for (int r = 0; r < 3; ++r) vals.push_back(run_realization(a, r, grid).m2[i]);
    for (int r = 0; r < 2; ++r) vals.push_back(run_realization(b, r, grid).m2[i]);
    double mean, sem;
    detail::mean_sem(vals, &mean, &sem);
    EXPECT_NEAR(m.m2.mean[i], mean, 1e-12);
    EXPECT_NEAR(m.m2.sem[i], sem, 1e-12);
  }
  EXPECT_EQ(record_from_string(record_to_string(m)), m);
  EXPECT_THROW(merge_records(ra, ra), std::invalid_argument);
  RunConfig other = small_config();
  other.W = 4.0;
  other.seed = 5;
  EXPECT_THROW(merge_records(ra, run_ensemble(other)), std::invalid_argument);
}

TEST(Record, CrossoverFromRecords) {
  std::vector<EnsembleRecord> recs;
  for (int L : {4, 6}) {
    RunConfig c = small_config();
    c.L = L;
    c.n_realizations = 2;
    c.t_min = 1.0;
    c.t_max = 100.0;
    c.per_decade = 1;
    recs.push_back(run_ensemble(c));
  }
  const auto tab = crossover_scan(recs, 100.0);
  ASSERT_EQ(tab.rows.size(), 2u);
  EXPECT_NEAR(tab.rows[1].delta, haar_sre2(6) - recs[1].m2.mean.back(), 1e-14);
  EXPECT_THROW(crossover_scan(recs, 50.0), std::invalid_argument);
}

}  // namespace
}  // namespace locmagic
