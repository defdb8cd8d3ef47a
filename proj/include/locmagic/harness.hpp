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

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "locmagic/magic.hpp"
#include "locmagic/mid_spectrum.hpp"
#include "locmagic/models.hpp"
#include "locmagic/propagate.hpp"
#include "locmagic/qstate.hpp"
#include "locmagic/rng.hpp"
#include "locmagic/theory.hpp"

namespace locmagic {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kRecordSchemaVersion = 1;

/// Everything that determines an ensemble run. W is the TFIM field strength;
/// for the l-bit model the fields are uniform in [-W, W].
struct RunConfig {
  ModelKind model = ModelKind::kTfim;
  int L = 10;
  double W = 5.0;
  double g = 1.0;
  double J_low = 0.8;
  double J_high = 1.2;
  double xi = 1.0;
  int max_order = 3;

  StateFamily state = StateFamily::kZRandom;
  double alpha = 1.0;  ///< Hamming-state decay
  bool mid_spectrum = true;
  int mid_spectrum_candidates = kDefaultMidSpectrumCandidates;

  double t_min = 0.1;
  double t_max = 2e4;
  int per_decade = 10;

  Observables observables;
  SreMethod sre = SreMethod::exact();
  int cut = 0;  ///< 0 means L/2

  int n_realizations = 1000;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 0;  ///< 0 means hardware concurrency; never affects results

  TimeGrid grid() const { return make_time_grid(t_min, t_max, per_decade); }

  /// Mid-spectrum selection applies to the basis-random families only.
  bool uses_mid_spectrum() const { return mid_spectrum && basis_of(state).has_value(); }

  void validate() const {
    if (n_realizations < 1) throw std::invalid_argument("RunConfig: realizations must be >= 1");
    require_qubits(L, kMaxTableQubits, "RunConfig");
    if (model == ModelKind::kTfim) {
      TfimParams{L, W, g, J_low, J_high}.validate();
    } else {
      if (!(W >= 0.0)) throw std::invalid_argument("RunConfig: W must be >= 0");
      LBitParams{L, xi, max_order, FieldDistribution::symmetric_uniform(W)}.validate();
    }
    if (observables.m2) {
      switch (sre.kind) {
        case SreMethodKind::kExact: require_qubits(L, kMaxExactQubits, "exact SRE"); break;
        case SreMethodKind::kSampled:
          require_qubits(L, kMaxSampledQubits, "sampled SRE");
          if (sre.samples < 100) throw std::invalid_argument("RunConfig: sampled SRE needs >= 100 samples");
          break;
        case SreMethodKind::kProduct:
          if (model != ModelKind::kLBit || max_order != 1) {
            throw std::invalid_argument("RunConfig: product SRE needs the l-bit model with max-order 1");
          }
          break;
      }
    }
    if (state == StateFamily::kHamming && !(alpha > 0.0)) {
      throw std::invalid_argument("RunConfig: hamming alpha must be > 0");
    }
    if (mid_spectrum_candidates < 1) throw std::invalid_argument("RunConfig: mid-spectrum candidates must be >= 1");
    if (cut != 0 && (cut < 1 || cut > L - 1)) throw std::invalid_argument("RunConfig: cut must be in [1, L-1]");
    (void)grid();
  }
};

inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["model"] = std::string(to_string(c.model));
  j["L"] = c.L;
  j["W"] = c.W;
  if (c.model == ModelKind::kTfim) {
    j["g"] = c.g;
    j["J_low"] = c.J_low;
    j["J_high"] = c.J_high;
  } else {
    j["xi"] = c.xi;
    j["max_order"] = c.max_order;
  }
  j["state"] = std::string(to_string(c.state));
  if (c.state == StateFamily::kHamming) j["alpha"] = c.alpha;
  j["mid_spectrum"] = c.uses_mid_spectrum();
  if (c.uses_mid_spectrum()) j["mid_spectrum_candidates"] = c.mid_spectrum_candidates;
  j["grid"] = {{"t_min", c.t_min}, {"t_max", c.t_max}, {"per_decade", c.per_decade}};
  j["observables"] = {{"M2", c.observables.m2}, {"S", c.observables.entropy}, {"WZ", c.observables.wz}};
  j["sre"] = std::string(to_string(c.sre.kind));
  if (c.sre.kind == SreMethodKind::kSampled) j["samples"] = c.sre.samples;
  j["cut"] = c.cut == 0 ? c.L / 2 : c.cut;
  j["realizations"] = c.n_realizations;
  j["seed"] = c.seed;
  return j;
}

/// Reads a (possibly partial) config; keys not present keep the values in `base`.
inline RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {}) {
  RunConfig c = std::move(base);
  auto get = [&j](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
  };
  if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
  get("L", c.L);
  get("W", c.W);
  get("g", c.g);
  get("J_low", c.J_low);
  get("J_high", c.J_high);
  get("xi", c.xi);
  get("max_order", c.max_order);
  if (j.contains("state")) c.state = parse_state_family(j.at("state").get<std::string>());
  get("alpha", c.alpha);
  get("mid_spectrum", c.mid_spectrum);
  get("mid_spectrum_candidates", c.mid_spectrum_candidates);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (g.contains("t_min")) c.t_min = g.at("t_min").get<double>();
    if (g.contains("t_max")) c.t_max = g.at("t_max").get<double>();
    if (g.contains("per_decade")) c.per_decade = g.at("per_decade").get<int>();
  }
  if (j.contains("observables")) {
    const auto& o = j.at("observables");
    if (o.contains("M2")) c.observables.m2 = o.at("M2").get<bool>();
    if (o.contains("S")) c.observables.entropy = o.at("S").get<bool>();
    if (o.contains("WZ")) c.observables.wz = o.at("WZ").get<bool>();
  }
  if (j.contains("sre")) c.sre.kind = parse_sre_method(j.at("sre").get<std::string>());
  get("samples", c.sre.samples);
  get("cut", c.cut);
  if (c.cut == c.L / 2) c.cut = 0;
  get("realizations", c.n_realizations);
  get("seed", c.seed);
  get("out", c.out);
  get("workers", c.workers);
  return c;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Hash of the physics-defining part of the config. The seed and the
/// realization count are excluded so that independent runs can be merged.
inline std::string config_hash(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  j.erase("seed");
  j.erase("realizations");
  return fmt::format("{:016x}", fnv1a64(j.dump()));
}

struct Aggregate {
  std::vector<double> mean;
  std::vector<double> sem;
};

struct RealizationFailure {
  int index = 0;
  std::uint64_t seed = 0;
  std::string message;
  friend bool operator==(const RealizationFailure&, const RealizationFailure&) = default;
};

/// Ensemble means and standard errors of the mean on the run's time grid.
struct EnsembleRecord {
  RunConfig config;
  std::string hash;
  std::vector<std::uint64_t> base_seeds;  ///< more than one after merging
  std::vector<double> times;
  Aggregate m2, entropy, wz;
  int n_requested = 0;
  int n_completed = 0;
  std::vector<RealizationFailure> failures;
  double wall_seconds = 0.0;  ///< in-memory only; not part of the saved record

  bool incomplete() const { return n_completed < n_requested; }
  /// sem is forced to 0 when fewer than two realizations completed.
  bool sem_undefined() const { return n_completed < 2; }
};

namespace detail {

inline bool same_values(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) && std::isnan(b[i])) continue;
    if (a[i] != b[i]) return false;
  }
  return true;
}

inline bool same_aggregate(const Aggregate& a, const Aggregate& b) {
  return same_values(a.mean, b.mean) && same_values(a.sem, b.sem);
}

/// Mean and sem = sqrt(unbiased variance / n) of the finite entries, summed in index order.
inline void mean_sem(const std::vector<double>& v, double* mean, double* sem) {
  double s = 0.0;
  int n = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      s += x;
      ++n;
    }
  }
  if (n == 0) {
    *mean = std::numeric_limits<double>::quiet_NaN();
    *sem = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  *mean = s / n;
  if (n < 2) {
    *sem = 0.0;
    return;
  }
  double ss = 0.0;
  for (double x : v) {
    if (std::isfinite(x)) ss += (x - *mean) * (x - *mean);
  }
  *sem = std::sqrt(ss / (n - 1) / n);
}

}  // namespace detail

inline bool operator==(const EnsembleRecord& a, const EnsembleRecord& b) {
  return to_json(a.config) == to_json(b.config) && a.hash == b.hash && a.base_seeds == b.base_seeds &&
         a.times == b.times && detail::same_aggregate(a.m2, b.m2) &&
         detail::same_aggregate(a.entropy, b.entropy) && detail::same_aggregate(a.wz, b.wz) &&
         a.n_requested == b.n_requested && a.n_completed == b.n_completed && a.failures == b.failures;
}

/// Model instance for realization r.
inline DisorderRealization realization_model(const RunConfig& c, int r) {
  const std::uint64_t s = derive_seed(c.seed, static_cast<std::uint64_t>(r), Stream::kDisorder);
  if (c.model == ModelKind::kTfim) return sample_tfim({c.L, c.W, c.g, c.J_low, c.J_high}, s);
  return sample_lbit({c.L, c.xi, c.max_order, FieldDistribution::symmetric_uniform(c.W)}, s);
}

/// Initial state for realization r, drawn from its own stream.
inline StateVector realization_initial_state(const RunConfig& c, int r, const DisorderRealization& model) {
  if (c.state == StateFamily::kHamming) return make_hamming_state(c.L, c.alpha, 0);
  Rng rng = make_rng(c.seed, static_cast<std::uint64_t>(r), Stream::kInitialState);
  if (c.uses_mid_spectrum()) {
    return select_mid_spectrum_state(model, *basis_of(c.state), c.mid_spectrum_candidates, rng).state;
  }
  return make_named_state(c.state, c.L, rng);
}

/// Full trajectory of realization r.
inline TimeSeries run_realization(const RunConfig& c, int r, const TimeGrid& grid) {
  const DisorderRealization model = realization_model(c, r);
  const StateVector psi0 = realization_initial_state(c, r, model);
  Rng sampling = make_rng(c.seed, static_cast<std::uint64_t>(r), Stream::kPauliSampling);
  EvolveOptions opt;
  opt.observables = c.observables;
  opt.sre = c.sre;
  opt.cut = c.cut;
  return evolve_and_measure(model, psi0, grid, opt, &sampling);
}

using RealizationFn = std::function<TimeSeries(const RunConfig&, int, const TimeGrid&)>;

/// Runs all realizations (in parallel when workers > 1) and reduces them in
/// index order. A failing realization is recorded with its seed and skipped.
inline EnsembleRecord run_ensemble(const RunConfig& c, const RealizationFn& realization = run_realization) {
  c.validate();
  const auto start = std::chrono::steady_clock::now();
  const TimeGrid grid = c.grid();
  const int n = c.n_realizations;
  std::vector<std::optional<TimeSeries>> results(n);
  std::vector<std::string> errors(n);

  int workers = c.workers > 0 ? c.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int r = next.fetch_add(1); r < n; r = next.fetch_add(1)) {
      try {
        results[r] = realization(c, r, grid);
      } catch (const std::exception& e) {
        errors[r] = e.what();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  EnsembleRecord rec;
  rec.config = c;
  rec.hash = config_hash(c);
  rec.base_seeds = {c.seed};
  rec.times = grid.times;
  rec.n_requested = n;
  for (int r = 0; r < n; ++r) {
    if (results[r]) {
      ++rec.n_completed;
    } else {
      rec.failures.push_back({r, derive_seed(c.seed, static_cast<std::uint64_t>(r), Stream::kDisorder), errors[r]});
    }
  }
  const std::size_t len = grid.size();
  auto reduce = [&](std::vector<double> TimeSeries::*field, Aggregate& out) {
    out.mean.assign(len, 0.0);
    out.sem.assign(len, 0.0);
    std::vector<double> column;
    for (std::size_t i = 0; i < len; ++i) {
      column.clear();
      for (int r = 0; r < n; ++r) {
        if (results[r]) column.push_back(((*results[r]).*field)[i]);
      }
      detail::mean_sem(column, &out.mean[i], &out.sem[i]);
    }
  };
  reduce(&TimeSeries::m2, rec.m2);
  reduce(&TimeSeries::entropy, rec.entropy);
  reduce(&TimeSeries::wz, rec.wz);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Persistence: one JSON header line, fixed CSV columns, and an end marker
// that makes truncation detectable.

class RecordParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kRecordMagic = "# locmagic-record ";
inline constexpr const char* kRecordColumns =
    "model,L,W,xi,state,sre_method,n_real,t,M2_mean,M2_sem,S_mean,S_sem,WZ_mean,WZ_sem";

inline std::string format_double(double v) { return fmt::format("{}", v); }

inline nlohmann::json record_header(const EnsembleRecord& rec) {
  nlohmann::json j;
  j["schema_version"] = kRecordSchemaVersion;
  j["version"] = kVersion;
  j["config"] = to_json(rec.config);
  j["config_hash"] = rec.hash;
  j["base_seeds"] = rec.base_seeds;
  j["seed_streams"] = {{"disorder", static_cast<std::uint64_t>(Stream::kDisorder)},
                       {"initial_state", static_cast<std::uint64_t>(Stream::kInitialState)},
                       {"pauli_sampling", static_cast<std::uint64_t>(Stream::kPauliSampling)}};
  j["realizations_requested"] = rec.n_requested;
  j["realizations_completed"] = rec.n_completed;
  auto& f = j["failures"] = nlohmann::json::array();
  for (const auto& e : rec.failures) f.push_back({{"index", e.index}, {"seed", e.seed}, {"message", e.message}});
  return j;
}

inline std::string record_to_string(const EnsembleRecord& rec) {
  std::string s = kRecordMagic + record_header(rec).dump() + "\n";
  s += kRecordColumns;
  s += "\n";
  const auto& c = rec.config;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const std::string prefix = fmt::format("{},{},{},{},{},{},{}", to_string(c.model), c.L, format_double(c.W),
                                         format_double(c.model == ModelKind::kLBit ? c.xi : nan),
                                         to_string(c.state), to_string(c.sre.kind), rec.n_completed);
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    s += fmt::format("{},{},{},{},{},{},{},{}\n", prefix, format_double(rec.times[i]),
                     format_double(rec.m2.mean[i]), format_double(rec.m2.sem[i]),
                     format_double(rec.entropy.mean[i]), format_double(rec.entropy.sem[i]),
                     format_double(rec.wz.mean[i]), format_double(rec.wz.sem[i]));
  }
  s += fmt::format("# end rows={}\n", rec.times.size());
  return s;
}

inline void save_record(const EnsembleRecord& rec, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << record_to_string(rec);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

namespace detail {

inline double parse_double(const std::string& s, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw RecordParseError(fmt::format("line {}: bad number '{}'", line, s));
  }
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline EnsembleRecord record_from_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line) || line.rfind(kRecordMagic, 0) != 0) {
    throw RecordParseError("not a locmagic record (missing header line)");
  }
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(line.substr(std::string(kRecordMagic).size()));
  } catch (const nlohmann::json::exception& e) {
    throw RecordParseError(std::string("malformed header: ") + e.what());
  }
  const int schema = h.value("schema_version", -1);
  if (schema != kRecordSchemaVersion) {
    throw RecordParseError(fmt::format("unsupported record schema version {} (expected {})", schema,
                                       kRecordSchemaVersion));
  }
  EnsembleRecord rec;
  try {
    rec.config = run_config_from_json(h.at("config"));
    rec.hash = h.at("config_hash").get<std::string>();
    rec.base_seeds = h.at("base_seeds").get<std::vector<std::uint64_t>>();
    rec.n_requested = h.at("realizations_requested").get<int>();
    rec.n_completed = h.at("realizations_completed").get<int>();
    for (const auto& f : h.at("failures")) {
      rec.failures.push_back({f.at("index").get<int>(), f.at("seed").get<std::uint64_t>(),
                              f.at("message").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw RecordParseError(std::string("malformed header: ") + e.what());
  }
  ++line_no;
  if (!std::getline(in, line) || line != kRecordColumns) {
    throw RecordParseError("missing or unexpected CSV column header");
  }
  bool ended = false;
  Aggregate* aggs[3] = {&rec.m2, &rec.entropy, &rec.wz};
  while (std::getline(in, line)) {
    ++line_no;
    if (line.rfind("# end rows=", 0) == 0) {
      const std::size_t rows = std::stoul(line.substr(11));
      if (rows != rec.times.size()) {
        throw RecordParseError(fmt::format("end marker says {} rows, found {}", rows, rec.times.size()));
      }
      ended = true;
      break;
    }
    const auto cells = detail::split_csv(line);
    if (cells.size() != 14) throw RecordParseError(fmt::format("line {}: expected 14 columns", line_no));
    rec.times.push_back(detail::parse_double(cells[7], line_no));
    for (int k = 0; k < 3; ++k) {
      aggs[k]->mean.push_back(detail::parse_double(cells[8 + 2 * k], line_no));
      aggs[k]->sem.push_back(detail::parse_double(cells[9 + 2 * k], line_no));
    }
  }
  if (!ended) throw RecordParseError("record is truncated (no end marker)");
  if (std::getline(in, line) && !line.empty()) throw RecordParseError("trailing data after end marker");
  if (config_hash(rec.config) != rec.hash) throw RecordParseError("config hash does not match config");
  return rec;
}

inline EnsembleRecord load_record(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return record_from_string(ss.str());
}

/// Pools two runs of the same configuration with different base seeds.
inline EnsembleRecord merge_records(const EnsembleRecord& a, const EnsembleRecord& b) {
  if (a.hash != b.hash) {
    throw std::invalid_argument("merge_records: config hashes differ (" + a.hash + " vs " + b.hash + ")");
  }
  for (auto s : a.base_seeds) {
    if (std::find(b.base_seeds.begin(), b.base_seeds.end(), s) != b.base_seeds.end()) {
      throw std::invalid_argument("merge_records: runs share base seed " + std::to_string(s));
    }
  }
  if (a.times != b.times) throw std::invalid_argument("merge_records: time grids differ");
  EnsembleRecord m = a;
  m.base_seeds.insert(m.base_seeds.end(), b.base_seeds.begin(), b.base_seeds.end());
  m.n_requested = a.n_requested + b.n_requested;
  m.n_completed = a.n_completed + b.n_completed;
  m.config.n_realizations = m.n_requested;
  m.failures.insert(m.failures.end(), b.failures.begin(), b.failures.end());
  m.wall_seconds = a.wall_seconds + b.wall_seconds;
  const double na = a.n_completed, nb = b.n_completed, n = na + nb;
  auto pool = [&](const Aggregate& x, const Aggregate& y, Aggregate& out) {
    for (std::size_t i = 0; i < a.times.size(); ++i) {
      const double ma = x.mean[i], mb = y.mean[i];
      const double ssa = x.sem[i] * x.sem[i] * na * (na - 1.0);
      const double ssb = y.sem[i] * y.sem[i] * nb * (nb - 1.0);
      const double mean = (na * ma + nb * mb) / n;
      const double ss = ssa + ssb + na * (ma - mean) * (ma - mean) + nb * (mb - mean) * (mb - mean);
      out.mean[i] = mean;
      out.sem[i] = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }
  };
  pool(a.m2, b.m2, m.m2);
  pool(a.entropy, b.entropy, m.entropy);
  pool(a.wz, b.wz, m.wz);
  return m;
}

/// Crossover table from ensemble records, reading M2 at t_eval.
inline CrossoverTable crossover_scan(const std::vector<EnsembleRecord>& records, double t_eval) {
  std::vector<CrossoverCell> cells;
  for (const auto& r : records) {
    if (r.config.state != records.front().config.state) {
      throw std::invalid_argument("crossover_scan: records mix initial-state families");
    }
    std::size_t idx = r.times.size();
    for (std::size_t i = 0; i < r.times.size(); ++i) {
      if (std::abs(r.times[i] - t_eval) <= 1e-9 * std::abs(t_eval)) idx = i;
    }
    if (idx == r.times.size()) {
      throw std::invalid_argument(fmt::format("crossover_scan: record L={} W={} has no grid point at t={}",
                                              r.config.L, r.config.W, t_eval));
    }
    cells.push_back({r.config.L, r.config.W, r.m2.mean[idx]});
  }
  return crossover_scan(cells);
}

}  // namespace locmagic
