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
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "locmagic/harness.hpp"
#include "locmagic/magic.hpp"
#include "locmagic/theory.hpp"
#include "locmagic/validate.hpp"

namespace locmagic {

/// Bad flag values or an inconsistent configuration (exit code 1).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

inline FitWindow parse_window(const std::string& s) {
  FitWindow w;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--window expects lo:hi, got '" + s + "'");
  try {
    if (colon > 0) w.lo = std::stod(s.substr(0, colon));
    if (colon + 1 < s.size()) w.hi = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("--window expects numbers, got '" + s + "'");
  }
  if (!(w.lo < w.hi)) throw UsageError("--window needs lo < hi");
  return w;
}

template <typename F>
auto as_usage(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
}

/// Values of the flags shared by several verbs, left unset when absent.
struct CommonFlags {
  std::optional<std::string> model;
  std::optional<int> L;
  std::optional<double> W, xi, alpha, tmin, tmax;
  std::optional<int> max_order, per_decade, realizations, samples, cut, workers, candidates;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> state, sre, out, config;
  bool no_mid_spectrum = false;
};

inline void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--model", f.model, "tfim or lbit");
  app->add_option("--L", f.L, "number of spins");
  app->add_option("--W", f.W, "disorder strength (TFIM fields, l-bit fields uniform in [-W, W])");
  app->add_option("--xi", f.xi, "l-bit localization length");
  app->add_option("--max-order", f.max_order, "highest l-bit coupling order (1-3)");
  app->add_option("--state", f.state,
                  "z-random, x-random, y-random, x-plus, t-product, bloch-random or hamming");
  app->add_option("--alpha", f.alpha, "Hamming-state decay");
  app->add_option("--tmin", f.tmin, "first grid time");
  app->add_option("--tmax", f.tmax, "last grid time");
  app->add_option("--per-decade", f.per_decade, "grid points per decade");
  app->add_option("--realizations", f.realizations, "number of disorder realizations");
  app->add_option("--seed", f.seed, "base seed");
  app->add_option("--sre", f.sre, "exact, product or sampled");
  app->add_option("--samples", f.samples, "Pauli samples for the sampled SRE");
  app->add_option("--cut", f.cut, "entanglement cut (default L/2)");
  app->add_option("--out", f.out, "output path");
}

inline RunConfig apply_flags(RunConfig c, const CommonFlags& f) {
  return as_usage([&] {
    if (f.model) c.model = parse_model_kind(*f.model);
    if (f.L) c.L = *f.L;
    if (f.W) c.W = *f.W;
    if (f.xi) c.xi = *f.xi;
    if (f.max_order) c.max_order = *f.max_order;
    if (f.state) c.state = parse_state_family(*f.state);
    if (f.alpha) c.alpha = *f.alpha;
    if (f.tmin) c.t_min = *f.tmin;
    if (f.tmax) c.t_max = *f.tmax;
    if (f.per_decade) c.per_decade = *f.per_decade;
    if (f.realizations) c.n_realizations = *f.realizations;
    if (f.seed) c.seed = *f.seed;
    if (f.sre) c.sre.kind = parse_sre_method(*f.sre);
    if (f.samples) c.sre.samples = *f.samples;
    if (f.cut) c.cut = *f.cut;
    if (f.out) c.out = *f.out;
    if (f.workers) c.workers = *f.workers;
    if (f.candidates) c.mid_spectrum_candidates = *f.candidates;
    if (f.no_mid_spectrum) c.mid_spectrum = false;
    c.validate();
    return c;
  });
}

inline StateVector named_state(const CommonFlags& f, int L) {
  return as_usage([&] {
    const StateFamily fam = parse_state_family(f.state.value_or("t-product"));
    if (fam == StateFamily::kHamming) return make_hamming_state(L, f.alpha.value_or(1.0), 0);
    Rng rng = make_rng(f.seed.value_or(0), 0, Stream::kInitialState);
    return make_named_state(fam, L, rng);
  });
}

inline std::vector<double> column(const EnsembleRecord& r, const std::string& name) {
  if (name == "M2") return r.m2.mean;
  if (name == "S") return r.entropy.mean;
  if (name == "WZ") return r.wz.mean;
  throw UsageError("unknown observable '" + name + "' (use M2, S or WZ)");
}

}  // namespace detail

/// Command-line entry point. Returns 0 on success, 1 on usage errors, 2 on
/// runtime failures.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Nonstabilizerness dynamics of disordered spin chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::function<void()> action;

  detail::CommonFlags run_f;
  auto* run = app.add_subcommand("run", "run a disorder ensemble and write an EnsembleRecord CSV");
  detail::add_common(run, run_f);
  run->add_option("--config", run_f.config, "JSON config file; flags override its values");
  run->add_option("--workers", run_f.workers, "worker threads (does not change results)");
  run->add_option("--candidates", run_f.candidates, "mid-spectrum candidate states");
  run->add_flag("--no-mid-spectrum", run_f.no_mid_spectrum, "use the first drawn initial state");
  run->callback([&] {
    action = [&] {
      RunConfig base;
      if (run_f.config) {
        std::ifstream f(*run_f.config);
        if (!f) throw UsageError("cannot open config '" + *run_f.config + "'");
        try {
          base = run_config_from_json(nlohmann::json::parse(f));
        } catch (const nlohmann::json::exception& e) {
          throw UsageError("bad config '" + *run_f.config + "': " + e.what());
        }
      }
      RunConfig c = detail::apply_flags(base, run_f);
      if (c.out.empty()) c.out = "record.csv";
      const EnsembleRecord rec = run_ensemble(c);
      save_record(rec, c.out);
      out << fmt::format("wrote {} ({} of {} realizations, {} grid times, {:.1f} s)\n", c.out, rec.n_completed,
                         rec.n_requested, rec.times.size(), rec.wall_seconds);
      for (const auto& fl : rec.failures) {
        err << fmt::format("realization {} (seed {}) failed: {}\n", fl.index, fl.seed, fl.message);
      }
    };
  });

  detail::CommonFlags ao_f;
  double ao_theta = std::numbers::pi / 2, ao_phi = 0.0;
  auto* ao = app.add_subcommand("anderson-oracle", "tabulate the Anderson-limit SRE quadrature");
  detail::add_common(ao, ao_f);
  ao->add_option("--theta", ao_theta, "polar angle of every site");
  ao->add_option("--phi", ao_phi, "azimuth of every site");
  ao->callback([&] {
    action = [&] {
      const int L = ao_f.L.value_or(10);
      const double W = ao_f.W.value_or(1.0);
      const TimeGrid grid = detail::as_usage(
          [&] { return make_time_grid(ao_f.tmin.value_or(0.1), ao_f.tmax.value_or(2e4), ao_f.per_decade.value_or(10)); });
      const BlochAngles a = BlochAngles::uniform(L, ao_theta, ao_phi);
      detail::as_usage([&] { a.validate(); if (!(W > 0.0)) throw UsageError("--W must be > 0"); return 0; });
      std::string text = "t,M2,M2_per_site\n";
      for (double t : grid.times) {
        const double m = anderson_sre(a, W, t);
        text += fmt::format("{},{},{}\n", t, m, m / L);
      }
      const std::string path = ao_f.out.value_or("oracle.csv");
      detail::write_text(path, text);
      out << fmt::format("wrote {} ({} times); plateau per site {}\n", path, grid.size(),
                         anderson_plateau(BlochAngles::uniform(1, ao_theta, ao_phi), W));
    };
  });

  std::string fit_in, fit_window = "10:", fit_out = "fits.csv";
  auto* fit = app.add_subcommand("fit", "fit M_sat - c t^-beta to a record's mean M2");
  fit->add_option("--in", fit_in, "EnsembleRecord CSV")->required();
  fit->add_option("--window", fit_window, "fit window lo:hi (either side may be empty)");
  fit->add_option("--out", fit_out, "CSV file the fit row is appended to");
  fit->callback([&] {
    action = [&] {
      const FitWindow w = detail::parse_window(fit_window);
      const EnsembleRecord rec = load_record(fit_in);
      const SaturationFit f = fit_power_law_saturation(rec.times, rec.m2.mean, w);
      const std::string header =
          "source,model,L,W,xi,state,t_lo,t_hi,n_points,M_sat,M_sat_sem,c,c_sem,beta,beta_sem,residual_rms,degenerate";
      const auto& c = rec.config;
      const std::string row = fmt::format(
          "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", fit_in, to_string(c.model), c.L, c.W,
          c.model == ModelKind::kLBit ? c.xi : std::nan(""), to_string(c.state), f.t_lo, f.t_hi, f.n_points,
          f.m_sat, f.m_sat_stderr, f.c, f.c_stderr, f.beta, f.beta_stderr, f.residual_rms, f.degenerate ? 1 : 0);
      const bool fresh = !std::filesystem::exists(fit_out) || std::filesystem::file_size(fit_out) == 0;
      std::ofstream o(fit_out, std::ios::app);
      if (!o) throw std::runtime_error("cannot open '" + fit_out + "'");
      if (fresh) o << header << "\n";
      o << row << "\n";
      out << header << "\n" << row << "\n";
    };
  });

  std::string fd_in, fd_window = ":", fd_obs = "WZ";
  auto* fd = app.add_subcommand("fit-decay", "fit a t^-lambda power law to a record observable");
  fd->add_option("--in", fd_in, "EnsembleRecord CSV")->required();
  fd->add_option("--window", fd_window, "fit window lo:hi");
  fd->add_option("--observable", fd_obs, "M2, S or WZ");
  fd->callback([&] {
    action = [&] {
      const FitWindow w = detail::parse_window(fd_window);
      const EnsembleRecord rec = load_record(fd_in);
      const auto f = fit_power_law_decay(rec.times, detail::column(rec, fd_obs), w);
      out << "amplitude,lambda,lambda_sem,n_points\n"
          << fmt::format("{},{},{},{}\n", f.amplitude, f.lambda, f.lambda_stderr, f.n_points);
    };
  });

  std::string co_ref, co_tgt;
  std::optional<std::string> co_out;
  auto* co = app.add_subcommand("collapse", "rescale factor aligning a target M2(S) curve with a reference");
  co->add_option("--reference", co_ref, "reference EnsembleRecord CSV")->required();
  co->add_option("--target", co_tgt, "target EnsembleRecord CSV")->required();
  co->add_option("--out", co_out, "optional CSV of both curves on the common S grid");
  co->callback([&] {
    action = [&] {
      const auto r = load_record(co_ref), t = load_record(co_tgt);
      const auto res = collapse_factor({r.entropy.mean, r.m2.mean}, {t.entropy.mean, t.m2.mean});
      out << "f,deviation\n" << fmt::format("{},{}\n", res.f, res.deviation);
      if (co_out) {
        std::string text = "S,M2_reference,M2_target,M2_target_rescaled\n";
        for (std::size_t i = 0; i < res.s_grid.size(); ++i) {
          text += fmt::format("{},{},{},{}\n", res.s_grid[i], res.reference[i], res.target[i], res.target[i] / res.f);
        }
        detail::write_text(*co_out, text);
      }
    };
  });

  std::vector<std::string> cr_in;
  double cr_t = 1e3;
  std::optional<std::string> cr_out;
  auto* cr = app.add_subcommand("crossover", "Haar deviation table over (L, W) and per-W slopes");
  cr->add_option("--in", cr_in, "EnsembleRecord CSVs")->required();
  cr->add_option("--t-eval", cr_t, "grid time at which M2 is read");
  cr->add_option("--out", cr_out, "CSV output (default: stdout only)");
  cr->callback([&] {
    action = [&] {
      std::vector<EnsembleRecord> recs;
      for (const auto& p : cr_in) recs.push_back(load_record(p));
      const CrossoverTable tab = crossover_scan(recs, cr_t);
      std::string text = "L,W,M2,delta_M2,above_haar\n";
      for (const auto& r : tab.rows) text += fmt::format("{},{},{},{},{}\n", r.L, r.W, r.m2, r.delta, r.above_haar ? 1 : 0);
      text += "\nW,slope,slope_sem,n_sizes\n";
      for (const auto& s : tab.slopes) text += fmt::format("{},{},{},{}\n", s.W, s.slope, s.slope_stderr, s.n_sizes);
      for (const auto& [l, w] : tab.missing) err << fmt::format("missing cell L={} W={}\n", l, w);
      out << text;
      if (cr_out) detail::write_text(*cr_out, text);
    };
  });

  int haar_L = 8, haar_states = 0;
  std::uint64_t haar_seed = 0;
  auto* haar = app.add_subcommand("haar", "Haar-average M2 and, optionally, a sampled check");
  haar->add_option("--L", haar_L, "number of qubits");
  haar->add_option("--states", haar_states, "average sre over this many Haar-random states");
  haar->add_option("--seed", haar_seed, "seed for --states");
  haar->callback([&] {
    action = [&] {
      detail::as_usage([&] { require_qubits(haar_L, kMaxExactQubits, "haar"); return 0; });
      out << fmt::format("haar_M2 {}\n", haar_sre2(haar_L));
      if (haar_states > 0) {
        Rng rng = make_rng(haar_seed, 0, Stream::kInitialState);
        double s = 0.0;
        for (int i = 0; i < haar_states; ++i) s += sre(make_haar_state(haar_L, rng), 2);
        out << fmt::format("sampled_mean_M2 {}\n", s / haar_states);
      }
    };
  });

  detail::CommonFlags se_f;
  int se_k = 2;
  auto* se = app.add_subcommand("sre-exact", "exact stabilizer Renyi entropy of a named state");
  detail::add_common(se, se_f);
  se->add_option("--k", se_k, "Renyi index (1 = Shannon limit)");
  se->callback([&] {
    action = [&] {
      const int L = se_f.L.value_or(4);
      detail::as_usage([&] { require_qubits(L, kMaxExactQubits, "sre-exact"); return 0; });
      const StateVector s = detail::named_state(se_f, L);
      out << fmt::format("M{} {}\n", se_k, detail::as_usage([&] { return sre(s, se_k); }));
    };
  });

  detail::CommonFlags ss_f;
  auto* ss = app.add_subcommand("sre-sample", "Monte-Carlo M2 estimate of a named state");
  detail::add_common(ss, ss_f);
  ss->callback([&] {
    action = [&] {
      const int L = ss_f.L.value_or(10);
      const int n = ss_f.samples.value_or(15000);
      detail::as_usage([&] {
        require_qubits(L, kMaxSampledQubits, "sre-sample");
        if (n < 100) throw UsageError("--samples must be >= 100");
        return 0;
      });
      const StateVector s = detail::named_state(ss_f, L);
      Rng rng = make_rng(ss_f.seed.value_or(0), 0, Stream::kPauliSampling);
      const auto est = sre2_sampled(s, n, rng);
      out << fmt::format("M2 {} stderr {} samples {}\n", est.estimate, est.std_error, est.n_samples);
    };
  });

  std::uint64_t val_seed = 1;
  auto* val = app.add_subcommand("validate", "run the built-in invariant checks");
  val->add_option("--seed", val_seed, "seed for the random checks");
  int val_failures = 0;
  val->callback([&] {
    action = [&] {
      for (const auto& r : run_validation_suite(val_seed)) {
        out << fmt::format("[{}] {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        if (!r.passed) ++val_failures;
      }
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (e.get_name() == "CallForVersion" ? std::string(kVersion) + "\n" : app.help());
      return 0;
    }
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }
  try {
    if (action) action();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return val_failures > 0 ? 2 : 0;
}

}  // namespace locmagic
