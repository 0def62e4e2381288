#include "bmf/commands.hpp"

#include <omp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "bmf/config.hpp"
#include "bmf/io.hpp"

namespace bmf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Property failures found after the outputs were written.
class PropertyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Output {
 public:
  Output(fs::path dir, std::string command, const RunConfig& cfg)
      : dir_(std::move(dir)), command_(std::move(command)), cfg_(cfg) {}

  void file(const std::string& name, const std::string& content) {
    write_atomic(dir_ / name, content);
    files_.push_back(name);
  }

  json& results() { return results_; }

  void manifest() {
    json m{{"command", command_},
           {"version", version_string},
           {"config_hash", fnv1a_hex(cfg_.document.dump())},
           {"seed", cfg_.master_seed},
           {"files", files_},
           {"results", results_}};
    write_atomic(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  fs::path dir_;
  std::string command_;
  const RunConfig& cfg_;
  std::vector<std::string> files_;
  json results_ = json::object();
};

fs::path output_dir(const std::string& command, const CommandOptions& o, const RunConfig& cfg) {
  if (o.out) return *o.out;
  if (!cfg.directory.empty()) return cfg.directory;
  return fs::path("results") / (command + "-" + fnv1a_hex(cfg.document.dump()).substr(0, 8));
}

void apply_threads(const CommandOptions& o) {
  std::optional<int> k = o.threads;
  if (!k) {
    if (const char* env = std::getenv("BELAVKIN_MF_THREADS")) {
      try {
        k = std::stoi(env);
      } catch (const std::exception&) {
        throw ConfigError("", "BELAVKIN_MF_THREADS must be a positive integer");
      }
    }
  }
  if (k) {
    if (*k < 1) throw ConfigError("", "thread count must be >= 1");
    omp_set_num_threads(*k);
  }
}

json summary_json(const SampleSummary& s) {
  return {{"n", s.n}, {"mean", s.mean}, {"standard_error", s.standard_error}, {"ci95", {s.ci_low, s.ci_high}}};
}

void law_outputs(Output& out, const LawPrecompute& law) {
  out.file("picard.csv", picard_csv(law.residuals));
  out.results()["law"] = {{"converged", law.converged}, {"iterations", law.residuals.size()}};
}

void require_law(const LawPrecompute& law) {
  if (!law.converged)
    throw NumericalAbort("Picard iteration did not reach the tolerance (last residual " +
                             format_double(law.residuals.empty() ? 0.0 : law.residuals.back()) + ")",
                         0);
}

void cmd_simulate_mf(const RunConfig& cfg, Output& out) {
  const auto s = cfg.setup();
  MeanFieldConfig c;
  c.scheme = s.scheme;
  c.T = s.T;
  c.M = s.M;
  c.picard_tol = s.picard_tol;
  c.max_iters = s.max_iters;
  c.seed = s.seed;
  c.sample_stride = s.sample_stride;
  const WaveFunction phi0 = s.phi0;
  InitialSampler init = [&phi0](std::size_t) { return phi0; };
  const auto r = s.mode == MeanFieldMode::picard ? picard_meanfield(init, s.phys, c)
                                                 : ensemble_meanfield(init, s.phys, c);
  law_outputs(out, {r.xi, r.residuals, r.converged});

  CsvText drift({"t", "rep", "norm_drift"});
  double max_drift = 0.0;
  for (std::size_t m = 0; m < r.trajectories.size(); ++m) {
    const auto& tr = r.trajectories[m];
    for (std::size_t i = 0; i < tr.times.size(); ++i) drift.row({num(tr.times[i]), num(m), num(tr.norm_drift[i])});
    max_drift = std::max(max_drift, tr.max_norm_drift);
  }
  out.file("norm_drift.csv", drift.str());
  const int p = cfg.h1_power;
  out.file("h1_moments.csv", h1_moments_csv(r.trajectories.front().times, p, h1_moment_series(r.trajectories, p)));
  out.results()["max_norm_drift"] = max_drift;
  out.manifest();
  require_law({r.xi, r.residuals, r.converged});
}

void cmd_simulate_nbody(const RunConfig& cfg, Output& out) {
  const auto s = cfg.setup();
  const auto rows = run_nbody_ensemble(s, cfg.N_list, cfg.repetitions, cfg.memory_budget_mb);
  CsvText csv({"t", "N", "rep", "norm_drift", "marginal_purity"});
  double max_drift = 0.0;
  for (const auto& r : rows) {
    csv.row({num(r.t), num(r.n_particles), num(r.repetition), num(r.norm_drift), num(r.purity)});
    max_drift = std::max(max_drift, r.norm_drift);
  }
  out.file("nbody.csv", csv.str());
  out.results()["max_norm_drift"] = max_drift;
  out.manifest();
}

void cmd_converge(const RunConfig& cfg, Output& out) {
  ConvergenceConfig c;
  c.setup = cfg.setup();
  c.N_list = cfg.N_list;
  c.repetitions = cfg.repetitions;
  c.memory_budget_mb = cfg.memory_budget_mb;
  c.pair_indicators = cfg.pair_indicators;
  const auto r = run_convergence(c);
  law_outputs(out, r.law);
  out.file("indicators.csv", indicators_csv(r.samples));
  out.file("indicators_summary.csv", indicator_summary_csv(r.summary));
  out.file("norm_drift.csv", convergence_drift_csv(r.drift));
  if (c.pair_indicators) out.file("pair_indicators.csv", pair_csv(r.pairs));
  json finals = json::array();
  for (std::size_t i = 0; i < r.summary.size(); ++i) {
    const bool last = i + 1 == r.summary.size() || r.summary[i + 1].n_particles != r.summary[i].n_particles;
    if (last)
      finals.push_back({{"N", r.summary[i].n_particles},
                        {"t", r.summary[i].t},
                        {"i_hat", summary_json(r.summary[i].i_hat)},
                        {"r_trace", summary_json(r.summary[i].r_trace)}});
  }
  auto& res = out.results();
  res["final"] = finals;
  res["sandwich_violations"] = r.sandwich_violations;
  res["pair_violations"] = r.pair_violations;
  res["max_initial_indicator"] = r.max_initial_indicator;
  out.manifest();
  require_law(r.law);
  if (r.max_initial_indicator > 1e-10)
    throw PropertyFailure("initial indicator " + format_double(r.max_initial_indicator) + " exceeds 1e-10");
  if (r.sandwich_violations > 0)
    throw PropertyFailure(std::to_string(r.sandwich_violations) + " samples violate I <= R <= 2 sqrt(2 I)");
  if (r.pair_violations > 0)
    throw PropertyFailure(std::to_string(r.pair_violations) + " samples violate the pair indicator bound");
}

void cmd_delta_sweep(const RunConfig& cfg, Output& out) {
  DeltaSweepConfig c;
  c.setup = cfg.setup();
  c.N_list = cfg.delta_N_list;
  c.repetitions = cfg.repetitions;
  c.h1_power = cfg.h1_power;
  const auto r = run_delta_sweep(c);
  law_outputs(out, r.law);
  // Rows are ordered by (N, rep, t).
  std::vector<std::size_t> reps;
  const std::size_t S = r.h1_times.size();
  for (std::size_t i = 0; i < r.rows.size(); ++i) reps.push_back((i / S) % c.repetitions);
  out.file("delta.csv", delta_csv(r.rows, reps));
  out.file("delta_summary.csv", delta_summary_csv(r.summary));
  out.file("h1_moments.csv", h1_moments_csv(r.h1_times, c.h1_power, r.h1_moments));
  auto& res = out.results();
  res["delta_fit"] = {{"t", r.fit_time},
                      {"slope", r.l2_fit.slope},
                      {"intercept", r.l2_fit.intercept},
                      {"slope_se", r.l2_fit.slope_se},
                      {"slope_ci95", {r.l2_fit.slope_ci_low, r.l2_fit.slope_ci_high}}};
  res["h1_envelope"] = {{"p", c.h1_power},
                        {"s0", r.h1_envelope.s0},
                        {"rate", r.h1_envelope.rate},
                        {"constant", r.h1_envelope.constant},
                        {"finite", r.h1_envelope.finite}};
  out.manifest();
  require_law(r.law);
  if (!r.h1_envelope.finite) throw PropertyFailure("H1 moment series is not finite");
}

void cmd_proptest(const RunConfig& cfg, Output& out) {
  const auto reports = run_property_suite(cfg.proptest);
  out.file("proptest.json", proptest_report(reports).dump(2) + "\n");
  std::size_t failures = 0;
  for (const auto& r : reports) failures += r.failures;
  out.results()["failures"] = failures;
  out.manifest();
  if (failures > 0) throw PropertyFailure(std::to_string(failures) + " property checks failed");
}

void report(std::ostream& err, const std::string& kind, const std::string& message, const json& extra = {}) {
  json j{{"error", kind}, {"message", message}};
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) j[k] = v;
  err << j.dump() << std::endl;
}

}  // namespace

int run_command(const std::string& name, const CommandOptions& opts, std::ostream& err) {
  try {
    const bool proptest = name == "proptest-operators";
    if (!proptest && name != "simulate-mf" && name != "simulate-nbody" && name != "converge" && name != "delta-sweep")
      throw ConfigError("", "unknown command '" + name + "'");
    apply_threads(opts);
    RunConfig cfg = load_config(opts.config_path, proptest);
    if (opts.seed) override_seed(cfg, *opts.seed);
    Output out(output_dir(name, opts, cfg), name, cfg);
    if (name == "simulate-mf") cmd_simulate_mf(cfg, out);
    else if (name == "simulate-nbody") cmd_simulate_nbody(cfg, out);
    else if (name == "converge") cmd_converge(cfg, out);
    else if (name == "delta-sweep") cmd_delta_sweep(cfg, out);
    else cmd_proptest(cfg, out);
    return exit_ok;
  } catch (const ConfigError& e) {
    report(err, "config", e.what(), {{"pointer", e.pointer()}});
    return exit_config;
  } catch (const ExperimentAbort& e) {
    report(err, "numerical", e.what(),
           {{"N", e.n_particles}, {"repetition", e.repetition}, {"step", e.step}});
    return exit_numerical;
  } catch (const NumericalAbort& e) {
    report(err, "numerical", e.what(), {{"step", e.step()}});
    return exit_numerical;
  } catch (const EigenSolverError& e) {
    report(err, "numerical", e.what());
    return exit_numerical;
  } catch (const PropertyFailure& e) {
    report(err, "property", e.what());
    return exit_property;
  } catch (const std::invalid_argument& e) {
    report(err, "config", e.what());
    return exit_config;
  } catch (const fs::filesystem_error& e) {
    report(err, "io", e.what());
    return exit_config;
  } catch (const std::exception& e) {
    report(err, "internal", e.what());
    return exit_internal;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Mean-field and N-particle stochastic Schroedinger simulator"};
  app.require_subcommand(1);
  CommandOptions opts;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;
  for (const char* name : {"simulate-mf", "simulate-nbody", "converge", "delta-sweep", "proptest-operators"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opts.config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides mc.master_seed)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    report(std::cerr, "usage", e.what());
    return exit_config;
  }
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--out")) opts.out = out;
  if (sub->count("--threads")) opts.threads = threads;
  return run_command(sub->get_name(), opts, std::cerr);
}

}  // namespace bmf
