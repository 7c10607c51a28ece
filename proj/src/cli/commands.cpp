#include <chrono>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "resilient/cli.hpp"
#include "resilient/synthesis.hpp"

namespace resilient::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

class PhaseTimer {
 public:
  template <class F>
  auto time(const std::string& phase, F&& f) {
    const auto start = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(phase, start);
    } else {
      auto result = f();
      record(phase, start);
      return result;
    }
  }
  const json& timings() const { return timings_; }

 private:
  void record(const std::string& phase, Clock::time_point start) {
    timings_[phase] = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  }
  json timings_ = json::object();
};

json settings_json(const NumericSettings& s) {
  return {{"eps_strict", s.eps_strict},
          {"duality_tol", s.duality_tol},
          {"max_iter", s.max_iter},
          {"max_stall", s.max_stall},
          {"variable_bound", s.variable_bound},
          {"stability_margin", s.stability_margin},
          {"max_w_condition", s.max_w_condition},
          {"divergence_threshold", s.divergence_threshold}};
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json base_report(const std::string& command, const std::filesystem::path& config) {
  return {{"command", command},
          {"config", config.string()},
          {"config_digest", nullptr},
          {"exit_code", static_cast<int>(kInputError)},
          {"status", "error"},
          {"lmi_margin", nullptr},
          {"oracle_rho", nullptr},
          {"certified", nullptr},
          {"decay_slope", nullptr}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ConfigError(path.string() + ": cannot open for writing");
  os << text;
  os.flush();
  if (!os) throw ConfigError(path.string() + ": write failed");
}

int finish(json& report, int code, const PhaseTimer& timer,
           const std::optional<std::filesystem::path>& report_out, std::ostream& out,
           std::ostream& err) {
  report["exit_code"] = code;
  report["timings_ms"] = timer.timings();
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (report_out) {
    try {
      write_text(*report_out, text);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kInputError;
    }
  }
  return code;
}

// Runs a command body; any exception that escapes is an input error.
int guarded(json& report, PhaseTimer& timer, const std::optional<std::filesystem::path>& report_out,
            std::ostream& out, std::ostream& err, const std::function<int()>& body) {
  int code = kInputError;
  try {
    code = body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    report["status"] = "error";
    report["error"] = e.what();
    code = kInputError;
  }
  return finish(report, code, timer, report_out, out, err);
}

}  // namespace

int cmd_synth(const SynthOptions& opts, std::ostream& out, std::ostream& err) {
  json report = base_report("synth", opts.config);
  PhaseTimer timer;
  return guarded(report, timer, opts.report_out, out, err, [&]() -> int {
    const auto cfg = timer.time("load", [&] { return load_config(opts.config); });
    report["config_digest"] = cfg.digest;
    report["settings"] = settings_json(cfg.settings);

    SynthesisResult result;
    try {
      result = timer.time("synthesize", [&] { return synthesize(cfg.system, cfg.settings); });
    } catch (const SynthesisError& e) {
      report["error"] = e.what();
      err << "synth: " << e.what() << "\n";
      if (e.reason() == SynthesisError::Reason::infeasible) {
        report["status"] = "infeasible";
        return kInfeasible;
      }
      report["status"] = "numerical_failure";
      return kNumericalFailure;
    }

    report["lmi_margin"] = result.lmi_margin;
    report["oracle_rho"] = result.oracle_rho;
    report["certified"] = result.certified;
    report["solver_iterations"] = result.solver_iterations;
    report["w_condition"] = result.w_condition;
    report["gains_file"] = opts.gains_out.string();
    report["K"] = matrix_json(result.gains.K);
    report["L"] = matrix_json(result.gains.L);

    GainsFile file{result.gains, result.Q1, result.variables.Q2, result.lmi_margin,
                   result.oracle_rho};
    timer.time("write", [&] { write_text(opts.gains_out, format_gains(file)); });
    report["status"] = result.certified ? "certified" : "uncertified";
    if (!result.certified)
      err << "synth: LMI feasible but the closed loop is not mean-square stable (rho = "
          << format_number(result.oracle_rho) << ")\n";
    return result.certified ? kOk : kNotStable;
  });
}

int cmd_verify(const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
  json report = base_report("verify", opts.config);
  PhaseTimer timer;
  return guarded(report, timer, opts.report_out, out, err, [&]() -> int {
    const auto cfg = timer.time("load", [&] { return load_config(opts.config); });
    const auto gains = timer.time("load_gains", [&] { return load_gains(opts.gains); });
    report["config_digest"] = cfg.digest;
    report["gains_file"] = opts.gains.string();
    report["settings"] = settings_json(cfg.settings);
    check_gain_dimensions(cfg.system.plant, gains.gains);
    if (gains.lmi_margin) report["lmi_margin"] = *gains.lmi_margin;

    const auto verdict =
        timer.time("verify", [&] { return verify_gains(cfg.system, gains.gains, cfg.settings); });
    report["oracle_rho"] = verdict.rho;
    report["certified"] = verdict.stable;
    report["status"] = verdict.stable ? "stable" : "unstable";
    return verdict.stable ? kOk : kNotStable;
  });
}

void write_trajectories_csv(std::ostream& os, const PlantModel& plant,
                            const std::vector<TrajectoryRecord>& records) {
  const Index n = plant.states(), m = plant.inputs(), p = plant.outputs();
  os << "run,k";
  for (Index i = 1; i <= n; ++i) os << ",x" << i;
  for (Index i = 1; i <= n; ++i) os << ",xhat" << i;
  for (Index i = 1; i <= m; ++i) os << ",u" << i;
  for (Index i = 1; i <= p; ++i) os << ",ytilde" << i;
  for (Index i = 1; i <= p; ++i) os << ",alpha" << i;
  for (Index i = 1; i <= m; ++i) os << ",gamma" << i;
  os << "\n";
  for (const auto& rec : records) {
    for (std::size_t k = 0; k < rec.steps.size(); ++k) {
      const auto& s = rec.steps[k];
      os << rec.run << "," << k;
      for (double v : s.x) os << "," << format_number(v);
      for (double v : s.xhat) os << "," << format_number(v);
      for (double v : s.u) os << "," << format_number(v);
      for (double v : s.ytilde) os << "," << format_number(v);
      for (int v : s.alpha) os << "," << v;
      for (int v : s.gamma) os << "," << v;
      os << "\n";
    }
  }
}

void write_mean_square_csv(std::ostream& os, const MsEstimate& estimate) {
  os << "k,mean_square\n";
  for (std::size_t k = 0; k < estimate.mean_square.size(); ++k)
    os << k << "," << format_number(estimate.mean_square[k]) << "\n";
}

int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  json report = base_report("simulate", opts.config);
  PhaseTimer timer;
  return guarded(report, timer, opts.report_out, out, err, [&]() -> int {
    if (opts.runs < 1) throw ConfigError("--runs must be >= 1");
    if (opts.steps < 1) throw ConfigError("--steps must be >= 1");
    const auto cfg = timer.time("load", [&] { return load_config(opts.config); });
    const auto gains = timer.time("load_gains", [&] { return load_gains(opts.gains); });
    report["config_digest"] = cfg.digest;
    report["gains_file"] = opts.gains.string();
    report["settings"] = settings_json(cfg.settings);
    report["seed"] = opts.seed;
    report["runs"] = opts.runs;
    report["steps"] = opts.steps;
    check_gain_dimensions(cfg.system.plant, gains.gains);
    if (!cfg.x0) throw ConfigError(opts.config.string() + ": x0: missing (required by simulate)");
    if (!cfg.xhat0)
      throw ConfigError(opts.config.string() + ": xhat0: missing (required by simulate)");
    if (gains.lmi_margin) report["lmi_margin"] = *gains.lmi_margin;

    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec || !std::filesystem::is_directory(opts.out_dir))
      throw ConfigError(opts.out_dir.string() + ": cannot create output directory");

    const auto verdict =
        timer.time("verify", [&] { return verify_gains(cfg.system, gains.gains, cfg.settings); });
    report["oracle_rho"] = verdict.rho;
    report["certified"] = verdict.stable;

    SimConfig sim{opts.steps, opts.runs, opts.seed, *cfg.x0, *cfg.xhat0, opts.threads};
    const auto mc = timer.time("simulate", [&] {
      return monte_carlo(cfg.system, gains.gains, sim, true, cfg.settings);
    });
    const auto& est = mc.estimate;

    timer.time("write", [&] {
      std::ostringstream traj, ms;
      write_trajectories_csv(traj, cfg.system.plant, mc.records);
      write_mean_square_csv(ms, est);
      write_text(opts.out_dir / "trajectories.csv", traj.str());
      write_text(opts.out_dir / "mean_square.csv", ms.str());
    });

    if (est.decay_slope) report["decay_slope"] = *est.decay_slope;
    report["decay_factor"] = est.decay_slope ? json(std::exp(*est.decay_slope)) : json(nullptr);
    report["fit_window"] = {est.fit_begin, est.fit_end};
    report["diverged_runs"] = est.diverged_runs;
    report["usable"] = est.usable;
    report["empirically_stable"] = est.empirically_stable;
    report["status"] = est.empirically_stable ? "stable" : "unstable";
    return est.empirically_stable ? kOk : kNotStable;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Resilient observer-based controller synthesis under stochastic sensor/actuator attacks"};
  app.require_subcommand(1);

  SynthOptions synth;
  std::string synth_report;
  auto* s = app.add_subcommand("synth", "solve the synthesis LMI and certify the gains");
  s->add_option("config", synth.config, "system config (JSON)")->required();
  s->add_option("-g,--gains", synth.gains_out, "gains file to write")->capture_default_str();
  s->add_option("-r,--report", synth_report, "also write the JSON report here");

  VerifyOptions verify;
  std::string verify_report;
  auto* v = app.add_subcommand("verify", "check mean-square stability of given gains");
  v->add_option("config", verify.config, "system config (JSON)")->required();
  v->add_option("gains", verify.gains, "gains file (JSON)")->required();
  v->add_option("-r,--report", verify_report, "also write the JSON report here");

  SimulateOptions sim;
  std::string sim_report;
  auto* m = app.add_subcommand("simulate", "Monte Carlo simulation of the attacked closed loop");
  m->add_option("config", sim.config, "system config (JSON)")->required();
  m->add_option("gains", sim.gains, "gains file (JSON)")->required();
  m->add_option("--runs", sim.runs, "number of runs")->capture_default_str();
  m->add_option("--steps", sim.steps, "steps per run")->capture_default_str();
  m->add_option("--seed", sim.seed, "random seed")->capture_default_str();
  m->add_option("--out", sim.out_dir, "output directory for CSVs")->capture_default_str();
  m->add_option("-r,--report", sim_report, "also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  auto optional_path = [](const std::string& p) {
    return p.empty() ? std::nullopt : std::optional<std::filesystem::path>(p);
  };
  if (s->parsed()) {
    synth.report_out = optional_path(synth_report);
    return cmd_synth(synth, out, err);
  }
  if (v->parsed()) {
    verify.report_out = optional_path(verify_report);
    return cmd_verify(verify, out, err);
  }
  sim.report_out = optional_path(sim_report);
  return cmd_simulate(sim, out, err);
}

}  // namespace resilient::cli
