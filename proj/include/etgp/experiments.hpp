#pragma once

// Config-driven experiment runners backing the CLI subcommands: single runs
// with metric/theory exports, the trigger/termination table, the R_f / R_c
// curve sweeps, and the assumption + invariant checker.

#include "etgp/analysis.hpp"
#include "etgp/common.hpp"
#include "etgp/config.hpp"
#include "etgp/core.hpp"
#include "etgp/io.hpp"
#include "etgp/objective.hpp"
#include "etgp/reference.hpp"
#include "etgp/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace etgp {

/// Trial seeding: trial j draws its instance from problem.seed + j and its
/// initial states from a mixed run.base_seed + j, so cells of a table share
/// instances while states stay decoupled from the instance stream.
inline std::uint64_t instance_seed(const ExperimentConfig& cfg, int trial) {
  return cfg.problem.seed + static_cast<std::uint64_t>(trial);
}
inline std::uint64_t state_seed(const ExperimentConfig& cfg, int trial) {
  return detail::splitmix64(cfg.run.base_seed +
                            0x9e3779b97f4a7c15ULL *
                                (static_cast<std::uint64_t>(trial) + 1));
}

struct RunResult {
  LeastSquaresInstance instance;
  Optimum optimum;
  TrajectoryLog log;
  MetricsSeries metrics;
};

struct RunOverrides {
  std::optional<std::uint64_t> seed;  // replaces run.base_seed
  std::optional<long> horizon;
  std::optional<int> trials;
};

inline ExperimentConfig apply_overrides(ExperimentConfig cfg,
                                        const RunOverrides& ov) {
  if (ov.seed) cfg.run.base_seed = *ov.seed;
  if (ov.horizon) cfg.run.horizon = *ov.horizon;
  if (ov.trials) cfg.run.trials = *ov.trials;
  return cfg;
}

/// One trial with the given schedules; termination and horizon behave as in
/// the config unless terminate=false forces a fixed-horizon run.
inline RunResult run_trial(const ExperimentConfig& cfg, int trial,
                           const Schedule& tau, const Schedule& zeta,
                           long horizon, bool terminate, LogOptions log_opts) {
  LeastSquaresInstance inst =
      generate_least_squares(cfg.problem.m, cfg.problem.d, cfg.problem.p,
                             cfg.problem.sigma, instance_seed(cfg, trial));
  Optimum opt = solve_optimum(inst);
  SimConfig<LeastSquaresInstance> sim{
      .graph = build_graph(cfg.problem, cfg.graph, horizon),
      .alpha = cfg.schedules.alpha,
      .tau = tau,
      .zeta = zeta,
      .objective = inst,
      .horizon = horizon,
      .seed = state_seed(cfg, trial),
      .log = log_opts};
  sim.optimum_x = opt.x;
  sim.optimum_f = opt.f;
  if (terminate && cfg.run.termination) sim.termination_rd = cfg.run.termination;
  TrajectoryLog log = simulate(std::move(sim));
  MetricsSeries metrics =
      compute_metrics(log, cfg.run.termination.value_or(1e-2));
  return RunResult{std::move(inst), std::move(opt), std::move(log),
                   std::move(metrics)};
}

inline void write_metrics_csv(const MetricsSeries& ms,
                              const std::filesystem::path& path) {
  auto os = open_output(path);
  os << "t,R_d,R_f,R_c,Nx_cum,Ny_cum\n";
  auto field = [](bool avail, double v) {
    return avail && !std::isnan(v) ? format_double(v) : std::string();
  };
  for (std::size_t t = 1; t < ms.r_d.size(); ++t) {
    os << t << ',' << field(ms.r_d_available, ms.r_d[t]) << ','
       << field(ms.r_f_available, ms.r_f[t]) << ','
       << field(ms.r_c_available, ms.r_c[t]) << ','
       << format_double(ms.nx_cum[t]) << ',' << format_double(ms.ny_cum[t])
       << '\n';
  }
}

inline void write_trajectory_csv(const TrajectoryLog& log,
                                 const MetricsSeries& ms,
                                 const std::filesystem::path& path) {
  auto os = open_output(path);
  os << "t,agent,channel,triggered,y_i,x_norm,zhat_gap_to_first,R_d,R_f,R_c\n";
  auto metric = [&](const std::vector<double>& v, bool avail, long t)
      -> std::string {
    if (!avail || static_cast<std::size_t>(t) >= v.size()) return {};
    double x = v[static_cast<std::size_t>(t)];
    return std::isnan(x) ? std::string() : format_double(x);
  };
  for (const StateSnapshot& s : log.states) {
    for (int i = 0; i < log.m; ++i) {
      double gap = (s.zhat.row(i) - s.zhat.row(0)).norm();
      for (int ch = 0; ch < 2; ++ch) {
        os << s.t << ',' << (i + 1) << ',' << (ch == 0 ? 'x' : 'y') << ','
           << static_cast<int>(ch == 0 ? s.x_trig[static_cast<std::size_t>(i)]
                                       : s.y_trig[static_cast<std::size_t>(i)])
           << ',' << format_double(s.y[i]) << ','
           << format_double(s.x.row(i).norm()) << ',' << format_double(gap)
           << ',' << metric(ms.r_d, ms.r_d_available, s.t) << ','
           << metric(ms.r_f, ms.r_f_available, s.t) << ','
           << metric(ms.r_c, ms.r_c_available, s.t) << '\n';
      }
    }
  }
}

struct TheoryArtifacts {
  bool available = false;
  std::string note;  // why the report is unavailable, when it is
  PushSumDecay decay;
  TheoryReport report;
  BetaEnvelope envelope;
  YConsensusCheck y_check;
  DisagreementCheck disagreement;
  MixingErrorCheck mixing_errors;
  std::optional<RateBound> rate;  // alpha = 1/sqrt(t) runs only
};

inline TheoryArtifacts build_theory_artifacts(const ExperimentConfig& cfg,
                                              const RunResult& run,
                                              const GraphSequence& graph) {
  TheoryArtifacts art;
  const TrajectoryLog& log = run.log;
  long n = static_cast<long>(log.theory.size());
  if (n < 2) {
    art.note = "theory recording disabled or run too short";
    return art;
  }
  try {
    art.decay = estimate_phi_decay(graph, n - 1);
    double radius = std::max(1e-6, 1.05 * log.max_zhat_dist);
    GradientBound gb =
        estimate_gradient_bound(run.instance, run.optimum.x, radius, 256,
                                detail::splitmix64(run.instance.seed()));
    art.report = build_theory_report(log, art.decay, gb, cfg.schedules.tau,
                                     cfg.schedules.zeta, n);
    art.envelope = beta_envelope(cfg.schedules.zeta, n, log.m, art.report.c0,
                                 art.report.lambda);
    art.y_check = y_consensus_check(log, art.decay, art.report.m_zeta.center,
                                    art.envelope);
    art.disagreement = disagreement_check(log, art.report, cfg.schedules.alpha,
                                          cfg.schedules.tau, art.envelope);
    art.mixing_errors = mixing_error_check(log, cfg.schedules.tau);
    const Schedule& a = cfg.schedules.alpha;
    if (a.family() == ScheduleFamily::PowerLaw && a.coefficient() == 1.0 &&
        a.exponent() == 0.5)
      art.rate = rate_bound(log, art.report, a, cfg.schedules.tau,
                            cfg.schedules.zeta, n - 1);
    art.available = true;
  } catch (const Error& e) {
    art.note = e.what();
  }
  return art;
}

inline void write_theory_csv(const TheoryArtifacts& art,
                             const std::filesystem::path& path) {
  auto os = open_output(path);
  os << "t,beta,disagreement_bound,disagreement_measured,y_dev\n";
  if (!art.available) return;
  std::size_t n = art.y_check.deviation.size();
  for (std::size_t t = 0; t < n; ++t) {
    double bound = t == 0 ? art.disagreement.t0_bound
                          : art.disagreement.bound[t - 1];
    double meas = t == 0 ? art.disagreement.t0_measured
                         : art.disagreement.measured[t - 1];
    os << t << ',' << format_double(art.envelope.beta[t]) << ','
       << format_double(bound) << ',' << format_double(meas) << ','
       << format_double(art.y_check.deviation[t]) << '\n';
  }
}

inline void write_theory_summary(const TheoryArtifacts& art,
                                 const std::filesystem::path& path) {
  auto os = open_output(path);
  if (!art.available) {
    os << "theory report unavailable: " << art.note << '\n';
    return;
  }
  const TheoryReport& r = art.report;
  os << "m_zeta = " << format_double(r.m_zeta.center) << " +/- "
     << format_double(r.m_zeta.halfwidth) << '\n';
  os << "B_zeta = " << format_double(r.m_zeta.b_zeta) << '\n';
  os << "delta_hat = " << format_double(r.delta_hat) << " (empirical)\n";
  os << "D = " << format_double(r.grad_bound) << " over ball of radius "
     << format_double(r.region_radius) << " (trajectory-local)\n";
  os << "C0 = " << format_double(r.c0) << ", lambda = "
     << format_double(r.lambda) << ", Q = " << format_double(r.q)
     << " (estimated)\n";
  os << "e-bound violations: " << art.mixing_errors.violations << '\n';
  os << "y-consensus envelope violations: " << art.y_check.violations << '\n';
  os << "disagreement bound violations: " << art.disagreement.violations
     << '\n';
  os << "weighted disagreement sum (agent 1): measured "
     << format_double(art.disagreement.weighted_sum_measured) << " vs bound "
     << format_double(art.disagreement.weighted_sum_bound) << '\n';
  if (art.rate) {
    os << "rate bound (empirical-constant): J1 = " << format_double(art.rate->j1)
       << ", J2 = " << format_double(art.rate->j2)
       << ", J3 = " << format_double(art.rate->j3)
       << ", total = " << format_double(art.rate->total) << '\n';
  }
}

/// run subcommand: one full run, metric/trajectory/theory exports.
inline RunResult cmd_run(const ExperimentConfig& base, const RunOverrides& ov,
                         bool quiet, std::ostream& out) {
  ExperimentConfig cfg = apply_overrides(base, ov);
  LogOptions lo;
  lo.compute_rc = true;
  lo.compute_rf = true;
  lo.record_theory = cfg.run.theory_horizon > 0;
  lo.theory_horizon = cfg.run.theory_horizon;
  lo.state_stride = cfg.run.thinning;
  RunResult res = run_trial(cfg, 0, cfg.schedules.tau, cfg.schedules.zeta,
                            cfg.run.horizon, true, lo);
  std::filesystem::path dir(cfg.output.dir);
  write_metrics_csv(res.metrics, dir / "metrics.csv");
  if (cfg.run.thinning > 0)
    write_trajectory_csv(res.log, res.metrics, dir / "trajectory.csv");
  GraphSequence graph = build_graph(cfg.problem, cfg.graph, cfg.run.horizon);
  TheoryArtifacts art = build_theory_artifacts(cfg, res, graph);
  write_theory_csv(art, dir / "theory.csv");
  write_theory_summary(art, dir / "theory_summary.txt");
  {
    auto os = open_output(dir / "config_echo.cfg");
    os << serialize_config(cfg);
  }
  if (!quiet) {
    out << "rounds: " << res.log.rounds << ", terminated: "
        << (res.log.terminated ? "yes" : "no");
    if (res.metrics.k_f_reached) out << ", k_f = " << res.metrics.k_f;
    out << ", Nx = " << format_double(res.metrics.nx_avg)
        << ", Ny = " << format_double(res.metrics.ny_avg) << '\n';
    out << "outputs in " << dir.string() << '\n';
  }
  return res;
}

struct Table1Cell {
  Schedule tau = Schedule::zero(ScheduleRole::XThreshold);
  Schedule zeta = Schedule::zero(ScheduleRole::YThreshold);
  double nx_mean = 0.0;
  double ny_mean = 0.0;
  double kf_mean = 0.0;
  int trials = 0;
  int capped = 0;  // trials that never reached the termination threshold
  std::vector<double> nx, ny, kf;
};

struct Table1Result {
  std::vector<Table1Cell> cells;
};

/// table1 subcommand: for each (tau, zeta) grid cell, mean trigger counts and
/// termination time over independent trials. Cells share per-trial instances.
inline Table1Result run_table1(const ExperimentConfig& base,
                               const RunOverrides& ov) {
  ExperimentConfig cfg = apply_overrides(base, ov);
  detail::require(!cfg.table1.tau_grid.empty() && !cfg.table1.zeta_grid.empty(),
                  "table1 needs tau_grid and zeta_grid");
  detail::require(cfg.run.termination.has_value(),
                  "table1 needs a termination threshold");
  Table1Result result;
  for (const Schedule& tau : cfg.table1.tau_grid) {
    for (const Schedule& zeta : cfg.table1.zeta_grid) {
      Table1Cell cell;
      cell.tau = tau;
      cell.zeta = zeta;
      cell.trials = cfg.run.trials;
      for (int trial = 0; trial < cfg.run.trials; ++trial) {
        LogOptions lo;
        lo.keep_stats = false;
        RunResult r = run_trial(cfg, trial, tau, zeta, cfg.run.cap, true, lo);
        bool reached = r.log.terminated;
        long kf = reached ? r.log.termination_round : cfg.run.cap;
        if (!reached) ++cell.capped;
        cell.nx.push_back(r.log.avg_x_triggers());
        cell.ny.push_back(r.log.avg_y_triggers());
        cell.kf.push_back(static_cast<double>(kf));
      }
      cell.nx_mean = sorted_mean(cell.nx);
      cell.ny_mean = sorted_mean(cell.ny);
      cell.kf_mean = sorted_mean(cell.kf);
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

inline void write_table1_csv(const Table1Result& res,
                             const std::filesystem::path& path) {
  auto os = open_output(path);
  os << "tau,zeta,Nx_mean,Ny_mean,kf_mean,trials\n";
  for (const Table1Cell& c : res.cells)
    os << c.tau.to_string() << ',' << c.zeta.to_string() << ','
       << format_double(c.nx_mean) << ',' << format_double(c.ny_mean) << ','
       << format_double(c.kf_mean) << ',' << c.trials << '\n';
}

struct CurveResult {
  std::string name;
  MetricsSeries metrics;
};

/// curves subcommand: one fixed-horizon run per schedule variant with the
/// R_f / R_c series, aligned rounds across variants.
inline std::vector<CurveResult> run_curves(const ExperimentConfig& base,
                                           const RunOverrides& ov) {
  ExperimentConfig cfg = apply_overrides(base, ov);
  detail::require(!cfg.curves.empty(), "curves needs at least one variant");
  std::vector<CurveResult> out;
  for (const CurveVariant& v : cfg.curves) {
    LogOptions lo;
    lo.compute_rc = true;
    lo.compute_rf = true;
    RunResult r = run_trial(cfg, 0, v.tau, v.zeta, cfg.run.horizon, false, lo);
    out.push_back({v.name, std::move(r.metrics)});
  }
  return out;
}

inline void write_curves_csv(const std::vector<CurveResult>& curves,
                             const std::filesystem::path& dir) {
  for (const CurveResult& c : curves)
    write_metrics_csv(c.metrics, dir / ("curves_" + c.name + ".csv"));
}

struct CheckLine {
  std::string name;
  bool is_invariant = false;  // invariant failures are bugs; assumptions may
                              // be violated by design
  bool ok = false;
  std::string detail_text;
};

struct CheckReport {
  std::vector<CheckLine> lines;
  bool invariants_ok = true;
};

/// check subcommand: assumption verdicts for the configured schedules, the
/// declared-B connectivity check, and a fast invariant suite on a short run.
inline CheckReport run_check(const ExperimentConfig& cfg) {
  CheckReport rep;
  auto add = [&rep](std::string name, bool is_inv, bool ok, std::string det) {
    rep.lines.push_back({std::move(name), is_inv, ok, std::move(det)});
    if (is_inv && !ok) rep.invariants_ok = false;
  };

  for (const Schedule* s :
       {&cfg.schedules.alpha, &cfg.schedules.tau, &cfg.schedules.zeta}) {
    AssumptionVerdict v = satisfies_assumption(*s);
    add(std::string("assumption ") + role_name(s->role()) + " (" +
            s->to_string() + ")",
        false, v.ok, v.ok ? v.label : v.label + ": " + v.reason);
  }

  long check_horizon = std::max<long>(10L * cfg.graph.window_b, 50);
  GraphSequence graph = build_graph(cfg.problem, cfg.graph, check_horizon);
  bool usc =
      is_uniformly_strongly_connected(graph, cfg.graph.window_b, check_horizon);
  add("graph uniformly strongly connected (B = " +
          std::to_string(cfg.graph.window_b) + ", horizon " +
          std::to_string(check_horizon) + ")",
      true, usc, usc ? "yes" : "no");

  // Fast invariant suite on a short run of the configured problem.
  const long short_rounds = 200;
  LogOptions lo;
  lo.compute_rc = false;
  RunResult r = run_trial(cfg, 0, cfg.schedules.tau, cfg.schedules.zeta,
                          short_rounds, false, lo);
  add("invariant x-mass identity", true, r.log.max_x_mass_resid <= 1e-9,
      "max residual " + format_double(r.log.max_x_mass_resid));
  add("invariant y-mass identity", true, r.log.max_y_mass_resid <= 1e-9,
      "max residual " + format_double(r.log.max_y_mass_resid));
  add("invariant trigger-hold", true,
      r.log.max_x_gap_excess <= 0.0 && r.log.max_y_gap_excess <= 0.0,
      "max excess " +
          format_double(std::max(r.log.max_x_gap_excess,
                                 r.log.max_y_gap_excess)));
  add("invariant y-positivity", true, r.log.min_y_overall > 0.0,
      "min y " + format_double(r.log.min_y_overall));

  // Zero-threshold reduction against the straight-line baseline.
  {
    const long rounds = 100;
    ExperimentConfig zcfg = cfg;
    LogOptions zlo;
    zlo.state_stride = 1;
    RunResult zr =
        run_trial(zcfg, 0, Schedule::zero(ScheduleRole::XThreshold),
                  Schedule::zero(ScheduleRole::YThreshold), rounds, false, zlo);
    VanillaTrajectory ref = run_vanilla_gradient_push(
        build_graph(cfg.problem, cfg.graph, rounds), cfg.schedules.alpha,
        zr.instance, zr.log.x0, rounds, true);
    double dev = 0.0;
    for (const StateSnapshot& s : zr.log.states) {
      const Mat& xr = ref.x_history[static_cast<std::size_t>(s.t)];
      const Vec& yr = ref.y_history[static_cast<std::size_t>(s.t)];
      dev = std::max(dev, (s.x - xr).cwiseAbs().maxCoeff());
      dev = std::max(dev, (s.y - yr).cwiseAbs().maxCoeff());
    }
    add("invariant zero-threshold reduction", true, dev <= 1e-10,
        "max deviation " + format_double(dev));
  }
  return rep;
}

inline void print_check_report(const CheckReport& rep, std::ostream& os) {
  for (const CheckLine& l : rep.lines) {
    os << (l.ok ? "PASS " : (l.is_invariant ? "FAIL " : "FLAG ")) << l.name
       << ": " << l.detail_text << '\n';
  }
  os << (rep.invariants_ok ? "all invariants hold"
                           : "invariant failure (bug)")
     << '\n';
}

}  // namespace etgp
