#pragma once

// Experiment metrics (R_d, R_f, R_c, trigger counts, termination time) and
// the theoretical quantities computed from trajectory logs: m_zeta, B_zeta,
// delta-hat, the beta(t) decay envelope, the per-agent disagreement bound,
// and the O(log T / sqrt T) rate bound with empirical constants.

#include "etgp/common.hpp"
#include "etgp/core.hpp"
#include "etgp/graph.hpp"
#include "etgp/objective.hpp"
#include "etgp/schedules.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace etgp {

struct MetricsSeries {
  std::vector<double> r_d;  // index t = 0..rounds
  std::vector<double> r_f;
  std::vector<double> r_c;
  std::vector<double> rf_max;
  std::vector<double> nx_cum;  // cumulative triggers averaged over agents
  std::vector<double> ny_cum;
  bool r_d_available = false;
  bool r_f_available = false;
  bool r_c_available = false;
  bool rd_degenerate = false;
  double nx_avg = 0.0;
  double ny_avg = 0.0;
  long k_f = -1;
  bool k_f_reached = false;
  double termination_eps = 1e-2;
};

/// Assembles the metric time series from a log. k_f is the first round with
/// R_d below eps; unreachable within the log leaves k_f_reached false.
inline MetricsSeries compute_metrics(const TrajectoryLog& log,
                                     double termination_eps = 1e-2) {
  MetricsSeries ms;
  ms.termination_eps = termination_eps;
  ms.rd_degenerate = log.rd_degenerate;
  ms.nx_avg = log.avg_x_triggers();
  ms.ny_avg = log.avg_y_triggers();
  std::size_t n = log.stats.size();
  ms.r_d.reserve(n + 1);
  ms.r_f.reserve(n + 1);
  ms.r_c.reserve(n + 1);
  ms.rf_max.reserve(n + 1);
  ms.nx_cum.reserve(n + 1);
  ms.ny_cum.reserve(n + 1);
  ms.r_d.push_back(log.initial_rd);
  ms.r_f.push_back(log.initial_rf);
  ms.r_c.push_back(log.initial_rc);
  ms.rf_max.push_back(log.initial_rf_max);
  ms.nx_cum.push_back(0.0);
  ms.ny_cum.push_back(0.0);
  double nx = 0.0, ny = 0.0;
  ms.r_d_available = true;
  ms.r_f_available = true;
  ms.r_c_available = true;
  for (const RoundStats& row : log.stats) {
    if (std::isnan(row.r_d)) ms.r_d_available = false;
    if (std::isnan(row.r_f)) ms.r_f_available = false;
    if (std::isnan(row.r_c)) ms.r_c_available = false;
    ms.r_d.push_back(row.r_d);
    ms.r_f.push_back(row.r_f);
    ms.r_c.push_back(row.r_c);
    ms.rf_max.push_back(row.rf_max);
    nx += static_cast<double>(row.x_triggers) / log.m;
    ny += static_cast<double>(row.y_triggers) / log.m;
    ms.nx_cum.push_back(nx);
    ms.ny_cum.push_back(ny);
  }
  if (n == 0 && log.rounds > 0) ms.r_d_available = ms.r_f_available =
                                    ms.r_c_available = false;
  if (ms.r_d_available) {
    for (std::size_t t = 0; t < ms.r_d.size(); ++t) {
      if (ms.r_d[t] < termination_eps) {
        ms.k_f = static_cast<long>(t);
        ms.k_f_reached = true;
        break;
      }
    }
  }
  return ms;
}

/// m_zeta = m + sum_{s=1}^{T} 1^T theta(s) with enclosure half-width
/// m (F_zeta_upper - F_zeta(T)) from the certified tail of the threshold sum.
struct MzetaEstimate {
  double center = 0.0;
  double halfwidth = 0.0;
  double b_zeta = 1.0;  // center / m
};

inline MzetaEstimate compute_m_zeta(const TrajectoryLog& log,
                                    const Schedule& zeta, long T) {
  detail::require(T >= 1, "compute_m_zeta needs T >= 1");
  detail::require(static_cast<std::size_t>(T) <= log.stats.size(),
                  "compute_m_zeta: T exceeds the logged rounds");
  detail::KahanSum acc;
  for (long s = 1; s <= T; ++s)
    acc.add(log.stats[static_cast<std::size_t>(s - 1)].theta_y_sum);
  MzetaEstimate est;
  est.center = log.m + acc.sum;
  PartialSums fz = partial_sums(zeta, T);
  detail::require(fz.total.finite, "compute_m_zeta needs a summable zeta");
  est.halfwidth = log.m * std::max(0.0, fz.total.hi - fz.at(T));
  est.b_zeta = est.center / log.m;
  return est;
}

/// Pointwise decay envelope
///   beta(t) = m ((F - F(t)) + C0 l^t + C0 l^{t/2} F(t) + zeta(t/2+1)/(1-l)),
/// with the certified upper bound standing in for the full sum F. Also
/// carries t^{3/2} beta(t), whose decay to zero the y-threshold assumption
/// guarantees.
struct BetaEnvelope {
  std::vector<double> beta;      // index t = 0..T
  std::vector<double> weighted;  // t^{3/2} beta(t)
};

inline BetaEnvelope beta_envelope(const Schedule& zeta, long T, int m,
                                  double c0, double lambda) {
  detail::require(T >= 1, "beta_envelope needs T >= 1");
  detail::require(lambda > 0.0 && lambda < 1.0, "lambda must lie in (0,1)");
  PartialSums fz = partial_sums(zeta, T);
  detail::require(fz.total.finite, "beta_envelope needs a summable zeta");
  BetaEnvelope env;
  env.beta.resize(static_cast<std::size_t>(T) + 1);
  env.weighted.resize(static_cast<std::size_t>(T) + 1);
  for (long t = 0; t <= T; ++t) {
    double tail = std::max(0.0, fz.total.hi - fz.at(t));
    double lt = std::pow(lambda, static_cast<double>(t));
    double lt2 = std::pow(lambda, static_cast<double>(t) / 2.0);
    double b = m * (tail + c0 * lt + c0 * lt2 * fz.at(t) +
                    zeta.value(t / 2 + 1) / (1.0 - lambda));
    env.beta[static_cast<std::size_t>(t)] = b;
    env.weighted[static_cast<std::size_t>(t)] =
        std::pow(static_cast<double>(t), 1.5) * b;
  }
  return env;
}

/// Derived constants of a run, assembled once and reused by the bound checks.
/// delta-hat is the observed weight floor; D combines the sampled-ball
/// estimate with the gradients actually evaluated along the trajectory.
struct TheoryReport {
  MzetaEstimate m_zeta;
  double delta_hat = 0.0;
  double grad_bound = 0.0;
  Vec region_center;
  double region_radius = 0.0;
  double c0 = 1.0;
  double lambda = 0.5;
  double q = 0.0;
  int phi_depth_cap = 0;
  double e_tau_from0_upper = 0.0;  // exponent of the e^{E_tau} factors
};

inline TheoryReport build_theory_report(const TrajectoryLog& log,
                                        const PushSumDecay& decay,
                                        const GradientBound& bound,
                                        const Schedule& tau,
                                        const Schedule& zeta, long T) {
  TheoryReport rep;
  rep.m_zeta = compute_m_zeta(log, zeta, T);
  rep.delta_hat = log.min_y_overall;
  detail::require(rep.delta_hat > 0.0, "observed weight floor is not positive");
  rep.grad_bound = std::max(bound.d_max, 1.1 * log.max_grad_norm);
  rep.region_center = bound.center;
  rep.region_radius = bound.radius;
  rep.c0 = decay.c0;
  rep.lambda = decay.lambda;
  rep.q = decay.q;
  rep.phi_depth_cap = decay.depth_cap;
  rep.e_tau_from0_upper = sum_from_zero_upper(tau);
  return rep;
}

/// ||y(t+1) - m_zeta phi(t)||_inf against beta(t), with the phi-estimation
/// slack C0 lambda^{gap} m_zeta added to the envelope.
struct YConsensusCheck {
  std::vector<double> deviation;  // index t, covering rounds t+1
  std::vector<double> envelope;
  std::vector<double> slack;
  long violations = 0;
};

inline YConsensusCheck y_consensus_check(const TrajectoryLog& log,
                                         const PushSumDecay& decay,
                                         double m_zeta,
                                         const BetaEnvelope& env) {
  detail::require(!log.theory.empty(),
                  "y_consensus_check needs a theory-recording run");
  YConsensusCheck chk;
  std::size_t n = log.theory.size();
  detail::require(env.beta.size() >= n, "beta envelope shorter than the log");
  detail::require(decay.phi.size() >= n, "phi estimates shorter than the log");
  chk.deviation.resize(n);
  chk.envelope.resize(n);
  chk.slack.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const TheoryRound& tr = log.theory[t];
    chk.deviation[t] =
        (tr.y - m_zeta * decay.phi[t]).cwiseAbs().maxCoeff();
    chk.envelope[t] = env.beta[t];
    chk.slack[t] = decay.phi_slack(static_cast<long>(t)) * m_zeta;
    if (chk.deviation[t] > chk.envelope[t] + chk.slack[t]) ++chk.violations;
  }
  return chk;
}

/// Per-agent disagreement bound of the event-triggered push-sum analysis:
///   ||zhat_i(t+1) - B_zeta xbar(t)||
///     <= (1/d) [ (C0 l^t + K(t)) ||x(0)||_1
///                + m sum_{s<t} (C0 l^{t-s-1} + K(t)) (a(s+1) D + tau(s)) ]
///        + d_i(t) tau(t) / d,
/// with K(t) = beta(t)/m_zeta, plus the separate t = 0 bound
/// 2 C0 ||x(0)||_1 / d against ||zhat_i(1) - xbar(0)||.
struct DisagreementCheck {
  std::vector<double> measured;  // max over agents, index t starting at 1
  std::vector<double> bound;     // max over agents of the per-agent bound
  double t0_measured = 0.0;
  double t0_bound = 0.0;
  long violations = 0;
  // Summed cross-check: sum_t alpha(t+1) ||zhat_i(t+1) - B_zeta xbar(t)||
  // against the closed-form right hand side, reported not enforced.
  double weighted_sum_measured = 0.0;
  double weighted_sum_bound = 0.0;
};

inline DisagreementCheck disagreement_check(const TrajectoryLog& log,
                                            const TheoryReport& rep,
                                            const Schedule& alpha,
                                            const Schedule& tau,
                                            const BetaEnvelope& env) {
  detail::require(!log.theory.empty(),
                  "disagreement_check needs a theory-recording run");
  const std::size_t n = log.theory.size();
  detail::require(env.beta.size() >= n, "beta envelope shorter than the log");
  const double delta = rep.delta_hat;
  const double c0 = rep.c0;
  const double lambda = rep.lambda;
  const double dmax = rep.grad_bound;
  const double l1x0 = log.x0_mixed_l1;
  const double b_zeta = rep.m_zeta.b_zeta;

  DisagreementCheck chk;
  chk.measured.reserve(n);
  chk.bound.reserve(n);

  {
    const TheoryRound& tr = log.theory[0];
    double mx = 0.0;
    for (int i = 0; i < log.m; ++i)
      mx = std::max(mx, (tr.zhat.row(i).transpose() - tr.xbar).norm());
    chk.t0_measured = mx;
    chk.t0_bound = 2.0 * c0 * l1x0 / delta;
    if (chk.t0_measured > chk.t0_bound) ++chk.violations;
  }

  // geo(t) = sum_{s<t} l^{t-s-1} (a(s+1) D + tau(s)), accumulated as
  // geo(t) = l geo(t-1) + (a(t) D + tau(t-1)); plain(t) is the same sum
  // without the geometric weight.
  double geo = 0.0, plain = 0.0;
  double wsum_bound_j3 = 0.0;
  detail::KahanSum wsum_meas;
  for (std::size_t t = 1; t < n; ++t) {
    double drift = alpha.value(static_cast<long>(t)) * dmax +
                   tau.value(static_cast<long>(t) - 1);
    geo = lambda * geo + drift;
    plain += drift;
    const TheoryRound& tr = log.theory[t];
    double k_t = env.beta[t] / rep.m_zeta.center;
    double lt = c0 * std::pow(lambda, static_cast<double>(t));
    double common =
        (lt + k_t) * l1x0 + log.m * (c0 * geo + k_t * plain);
    double tau_t = tau.value(static_cast<long>(t));
    double meas_mx = 0.0, bound_mx = 0.0;
    for (int i = 0; i < log.m; ++i) {
      double meas =
          (tr.zhat.row(i).transpose() - b_zeta * tr.xbar).norm();
      double bnd = common / delta + tr.d_row[i] * tau_t / delta;
      if (meas > bnd) ++chk.violations;
      meas_mx = std::max(meas_mx, meas);
      bound_mx = std::max(bound_mx, bnd);
    }
    chk.measured.push_back(meas_mx);
    chk.bound.push_back(bound_mx);
    wsum_bound_j3 +=
        k_t * alpha.value(static_cast<long>(t) + 1) * (l1x0 + plain);
  }

  // Corollary-style summed cross-check for agent 1, reported not enforced:
  // sum_{t=0}^{T} alpha(t+1) ||zhat_1(t+1) - B_zeta xbar(t)|| against the
  // closed-form right hand side.
  long tt = static_cast<long>(n) - 1;
  if (tt >= 1) {
    for (std::size_t t = 0; t < n; ++t) {
      const TheoryRound& tr = log.theory[t];
      wsum_meas.add(alpha.value(static_cast<long>(t) + 1) *
                    (tr.zhat.row(0).transpose() - b_zeta * tr.xbar).norm());
    }
    PartialSums etau = partial_sums(tau, tt);
    chk.weighted_sum_measured = wsum_meas.sum;
    chk.weighted_sum_bound =
        c0 * l1x0 / (delta * (1.0 - lambda)) +
        4.0 * log.m * c0 * etau.at(tt) / (delta * (1.0 - lambda)) +
        c0 * log.m * dmax * (1.0 + std::log(static_cast<double>(tt))) /
            (delta * (1.0 - lambda)) +
        wsum_bound_j3 / delta;
  }
  return chk;
}

/// Rate bound of the weighted-average analysis for alpha(t) = 1/sqrt(t):
///   f(z~_i(T+1)) - f* <= m e^{E} / (2 sqrt(T+1)) J1
///                        + 3 m D e^{E} / (d sqrt(T+1)) (J2 + J3).
struct RateBound {
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double total = 0.0;
};

inline RateBound rate_bound(const TrajectoryLog& log, const TheoryReport& rep,
                            const Schedule& alpha, const Schedule& tau,
                            const Schedule& zeta, long T) {
  detail::require(alpha.family() == ScheduleFamily::PowerLaw &&
                      alpha.coefficient() == 1.0 && alpha.exponent() == 0.5,
                  "rate_bound applies to the stepsize 1/sqrt(t) only");
  detail::require(T >= 1, "rate_bound needs T >= 1");
  const double m = log.m;
  const double dmax = rep.grad_bound;
  const double delta = rep.delta_hat;
  const double c0 = rep.c0;
  const double lambda = rep.lambda;
  const double b_zeta = rep.m_zeta.b_zeta;
  const double l1x0 = log.x0_mixed_l1;
  detail::require(b_zeta > 0.0, "rate_bound needs B_zeta > 0");

  Vec xbar0 = log.x0.colwise().mean().transpose();
  double dist0 = (xbar0 - rep.region_center).squaredNorm();

  PartialSums etau = partial_sums(tau, T);
  BetaEnvelope env = beta_envelope(zeta, T, log.m, c0, lambda);

  RateBound rb;
  rb.j1 = dist0 / b_zeta +
          (2.0 * dmax * dmax * (1.0 + std::log(static_cast<double>(T + 1))) +
           2.0 * etau.sq_at(T) + etau.at(T)) *
              b_zeta;
  rb.j2 = c0 * l1x0 / (1.0 - lambda) +
          4.0 * m * c0 * etau.at(T) / (1.0 - lambda) +
          c0 * m * dmax * (1.0 + std::log(static_cast<double>(T))) /
              (1.0 - lambda);
  double plain = 0.0;
  detail::KahanSum j3;
  for (long t = 0; t <= T; ++t) {
    double k_t = env.beta[static_cast<std::size_t>(t)] / rep.m_zeta.center;
    j3.add(k_t * alpha.value(t + 1) * (l1x0 + plain));
    plain += alpha.value(t + 1) * dmax + tau.value(t);
  }
  rb.j3 = j3.sum;

  double e_tau = std::exp(rep.e_tau_from0_upper);
  double root = std::sqrt(static_cast<double>(T + 1));
  rb.total = m * e_tau / (2.0 * root) * rb.j1 +
             3.0 * m * dmax * e_tau / (delta * root) * (rb.j2 + rb.j3);
  return rb;
}

/// Reconstructed per-round mixing error against its threshold bound:
/// ||e_i(t+1)|| <= d_i(t) tau(t) per agent and sum_i <= m tau(t).
struct MixingErrorCheck {
  long violations = 0;
  long sum_violations = 0;
  double max_ratio = 0.0;  // max of ||e_i|| / (d_i tau) over positive bounds
};

inline MixingErrorCheck mixing_error_check(const TrajectoryLog& log,
                                           const Schedule& tau) {
  detail::require(!log.theory.empty(),
                  "mixing_error_check needs a theory-recording run");
  MixingErrorCheck chk;
  for (std::size_t t = 0; t < log.theory.size(); ++t) {
    const TheoryRound& tr = log.theory[t];
    double tau_t = tau.value(static_cast<long>(t));
    double sum = 0.0;
    for (int i = 0; i < log.m; ++i) {
      double bound = tr.d_row[i] * tau_t;
      if (tr.e_norms[i] > bound) ++chk.violations;
      if (bound > 0.0)
        chk.max_ratio = std::max(chk.max_ratio, tr.e_norms[i] / bound);
      sum += tr.e_norms[i];
    }
    if (sum > log.m * tau_t) ++chk.sum_violations;
  }
  return chk;
}

}  // namespace etgp
