#pragma once

// The event-triggered gradient-push engine: synchronous rounds of column
// stochastic mixing, push-sum ratio, gradient step, dual trigger channels
// with broadcast bookkeeping, and the weighted running average z~.

#include "etgp/common.hpp"
#include "etgp/graph.hpp"
#include "etgp/objective.hpp"
#include "etgp/schedules.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace etgp {

struct LogOptions {
  bool keep_stats = true;      // retain the per-round stats rows
  bool record_theory = false;  // retain y / zhat / xbar / e histories
  long theory_horizon = std::numeric_limits<long>::max();
  long state_stride = 0;       // full state snapshots every N rounds (0 = off)
  bool compute_rc = false;     // max pairwise zhat distance per round
  bool compute_rf = false;     // cost error of z~ per round (needs optimum)
};

/// Per-round scalars; row k describes the completed round t = k + 1.
struct RoundStats {
  long t = 0;
  int x_triggers = 0;
  int y_triggers = 0;
  long x_messages = 0;
  long y_messages = 0;
  double theta_y_sum = 0.0;  // 1^T theta(t), theta = yhat - y post-trigger
  double min_y = 0.0;
  double max_x_gap = 0.0;    // max_i ||x_i - xhat_i|| post-trigger
  double max_y_gap = 0.0;
  double tau_t = 0.0;        // thresholds in force at this round
  double zeta_t = 0.0;
  double x_mass_resid = 0.0;  // relative residuals of the mass identities
  double y_mass_resid = 0.0;
  double r_d = std::numeric_limits<double>::quiet_NaN();
  double r_c = std::numeric_limits<double>::quiet_NaN();
  double r_f = std::numeric_limits<double>::quiet_NaN();
  double rf_max = std::numeric_limits<double>::quiet_NaN();  // max_i f(z~_i)-f*
};

/// Histories needed by the theoretical bound checks; entry k holds the
/// quantities indexed by the paper around round k + 1: y(k+1), zhat(k+1),
/// xbar(k) and the mixing residuals e_i(k+1), d_i(k).
struct TheoryRound {
  Vec y;
  Mat zhat;
  Vec xbar;
  Vec e_norms;
  Vec d_row;
};

struct StateSnapshot {
  long t = 0;
  Mat x, xhat, zhat, ztilde;
  Vec y, yhat;
  std::vector<std::uint8_t> x_trig, y_trig;
};

struct TrajectoryLog {
  int m = 0;
  int d = 0;
  long rounds = 0;
  bool terminated = false;
  long termination_round = -1;

  Mat x0;
  Vec y0;
  Mat ztilde0;
  double x0_mixed_l1 = 0.0;  // sum_i ||x_i(0)||

  double rd_denom = 0.0;  // sum_i ||zhat_i(0) - x*||
  bool rd_degenerate = false;
  double initial_rd = 0.0, initial_rc = 0.0, initial_rf = 0.0;
  double initial_rf_max = 0.0;

  std::vector<RoundStats> stats;
  std::vector<TheoryRound> theory;
  std::vector<StateSnapshot> states;

  std::vector<long> x_trigger_total, y_trigger_total;  // per agent
  long x_messages_total = 0, y_messages_total = 0;

  double min_y_overall = 1.0;  // delta-hat, over all agents and rounds
  double max_x_mass_resid = 0.0, max_y_mass_resid = 0.0;
  double max_x_gap_excess = 0.0;  // max of (post-trigger gap - threshold)
  double max_y_gap_excess = 0.0;
  double max_grad_norm = 0.0;     // over all evaluated gradients
  double max_zhat_dist = 0.0;     // max_i,t ||zhat_i(t) - x*||

  double avg_x_triggers() const {
    long s = 0;
    for (long v : x_trigger_total) s += v;
    return m > 0 ? static_cast<double>(s) / m : 0.0;
  }
  double avg_y_triggers() const {
    long s = 0;
    for (long v : y_trigger_total) s += v;
    return m > 0 ? static_cast<double>(s) / m : 0.0;
  }
};

template <class Obj>
  requires LocalObjective<Obj>
struct SimConfig {
  GraphSequence graph;
  Schedule alpha;
  Schedule tau;
  Schedule zeta;
  Obj objective;
  long horizon = 0;
  std::uint64_t seed = 1;  // initial states x_i(0) ~ N(0, I)

  std::optional<double> termination_rd;  // stop when R_d drops below this
  std::optional<Vec> optimum_x;
  std::optional<double> optimum_f;
  std::optional<Mat> initial_states;   // overrides the Gaussian draw
  std::optional<Mat> initial_ztilde;   // defaults to x(0)
  std::optional<double> gradient_clip;
  LogOptions log;
};

template <class Obj>
  requires LocalObjective<Obj>
class Engine {
 public:
  explicit Engine(SimConfig<Obj> cfg) : cfg_(std::move(cfg)) {
    m_ = cfg_.objective.agents();
    d_ = cfg_.objective.dim();
    detail::require(cfg_.graph.size() == m_,
                    "graph node count does not match the objective");
    detail::require(cfg_.horizon >= 0, "horizon must be nonnegative");
    if (cfg_.termination_rd)
      detail::require(cfg_.optimum_x.has_value(),
                      "termination on R_d needs the optimum");
    if (cfg_.log.compute_rf)
      detail::require(cfg_.optimum_f.has_value(), "R_f needs the optimal value");

    if (cfg_.initial_states) {
      detail::require(cfg_.initial_states->rows() == m_ &&
                          cfg_.initial_states->cols() == d_,
                      "initial state dimensions mismatch");
      x_ = *cfg_.initial_states;
    } else {
      x_.resize(m_, d_);
      std::mt19937_64 rng(cfg_.seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (int i = 0; i < m_; ++i)
        for (int r = 0; r < d_; ++r) x_(i, r) = gauss(rng);
    }
    xhat_ = x_;
    y_ = Vec::Ones(m_);
    yhat_ = y_;  // Algorithm 1 leaves yhat(0) implicit; theta(0) = 0 wants 1
    zhat_ = x_;  // de-biased estimate at t = 0: x/1
    ztilde_ = cfg_.initial_ztilde ? *cfg_.initial_ztilde : x_;
    detail::require(ztilde_.rows() == m_ && ztilde_.cols() == d_,
                    "initial ztilde dimensions mismatch");

    what_.resize(m_, d_);
    grad_.resize(m_, d_);
    ynew_.resize(m_);
    zbuf_.resize(d_);
    gbuf_.resize(d_);
    gaps_.resize(static_cast<std::size_t>(m_));

    h_cur_ = 1.0 + cfg_.tau.value(0);  // H(0)
    s_cur_ = 0.0;                      // S(0)

    log_.m = m_;
    log_.d = d_;
    log_.x0 = x_;
    log_.y0 = y_;
    log_.ztilde0 = ztilde_;
    log_.x0_mixed_l1 = mixed_l1_norm(x_);
    log_.x_trigger_total.assign(static_cast<std::size_t>(m_), 0);
    log_.y_trigger_total.assign(static_cast<std::size_t>(m_), 0);
    log_.min_y_overall = 1.0;

    if (cfg_.optimum_x) {
      log_.rd_denom = 0.0;
      for (int i = 0; i < m_; ++i)
        log_.rd_denom += (zhat_.row(i).transpose() - *cfg_.optimum_x).norm();
      log_.rd_degenerate = log_.rd_denom == 0.0;
      log_.initial_rd = log_.rd_degenerate ? 0.0 : 1.0;
      log_.max_zhat_dist = max_dist_to_optimum();
    }
    if (cfg_.log.compute_rc) log_.initial_rc = max_pairwise();
    if (cfg_.log.compute_rf) {
      auto [sum, mx] = rf_now();
      log_.initial_rf = sum;
      log_.initial_rf_max = mx;
    }
    if (cfg_.log.state_stride > 0) push_state_snapshot({}, {});

    if (cfg_.termination_rd && log_.initial_rd < *cfg_.termination_rd) {
      log_.terminated = true;
      log_.termination_round = 0;
    }
  }

  long round() const { return round_; }
  bool finished() const { return log_.terminated || round_ >= cfg_.horizon; }
  const TrajectoryLog& log() const& { return log_; }
  TrajectoryLog release_log() && { return std::move(log_); }

  void run() {
    while (!finished()) step();
  }

  /// Advances one synchronous round t -> t+1: mix the latest broadcast
  /// states, form the push-sum ratio, take the gradient step, then run both
  /// trigger channels and the z~ update.
  void step() {
    detail::require(!finished(), "step() called on a finished engine");
    const long t = round_;
    const RoundGraph& g = round_graph(t);
    const RoundGraph& g_next = round_graph(t + 1);
    const bool theory_now =
        cfg_.log.record_theory && t + 1 <= cfg_.log.theory_horizon;

    what_.noalias() = g.a * xhat_;
    if (theory_now) wtrue_.noalias() = g.a * x_;
    ynew_.noalias() = g.a * yhat_;
    for (int i = 0; i < m_; ++i)
      if (!(ynew_[i] > 1e-300))
        throw Error("push-sum weight y_" + std::to_string(i + 1) +
                    " collapsed to " + format_double(ynew_[i]) + " at round " +
                    std::to_string(t + 1));
    zhat_.noalias() = ynew_.cwiseInverse().asDiagonal() * what_;

    const double alpha_next = cfg_.alpha.value(t + 1);
    for (int i = 0; i < m_; ++i) {
      zbuf_ = zhat_.row(i);
      cfg_.objective.gradient_into(i, zbuf_, gbuf_);
      if (cfg_.gradient_clip) {
        double n = gbuf_.norm();
        if (n > *cfg_.gradient_clip) gbuf_ *= *cfg_.gradient_clip / n;
      }
      log_.max_grad_norm = std::max(log_.max_grad_norm, gbuf_.norm());
      grad_.row(i) = gbuf_;
    }

    // Captured before x and xhat change: mass-identity reference values.
    const double xcolsum_prev_norm = x_.colwise().sum().norm();
    Eigen::RowVectorXd xhat_colsum = xhat_.colwise().sum();
    const double yhat_sum_prev = yhat_.sum();
    Vec xbar_prev;
    if (theory_now) xbar_prev = x_.colwise().mean().transpose();

    x_ = what_ - alpha_next * grad_;

    RoundStats row;
    row.t = t + 1;
    row.tau_t = cfg_.tau.value(t + 1);
    row.zeta_t = cfg_.zeta.value(t + 1);

    // x-channel trigger: fires at >= threshold (equality fires).
    for (int i = 0; i < m_; ++i) {
      double gap = (x_.row(i) - xhat_.row(i)).norm();
      if (gap >= row.tau_t) {
        xhat_.row(i) = x_.row(i);
        ++log_.x_trigger_total[static_cast<std::size_t>(i)];
        ++row.x_triggers;
        row.x_messages += g_next.snap->out_degree(i) - 1;
        gaps_[static_cast<std::size_t>(i)] = 1;
        gap = 0.0;
      } else {
        gaps_[static_cast<std::size_t>(i)] = 0;
      }
      row.max_x_gap = std::max(row.max_x_gap, gap);
      if (gap > row.tau_t || (gap == row.tau_t && row.tau_t > 0.0))
        log_.max_x_gap_excess =
            std::max(log_.max_x_gap_excess, gap - row.tau_t);
    }
    // y-channel trigger, symmetric with threshold zeta(t+1).
    std::vector<std::uint8_t> ytrigs;
    if (cfg_.log.state_stride > 0)
      ytrigs.assign(static_cast<std::size_t>(m_), 0);
    for (int i = 0; i < m_; ++i) {
      double gap = std::abs(ynew_[i] - yhat_[i]);
      if (gap >= row.zeta_t) {
        yhat_[i] = ynew_[i];
        ++log_.y_trigger_total[static_cast<std::size_t>(i)];
        ++row.y_triggers;
        row.y_messages += g_next.snap->out_degree(i) - 1;
        if (!ytrigs.empty()) ytrigs[static_cast<std::size_t>(i)] = 1;
        gap = 0.0;
      }
      row.max_y_gap = std::max(row.max_y_gap, gap);
      if (gap > row.zeta_t || (gap == row.zeta_t && row.zeta_t > 0.0))
        log_.max_y_gap_excess =
            std::max(log_.max_y_gap_excess, gap - row.zeta_t);
    }
    y_ = ynew_;
    log_.x_messages_total += row.x_messages;
    log_.y_messages_total += row.y_messages;

    row.theta_y_sum = yhat_.sum() - y_.sum();
    row.min_y = y_.minCoeff();
    log_.min_y_overall = std::min(log_.min_y_overall, row.min_y);

    // Mass identities: 1^T y(t+1) = 1^T yhat(t) and
    // 1^T x(t+1) = 1^T xhat(t) - alpha(t+1) 1^T grad.
    row.y_mass_resid = std::abs(y_.sum() - yhat_sum_prev) / m_;
    Eigen::RowVectorXd predicted =
        xhat_colsum - alpha_next * grad_.colwise().sum();
    row.x_mass_resid = (x_.colwise().sum() - predicted).norm() /
                       (1.0 + xcolsum_prev_norm);
    log_.max_x_mass_resid = std::max(log_.max_x_mass_resid, row.x_mass_resid);
    log_.max_y_mass_resid = std::max(log_.max_y_mass_resid, row.y_mass_resid);

    // z~(t+1) = (alpha(t+1)/H(t) zhat(t+1) + S(t) z~(t)) / S(t+1).
    const double s_next = s_cur_ + alpha_next / h_cur_;
    ztilde_ = ((alpha_next / h_cur_) * zhat_ + s_cur_ * ztilde_) / s_next;
    s_cur_ = s_next;
    h_cur_ *= 1.0 + cfg_.tau.value(t + 1);

    if (cfg_.optimum_x) {
      double num = 0.0, mx = 0.0;
      for (int i = 0; i < m_; ++i) {
        double dist = (zhat_.row(i).transpose() - *cfg_.optimum_x).norm();
        num += dist;
        mx = std::max(mx, dist);
      }
      log_.max_zhat_dist = std::max(log_.max_zhat_dist, mx);
      row.r_d = log_.rd_degenerate ? 0.0 : num / log_.rd_denom;
    }
    if (cfg_.log.compute_rc) row.r_c = max_pairwise();
    if (cfg_.log.compute_rf) {
      auto [sum, mx] = rf_now();
      row.r_f = sum;
      row.rf_max = mx;
    }

    if (theory_now) {
      TheoryRound tr;
      tr.y = y_;
      tr.zhat = zhat_;
      tr.xbar = std::move(xbar_prev);
      tr.e_norms.resize(m_);
      for (int i = 0; i < m_; ++i)
        tr.e_norms[i] = (what_.row(i) - wtrue_.row(i)).norm();
      tr.d_row = g.row_sums;
      log_.theory.push_back(std::move(tr));
    }

    ++round_;
    log_.rounds = round_;
    if (cfg_.log.state_stride > 0 && round_ % cfg_.log.state_stride == 0)
      push_state_snapshot(gaps_, ytrigs);

    if (cfg_.termination_rd && row.r_d < *cfg_.termination_rd) {
      log_.terminated = true;
      log_.termination_round = round_;
    }
    if (cfg_.log.keep_stats) log_.stats.push_back(row);
  }

 private:
  struct RoundGraph {
    std::shared_ptr<const DirectedGraphSnapshot> snap;
    Mat a;
    Vec row_sums;
  };

  const RoundGraph& round_graph(long t) {
    switch (cfg_.graph.kind()) {
      case GraphSequence::Kind::Static: {
        if (static_cache_.empty()) static_cache_.push_back(build_round_graph(0));
        return static_cache_.front();
      }
      case GraphSequence::Kind::Cyclic: {
        long period = cfg_.graph.period();
        if (static_cache_.empty())
          for (long p = 0; p < period; ++p)
            static_cache_.push_back(build_round_graph(p));
        return static_cache_[static_cast<std::size_t>(t % period)];
      }
      case GraphSequence::Kind::Random: {
        for (auto& slot : random_cache_)
          if (slot.first == t) return slot.second;
        auto& slot = random_cache_[static_cast<std::size_t>(t % 2)];
        slot.first = t;
        slot.second = build_round_graph(t);
        return slot.second;
      }
    }
    throw Error("unreachable graph kind");
  }

  RoundGraph build_round_graph(long t) const {
    RoundGraph g;
    g.snap = std::make_shared<DirectedGraphSnapshot>(cfg_.graph.snapshot(t));
    g.a = mixing_matrix(*g.snap);
    g.row_sums = g.a.rowwise().sum();
    return g;
  }

  double max_pairwise() const {
    double mx = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int j = i + 1; j < m_; ++j)
        mx = std::max(mx, (zhat_.row(i) - zhat_.row(j)).norm());
    return mx;
  }

  double max_dist_to_optimum() const {
    double mx = 0.0;
    for (int i = 0; i < m_; ++i)
      mx = std::max(mx, (zhat_.row(i).transpose() - *cfg_.optimum_x).norm());
    return mx;
  }

  std::pair<double, double> rf_now() const {
    double sum = 0.0, mx = 0.0;
    Vec zi(d_);
    for (int i = 0; i < m_; ++i) {
      zi = ztilde_.row(i);
      double gap = cfg_.objective.total_value(zi) - *cfg_.optimum_f;
      sum += gap;
      mx = std::max(mx, gap);
    }
    return {sum, mx};
  }

  void push_state_snapshot(const std::vector<std::uint8_t>& xtrigs,
                           const std::vector<std::uint8_t>& ytrigs) {
    StateSnapshot s;
    s.t = round_;
    s.x = x_;
    s.xhat = xhat_;
    s.zhat = zhat_;
    s.ztilde = ztilde_;
    s.y = y_;
    s.yhat = yhat_;
    s.x_trig = xtrigs.empty() ? std::vector<std::uint8_t>(
                                    static_cast<std::size_t>(m_), 0)
                              : xtrigs;
    s.y_trig = ytrigs.empty() ? std::vector<std::uint8_t>(
                                    static_cast<std::size_t>(m_), 0)
                              : ytrigs;
    log_.states.push_back(std::move(s));
  }

  SimConfig<Obj> cfg_;
  int m_ = 0, d_ = 0;
  long round_ = 0;

  Mat x_, xhat_, zhat_, ztilde_, what_, wtrue_, grad_;
  Vec y_, yhat_, ynew_, zbuf_, gbuf_;
  std::vector<std::uint8_t> gaps_;  // per-agent x-trigger flags this round

  double h_cur_ = 1.0;  // H(t) for the current round t
  double s_cur_ = 0.0;  // S(t)

  std::vector<RoundGraph> static_cache_;
  std::array<std::pair<long, RoundGraph>, 2> random_cache_{
      std::pair<long, RoundGraph>{-1, {}}, std::pair<long, RoundGraph>{-1, {}}};

  TrajectoryLog log_;
};

template <class Obj>
  requires LocalObjective<Obj>
TrajectoryLog simulate(SimConfig<Obj> cfg) {
  Engine<Obj> engine(std::move(cfg));
  engine.run();
  return std::move(engine).release_log();
}

}  // namespace etgp
