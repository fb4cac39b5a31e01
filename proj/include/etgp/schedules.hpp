#pragma once

// Closed-form stepsize and trigger-threshold sequences: evaluation, decay /
// summability predicates, partial sums with certified tail enclosures, and
// the averaging weights H(t), S(t) used by the weighted running average.

#include "etgp/common.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace etgp {

enum class ScheduleFamily { PowerLaw, Constant, Zero };
enum class ScheduleRole { Stepsize, XThreshold, YThreshold };

inline const char* role_name(ScheduleRole r) {
  switch (r) {
    case ScheduleRole::Stepsize: return "alpha";
    case ScheduleRole::XThreshold: return "tau";
    case ScheduleRole::YThreshold: return "zeta";
  }
  return "?";
}

/// Nonnegative, monotonically non-increasing sequence given in closed form.
/// Values are defined for t >= 1; by convention value(0) == value(1), which
/// keeps products over k = 0..t and bounds referencing index 0 finite.
class Schedule {
 public:
  static Schedule power(double c, double p, ScheduleRole role) {
    detail::require(c > 0.0, "power-law schedule needs c > 0");
    detail::require(p >= 0.0, "power-law schedule needs p >= 0");
    return Schedule(ScheduleFamily::PowerLaw, c, p, role);
  }
  static Schedule constant(double c, ScheduleRole role) {
    detail::require(c >= 0.0, "constant schedule needs c >= 0");
    if (c == 0.0) return zero(role);
    return Schedule(ScheduleFamily::Constant, c, 0.0, role);
  }
  static Schedule zero(ScheduleRole role) {
    return Schedule(ScheduleFamily::Zero, 0.0, 0.0, role);
  }

  double value(long t) const {
    switch (family_) {
      case ScheduleFamily::Zero: return 0.0;
      case ScheduleFamily::Constant: return c_;
      case ScheduleFamily::PowerLaw:
        if (t <= 1) return c_;
        return c_ * std::pow(static_cast<double>(t), -p_);
    }
    return 0.0;
  }

  ScheduleFamily family() const { return family_; }
  double coefficient() const { return c_; }
  double exponent() const { return p_; }
  ScheduleRole role() const { return role_; }

  Schedule with_role(ScheduleRole role) const {
    Schedule s = *this;
    s.role_ = role;
    return s;
  }

  bool operator==(const Schedule& o) const {
    return family_ == o.family_ && c_ == o.c_ && p_ == o.p_ && role_ == o.role_;
  }

  std::string to_string() const {
    switch (family_) {
      case ScheduleFamily::Zero: return "zero";
      case ScheduleFamily::Constant: return "const " + format_double(c_);
      case ScheduleFamily::PowerLaw:
        return "power " + format_double(c_) + " " + format_double(p_);
    }
    return "zero";
  }

 private:
  Schedule(ScheduleFamily f, double c, double p, ScheduleRole r)
      : family_(f), c_(c), p_(p), role_(r) {}

  ScheduleFamily family_;
  double c_;
  double p_;
  ScheduleRole role_;
};

/// Two-sided enclosure of an infinite series total.
struct Enclosure {
  double lo = 0.0;
  double hi = 0.0;
  bool finite = true;

  bool contains(double v) const { return finite && lo <= v && v <= hi; }
};

namespace detail {

// Enclosure of sum_{t>=1} c / t^q via partial summation (descending order,
// compensated) plus the integral-test tail bracket. Terms are summed up to
// n_cert before switching to the tail bound.
inline Enclosure power_sum_enclosure(double c, double q, long n_cert = 1000000) {
  Enclosure e;
  if (q <= 1.0) {
    e.finite = false;
    e.lo = e.hi = std::numeric_limits<double>::infinity();
    return e;
  }
  KahanSum acc;
  for (long t = n_cert; t >= 1; --t) acc.add(c * std::pow(static_cast<double>(t), -q));
  double n = static_cast<double>(n_cert);
  double tail_lo = c * std::pow(n + 1.0, 1.0 - q) / (q - 1.0);
  double tail_hi = c * std::pow(n, 1.0 - q) / (q - 1.0);
  double slack = std::abs(acc.sum) * 1e-13;  // float-accumulation margin
  e.lo = acc.sum + tail_lo - slack;
  e.hi = acc.sum + tail_hi + slack;
  return e;
}

}  // namespace detail

/// Certified enclosure of sum_{t>=1} value(t).
inline Enclosure sum_enclosure(const Schedule& s) {
  switch (s.family()) {
    case ScheduleFamily::Zero: return {0.0, 0.0, true};
    case ScheduleFamily::Constant:
      return {std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), false};
    case ScheduleFamily::PowerLaw:
      return detail::power_sum_enclosure(s.coefficient(), s.exponent());
  }
  return {0.0, 0.0, true};
}

/// Certified enclosure of sum_{t>=1} t^{3/2} value(t).
inline Enclosure weighted32_enclosure(const Schedule& s) {
  switch (s.family()) {
    case ScheduleFamily::Zero: return {0.0, 0.0, true};
    case ScheduleFamily::Constant:
      return {std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), false};
    case ScheduleFamily::PowerLaw:
      return detail::power_sum_enclosure(s.coefficient(), s.exponent() - 1.5);
  }
  return {0.0, 0.0, true};
}

struct AssumptionVerdict {
  bool ok = false;
  std::string label;   // "stepsize-ok" | "tau-ok" | "zeta-ok" | "violated"
  std::string reason;  // non-empty when violated
};

/// Checks the schedule against the decay/summability assumption matching its
/// role. Power-law stepsizes pass iff 1/2 < p <= 1, x-thresholds iff p > 1,
/// y-thresholds iff p > 5/2 and the certified total sum is below 1. Positive
/// constants violate all three.
inline AssumptionVerdict satisfies_assumption(const Schedule& s) {
  auto violated = [](const std::string& why) {
    return AssumptionVerdict{false, "violated", why};
  };
  switch (s.role()) {
    case ScheduleRole::Stepsize: {
      if (s.family() == ScheduleFamily::Zero)
        return violated("sum of stepsizes is 0, not infinite");
      if (s.family() == ScheduleFamily::Constant)
        return violated("constant stepsize has non-summable squares");
      double p = s.exponent();
      if (p <= 0.5) return violated("p <= 1/2: sum of squared stepsizes diverges");
      if (p > 1.0) return violated("p > 1: sum of stepsizes converges");
      return {true, "stepsize-ok", ""};
    }
    case ScheduleRole::XThreshold: {
      if (s.family() == ScheduleFamily::Zero) return {true, "tau-ok", ""};
      if (s.family() == ScheduleFamily::Constant)
        return violated("constant threshold is not summable");
      if (s.exponent() <= 1.0) return violated("p <= 1: sum of thresholds diverges");
      return {true, "tau-ok", ""};
    }
    case ScheduleRole::YThreshold: {
      if (s.family() == ScheduleFamily::Zero) return {true, "zeta-ok", ""};
      if (s.family() == ScheduleFamily::Constant)
        return violated("constant threshold is not summable");
      if (s.exponent() <= 2.5)
        return violated("p <= 5/2: t^{3/2}-weighted sum diverges");
      Enclosure total = sum_enclosure(s);
      if (!(total.finite && total.hi < 1.0))
        return violated("certified total sum is not below 1 (upper bound " +
                        format_double(total.hi) + ")");
      return {true, "zeta-ok", ""};
    }
  }
  return violated("unknown role");
}

/// Running sums of value(t), value(t)^2 and t^{3/2} value(t) for t = 1..T,
/// together with certified totals of the infinite series.
struct PartialSums {
  std::vector<double> sum;      // sum[t] = sum_{k=1}^{t}
  std::vector<double> sum_sq;
  std::vector<double> sum_w32;
  Enclosure total;              // sum_{t>=1} value(t)
  Enclosure total_w32;          // sum_{t>=1} t^{3/2} value(t)

  double at(long t) const { return sum[static_cast<std::size_t>(t)]; }
  double sq_at(long t) const { return sum_sq[static_cast<std::size_t>(t)]; }
  double w32_at(long t) const { return sum_w32[static_cast<std::size_t>(t)]; }
  long horizon() const { return static_cast<long>(sum.size()) - 1; }
};

inline PartialSums partial_sums(const Schedule& s, long T) {
  detail::require(T >= 1, "partial_sums needs T >= 1");
  PartialSums ps;
  std::size_t n = static_cast<std::size_t>(T) + 1;
  ps.sum.resize(n, 0.0);
  ps.sum_sq.resize(n, 0.0);
  ps.sum_w32.resize(n, 0.0);
  detail::KahanSum a, a2, a32;
  for (long t = 1; t <= T; ++t) {
    double v = s.value(t);
    a.add(v);
    a2.add(v * v);
    a32.add(std::pow(static_cast<double>(t), 1.5) * v);
    ps.sum[static_cast<std::size_t>(t)] = a.sum;
    ps.sum_sq[static_cast<std::size_t>(t)] = a2.sum;
    ps.sum_w32[static_cast<std::size_t>(t)] = a32.sum;
  }
  ps.total = sum_enclosure(s);
  ps.total_w32 = weighted32_enclosure(s);
  return ps;
}

/// Rescales a y-threshold so its total sum is certified below 1: returns
/// value(t) / (M + 1) with M the certified upper bound on the total. The
/// division is applied uniformly, also when the sum is already below 1.
inline Schedule normalize_zeta(const Schedule& s) {
  Enclosure w = weighted32_enclosure(s);
  detail::require(w.finite, "normalize_zeta: t^{3/2}-weighted sum diverges");
  if (s.family() == ScheduleFamily::Zero) return s;
  Enclosure total = sum_enclosure(s);
  detail::require(total.finite, "normalize_zeta: total sum diverges");
  return Schedule::power(s.coefficient() / (total.hi + 1.0), s.exponent(), s.role());
}

/// H(t) = prod_{k=0}^{t} (1 + tau(k)) with H(-1) = 1, and
/// S(t) = sum_{s=0}^{t-1} alpha(s+1)/H(s) with S(0) = 0.
/// Tabulated for H over t in [-1, T] and S over t in [0, T+1].
struct AveragingWeights {
  std::vector<double> h;  // h[i] = H(i - 1)
  std::vector<double> s;  // s[t] = S(t)

  double H(long t) const { return h[static_cast<std::size_t>(t + 1)]; }
  double S(long t) const { return s[static_cast<std::size_t>(t)]; }
  long horizon() const { return static_cast<long>(h.size()) - 2; }
};

inline AveragingWeights averaging_weights(const Schedule& tau,
                                          const Schedule& alpha, long T) {
  detail::require(T >= 0, "averaging_weights needs T >= 0");
  AveragingWeights w;
  w.h.resize(static_cast<std::size_t>(T) + 2);
  w.s.resize(static_cast<std::size_t>(T) + 2);
  w.h[0] = 1.0;  // H(-1)
  for (long t = 0; t <= T; ++t)
    w.h[static_cast<std::size_t>(t) + 1] =
        w.h[static_cast<std::size_t>(t)] * (1.0 + tau.value(t));
  w.s[0] = 0.0;
  for (long t = 1; t <= T + 1; ++t)
    w.s[static_cast<std::size_t>(t)] =
        w.s[static_cast<std::size_t>(t) - 1] +
        alpha.value(t) / w.h[static_cast<std::size_t>(t)];  // alpha(t)/H(t-1)
  return w;
}

/// sum_{t>=0} value(t) = value(1) + sum_{t>=1} value(t), upper bound.
/// This is the exponent of the e^{E_tau} factors, which multiply from t = 0.
inline double sum_from_zero_upper(const Schedule& s) {
  Enclosure total = sum_enclosure(s);
  detail::require(total.finite, "sum_from_zero_upper: series diverges");
  return s.value(0) + total.hi;
}

}  // namespace etgp
