#include "etgp/schedules.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace etgp;

namespace {
// Reference constants: Riemann zeta(3) (Apery) and zeta(3/2).
constexpr double kZeta3 = 1.2020569031595943;
constexpr double kZeta32 = 2.6123753486854883;
}  // namespace

TEST_CASE("closed-form evaluation") {
  auto a = Schedule::power(1.0, 0.52, ScheduleRole::Stepsize);
  CHECK(a.value(1) == 1.0);
  auto z = Schedule::power(1.0 / 3.0, 3.0, ScheduleRole::YThreshold);
  CHECK(z.value(2) == Catch::Approx(1.0 / 24.0).margin(1e-18));
  auto zero = Schedule::zero(ScheduleRole::XThreshold);
  for (long t : {1L, 5L, 1000L}) CHECK(zero.value(t) == 0.0);
  // Index-0 convention: value(0) == value(1).
  CHECK(a.value(0) == a.value(1));
  CHECK(z.value(0) == z.value(1));
  CHECK(Schedule::constant(0.05, ScheduleRole::XThreshold).value(0) == 0.05);
}

TEST_CASE("schedule construction rejects bad parameters") {
  CHECK_THROWS_AS(Schedule::power(0.0, 1.0, ScheduleRole::Stepsize), Error);
  CHECK_THROWS_AS(Schedule::power(-1.0, 1.0, ScheduleRole::Stepsize), Error);
  CHECK_THROWS_AS(Schedule::power(1.0, -0.1, ScheduleRole::Stepsize), Error);
  CHECK_THROWS_AS(Schedule::constant(-0.05, ScheduleRole::XThreshold), Error);
  // const 0 collapses to the zero family.
  CHECK(Schedule::constant(0.0, ScheduleRole::XThreshold).family() ==
        ScheduleFamily::Zero);
}

TEST_CASE("monotone non-increasing for every family") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uc(0.01, 5.0), up(0.0, 4.0);
  for (int rep = 0; rep < 50; ++rep) {
    auto s = Schedule::power(uc(rng), up(rng), ScheduleRole::XThreshold);
    for (long t = 1; t < 200; ++t) CHECK(s.value(t + 1) <= s.value(t));
  }
  auto c = Schedule::constant(0.05, ScheduleRole::YThreshold);
  for (long t = 1; t < 100; ++t) CHECK(c.value(t + 1) <= c.value(t));
}

TEST_CASE("assumption verdicts") {
  auto ok = [](const Schedule& s) { return satisfies_assumption(s); };
  CHECK(ok(Schedule::power(1, 0.52, ScheduleRole::Stepsize)).label ==
        "stepsize-ok");
  CHECK(ok(Schedule::power(1, 1.0, ScheduleRole::Stepsize)).ok);
  // 1/sqrt(t) sits on the boundary and fails the squared-sum condition.
  CHECK_FALSE(ok(Schedule::power(1, 0.5, ScheduleRole::Stepsize)).ok);
  CHECK_FALSE(ok(Schedule::power(1, 1.2, ScheduleRole::Stepsize)).ok);

  CHECK(ok(Schedule::power(1, 1.5, ScheduleRole::XThreshold)).label == "tau-ok");
  CHECK_FALSE(ok(Schedule::power(1, 0.75, ScheduleRole::XThreshold)).ok);
  CHECK(ok(Schedule::zero(ScheduleRole::XThreshold)).ok);

  CHECK(ok(Schedule::power(1.0 / 3, 3, ScheduleRole::YThreshold)).label ==
        "zeta-ok");
  CHECK_FALSE(ok(Schedule::power(1, 1.0, ScheduleRole::YThreshold)).ok);
  // p > 5/2 but total sum not certified below 1.
  CHECK_FALSE(ok(Schedule::power(1.0, 3, ScheduleRole::YThreshold)).ok);
  CHECK(ok(Schedule::zero(ScheduleRole::YThreshold)).ok);

  // Positive constants violate all three.
  for (auto role : {ScheduleRole::Stepsize, ScheduleRole::XThreshold,
                    ScheduleRole::YThreshold}) {
    auto v = ok(Schedule::constant(0.05, role));
    CHECK_FALSE(v.ok);
    CHECK(v.label == "violated");
    CHECK_FALSE(v.reason.empty());
  }
  CHECK_FALSE(ok(Schedule::zero(ScheduleRole::Stepsize)).ok);
}

TEST_CASE("partial sums with certified tails") {
  // F_zeta for 1/(3t^3) equals zeta(3)/3.
  auto z = Schedule::power(1.0 / 3, 3, ScheduleRole::YThreshold);
  Enclosure fz = sum_enclosure(z);
  CHECK(fz.finite);
  CHECK(fz.contains(kZeta3 / 3.0));
  CHECK(fz.lo >= 0.4006);
  CHECK(fz.hi <= 0.4008);

  // E_tau for 1/t^{1.5} equals zeta(3/2).
  auto tau = Schedule::power(1, 1.5, ScheduleRole::XThreshold);
  Enclosure et = sum_enclosure(tau);
  CHECK(et.contains(kZeta32));
  CHECK(et.lo >= 2.610);
  CHECK(et.hi <= 2.615);

  // Zero schedule: everything is exactly zero.
  PartialSums zs = partial_sums(Schedule::zero(ScheduleRole::XThreshold), 100);
  CHECK(zs.at(100) == 0.0);
  CHECK(zs.total.hi == 0.0);

  // Divergent series carry the infinite-total flag.
  CHECK_FALSE(sum_enclosure(Schedule::power(1, 1.0, ScheduleRole::XThreshold))
                  .finite);
  CHECK_FALSE(
      sum_enclosure(Schedule::constant(0.05, ScheduleRole::XThreshold)).finite);
  CHECK_FALSE(weighted32_enclosure(Schedule::power(1, 2.5,
                                                   ScheduleRole::YThreshold))
                  .finite);
  CHECK(weighted32_enclosure(z).finite);
}

TEST_CASE("partial sum consistency") {
  auto tau = Schedule::power(0.7, 1.5, ScheduleRole::XThreshold);
  PartialSums ps = partial_sums(tau, 500);
  for (long t = 1; t < 500; ++t) {
    double v = tau.value(t + 1);
    CHECK(ps.at(t + 1) - ps.at(t) == Catch::Approx(v).margin(1e-15));
    CHECK(ps.sq_at(t + 1) - ps.sq_at(t) == Catch::Approx(v * v).margin(1e-15));
    CHECK(ps.w32_at(t + 1) - ps.w32_at(t) ==
          Catch::Approx(std::pow(static_cast<double>(t + 1), 1.5) * v)
              .margin(1e-12));
    CHECK(ps.at(t + 1) >= ps.at(t));
  }
}

TEST_CASE("zeta normalization") {
  // 1/t^3 sums to zeta(3) > 1; the rescaled total is certified below 1.
  auto z = Schedule::power(1.0, 3, ScheduleRole::YThreshold);
  Schedule zn = normalize_zeta(z);
  Enclosure total = sum_enclosure(zn);
  CHECK(total.hi < 1.0);
  CHECK(total.contains(kZeta3 / (sum_enclosure(z).hi + 1.0)));

  // Already-small totals are divided by the same rule.
  auto small = Schedule::power(1.0 / 3, 3, ScheduleRole::YThreshold);
  Schedule sn = normalize_zeta(small);
  CHECK(sn.coefficient() < small.coefficient());

  CHECK_THROWS_AS(normalize_zeta(Schedule::power(1, 1, ScheduleRole::YThreshold)),
                  Error);
  CHECK(normalize_zeta(Schedule::zero(ScheduleRole::YThreshold)).family() ==
        ScheduleFamily::Zero);
}

TEST_CASE("averaging weights") {
  auto alpha = Schedule::power(1, 0.5, ScheduleRole::Stepsize);
  auto zero_tau = Schedule::zero(ScheduleRole::XThreshold);

  // tau == 0: H is identically one and S is the plain stepsize sum.
  AveragingWeights w = averaging_weights(zero_tau, alpha, 10);
  CHECK(w.H(-1) == 1.0);
  for (long t = 0; t <= 10; ++t) CHECK(w.H(t) == 1.0);
  CHECK(w.S(0) == 0.0);
  double s4 = 1.0 + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(3.0) + 0.5;
  CHECK(w.S(4) == Catch::Approx(s4).margin(1e-14));
  CHECK(w.S(4) >= 2.0);

  // Summable tau: H stays below e^{E_tau} with the sum taken from t = 0.
  auto tau = Schedule::power(1, 1.5, ScheduleRole::XThreshold);
  AveragingWeights wt = averaging_weights(tau, alpha, 2000);
  double bound = std::exp(sum_from_zero_upper(tau));
  double hmax = 0.0;
  for (long t = -1; t <= 2000; ++t) {
    CHECK(wt.H(t) >= 1.0);
    if (t >= 0) CHECK(wt.H(t) >= wt.H(t - 1));
    hmax = std::max(hmax, wt.H(t));
  }
  CHECK(hmax < bound);

  // S(t) >= e^{-E_tau} sqrt(t) for the 1/sqrt(t) stepsize.
  double inv = std::exp(-sum_from_zero_upper(tau));
  for (long t = 1; t <= 2000; ++t) {
    CHECK(wt.S(t) >= inv * std::sqrt(static_cast<double>(t)));
    CHECK(wt.S(t) > wt.S(t - 1));
  }
}

TEST_CASE("schedule string round trip") {
  auto z = Schedule::power(1.0 / 3, 3, ScheduleRole::YThreshold);
  CHECK(z.to_string() == "power " + format_double(1.0 / 3) + " 3");
  CHECK(Schedule::zero(ScheduleRole::XThreshold).to_string() == "zero");
  CHECK(Schedule::constant(0.05, ScheduleRole::XThreshold).to_string() ==
        "const 0.05");
}
