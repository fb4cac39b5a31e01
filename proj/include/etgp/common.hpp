#pragma once

// Shared aliases and small utilities used across the library.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace etgp {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Library-wide error type; thrown on precondition and validation failures.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

// SplitMix64 mixer, used to derive independent sub-seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Compensated (Kahan) accumulator for long partial sums.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    double y = v - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

}  // namespace detail

/// Shortest round-trip decimal representation (used for all CSV and config
/// serialization so outputs are byte-stable).
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  // Accepts plain decimals and "a/b" fractions.
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      double num = std::stod(s.substr(0, slash));
      double den = std::stod(s.substr(slash + 1));
      detail::require(den != 0.0, "fraction with zero denominator: " + s);
      return num / den;
    }
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    detail::require(pos == s.size(), "trailing characters in number: " + s);
    return v;
  } catch (const std::invalid_argument&) {
    throw Error("not a number: " + s);
  } catch (const std::out_of_range&) {
    throw Error("number out of range: " + s);
  }
}

/// Mean that is invariant under permutation of its inputs: values are sorted
/// before compensated summation, so aggregates do not depend on trial order.
inline double sorted_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  detail::KahanSum acc;
  for (double v : values) acc.add(v);
  return acc.sum / static_cast<double>(values.size());
}

/// Row-wise mixed norms for stacked state matrices (rows are agent vectors):
/// sum of row norms and max row norm.
inline double mixed_l1_norm(const Mat& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s += x.row(i).norm();
  return s;
}

inline double mixed_max_norm(const Mat& x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) s = std::max(s, x.row(i).norm());
  return s;
}

}  // namespace etgp
