#pragma once

// Local cost functions with gradient oracles: the decentralized least squares
// instance generator, the global optimum oracle, and gradient-bound
// estimation over a ball.

#include "etgp/common.hpp"

#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace etgp {

/// Anything exposing per-agent convex costs and gradients over R^d.
template <class F>
concept LocalObjective = requires(const F& f, int i, const Vec& x, Vec& out) {
  { f.agents() } -> std::convertible_to<int>;
  { f.dim() } -> std::convertible_to<int>;
  { f.value(i, x) } -> std::convertible_to<double>;
  { f.total_value(x) } -> std::convertible_to<double>;
  { f.gradient(i, x) } -> std::convertible_to<Vec>;
  { f.gradient_into(i, x, out) };
};

/// Decentralized least squares: agent i holds input P_i in R^{d x p} and
/// output q_i in R^p with f_i(x) = ||q_i - P_i^T x||^2 and gradient
/// 2 P_i (P_i^T x - q_i).
class LeastSquaresInstance {
 public:
  LeastSquaresInstance(std::vector<Mat> inputs, std::vector<Vec> outputs,
                       Vec true_weight, double sigma, std::uint64_t seed)
      : inputs_(std::move(inputs)),
        outputs_(std::move(outputs)),
        true_weight_(std::move(true_weight)),
        sigma_(sigma),
        seed_(seed) {
    detail::require(!inputs_.empty(), "instance needs at least one agent");
    detail::require(inputs_.size() == outputs_.size(),
                    "inputs/outputs agent count mismatch");
    d_ = static_cast<int>(inputs_.front().rows());
    p_ = static_cast<int>(inputs_.front().cols());
    for (std::size_t i = 0; i < inputs_.size(); ++i) {
      detail::require(inputs_[i].rows() == d_ && inputs_[i].cols() == p_,
                      "inconsistent input dimensions");
      detail::require(outputs_[i].size() == p_, "inconsistent output dimensions");
    }
  }

  int agents() const { return static_cast<int>(inputs_.size()); }
  int dim() const { return d_; }
  int out_dim() const { return p_; }
  double noise_sigma() const { return sigma_; }
  std::uint64_t seed() const { return seed_; }
  const Vec& true_weight() const { return true_weight_; }
  const Mat& input(int i) const { return inputs_[static_cast<std::size_t>(i)]; }
  const Vec& output(int i) const { return outputs_[static_cast<std::size_t>(i)]; }

  double value(int i, const Vec& x) const {
    return (outputs_[static_cast<std::size_t>(i)] -
            inputs_[static_cast<std::size_t>(i)].transpose() * x)
        .squaredNorm();
  }

  Vec gradient(int i, const Vec& x) const {
    Vec g(d_);
    gradient_into(i, x, g);
    return g;
  }

  void gradient_into(int i, const Vec& x, Vec& out) const {
    const Mat& pi = inputs_[static_cast<std::size_t>(i)];
    out.noalias() =
        2.0 * pi * (pi.transpose() * x - outputs_[static_cast<std::size_t>(i)]);
  }

  /// Global cost f(x) = sum_i f_i(x).
  double total_value(const Vec& x) const {
    double s = 0.0;
    for (int i = 0; i < agents(); ++i) s += value(i, x);
    return s;
  }

 private:
  std::vector<Mat> inputs_;
  std::vector<Vec> outputs_;
  Vec true_weight_;
  double sigma_;
  std::uint64_t seed_;
  int d_;
  int p_;
};

/// Draws an instance from the linear regression model q_i = P_i^T x~ + eps_i:
/// x~ standard Gaussian, P_i entries uniform on [0, 1], eps_i ~ N(0, sigma^2).
/// Draw order per seed: x~ first, then per agent the P_i entries (row-major)
/// followed by eps_i.
inline LeastSquaresInstance generate_least_squares(int m, int d, int p,
                                                   double sigma,
                                                   std::uint64_t seed) {
  detail::require(m >= 1 && d >= 1 && p >= 1, "dimensions must be >= 1");
  detail::require(sigma >= 0.0, "sigma must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec xt(d);
  for (int r = 0; r < d; ++r) xt[r] = gauss(rng);
  std::vector<Mat> inputs;
  std::vector<Vec> outputs;
  inputs.reserve(static_cast<std::size_t>(m));
  outputs.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    Mat pi(d, p);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < p; ++c) pi(r, c) = unit(rng);
    Vec eps(p);
    for (int c = 0; c < p; ++c) eps[c] = sigma * gauss(rng);
    outputs.push_back(pi.transpose() * xt + eps);
    inputs.push_back(std::move(pi));
  }
  return LeastSquaresInstance(std::move(inputs), std::move(outputs), std::move(xt),
                              sigma, seed);
}

struct Optimum {
  Vec x;
  double f = 0.0;
  bool ridged = false;      // 1e-12 ridge applied to a singular normal matrix
  double stationarity = 0.0;
};

/// Solves the normal equations of sum_i ||q_i - P_i^T x||^2 and verifies
/// first-order stationarity of the result.
inline Optimum solve_optimum(const LeastSquaresInstance& inst) {
  int d = inst.dim();
  Mat h = Mat::Zero(d, d);
  Vec b = Vec::Zero(d);
  for (int i = 0; i < inst.agents(); ++i) {
    h.noalias() += inst.input(i) * inst.input(i).transpose();
    b.noalias() += inst.input(i) * inst.output(i);
  }
  Optimum opt;
  Eigen::SelfAdjointEigenSolver<Mat> eig(h);
  double scale = std::max(1.0, eig.eigenvalues().maxCoeff());
  if (eig.eigenvalues().minCoeff() <= 1e-12 * scale) {
    h += 1e-12 * scale * Mat::Identity(d, d);
    opt.ridged = true;
  }
  opt.x = h.ldlt().solve(b);
  opt.f = inst.total_value(opt.x);
  Vec g = Vec::Zero(d);
  Vec gi(d);
  for (int i = 0; i < inst.agents(); ++i) {
    inst.gradient_into(i, opt.x, gi);
    g += gi;
  }
  opt.stationarity = g.norm();
  detail::require(opt.ridged || opt.stationarity <= 1e-8 * (1.0 + opt.x.norm()),
                  "optimum failed the stationarity check");
  return opt;
}

/// Per-agent gradient norm bounds over a ball, sampled on the boundary sphere
/// plus the center, inflated by a 1.1 safety factor. For the quadratic local
/// costs the gradient norm is convex in x, so the boundary carries the max.
struct GradientBound {
  double d_max = 0.0;
  std::vector<double> d_i;
  Vec center;
  double radius = 0.0;
};

template <class Obj>
  requires LocalObjective<Obj>
GradientBound estimate_gradient_bound(const Obj& obj, const Vec& center,
                                      double radius, int samples,
                                      std::uint64_t seed = 0x5eedULL) {
  detail::require(radius > 0.0, "estimate_gradient_bound needs radius > 0");
  detail::require(samples >= 1, "estimate_gradient_bound needs samples >= 1");
  int m = obj.agents();
  int d = obj.dim();
  detail::require(center.size() == d, "center dimension mismatch");
  GradientBound gb;
  gb.center = center;
  gb.radius = radius;
  gb.d_i.assign(static_cast<std::size_t>(m), 0.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec x(d), g(d);
  for (int s = 0; s <= samples; ++s) {
    if (s == 0) {
      x = center;
    } else {
      Vec dir(d);
      do {
        for (int r = 0; r < d; ++r) dir[r] = gauss(rng);
      } while (dir.norm() == 0.0);
      x = center + radius * dir / dir.norm();
    }
    for (int i = 0; i < m; ++i) {
      obj.gradient_into(i, x, g);
      gb.d_i[static_cast<std::size_t>(i)] =
          std::max(gb.d_i[static_cast<std::size_t>(i)], g.norm());
    }
  }
  for (double& v : gb.d_i) v *= 1.1;
  gb.d_max = 0.0;
  for (double v : gb.d_i) gb.d_max = std::max(gb.d_max, v);
  return gb;
}

}  // namespace etgp
