#pragma once

// Plain gradient-push without event triggering, written as a straight-line
// loop. Serves as the independent baseline the zero-threshold reduction
// checks compare against; deliberately shares no code with the engine.

#include "etgp/common.hpp"
#include "etgp/graph.hpp"
#include "etgp/objective.hpp"
#include "etgp/schedules.hpp"

#include <vector>

namespace etgp {

struct VanillaTrajectory {
  Mat x;     // final states, m x d
  Vec y;     // final push-sum weights
  Mat zhat;  // final de-biased estimates
  std::vector<Mat> x_history;  // x(0)..x(T) when requested
  std::vector<Vec> y_history;  // y(0)..y(T)
};

template <class Obj>
  requires LocalObjective<Obj>
VanillaTrajectory run_vanilla_gradient_push(const GraphSequence& graph,
                                            const Schedule& alpha,
                                            const Obj& objective, Mat x0,
                                            long rounds,
                                            bool keep_history = false) {
  const int m = objective.agents();
  const int d = objective.dim();
  detail::require(x0.rows() == m && x0.cols() == d,
                  "initial state dimensions mismatch");

  VanillaTrajectory out;
  Mat x = std::move(x0);
  Vec y = Vec::Ones(m);
  Mat w(m, d);
  Mat z(m, d);
  Vec ynext(m);
  Vec zi(d), gi(d);
  if (keep_history) {
    out.x_history.push_back(x);
    out.y_history.push_back(y);
  }
  for (long t = 0; t < rounds; ++t) {
    Mat a = mixing_matrix(graph.snapshot(t));
    w.noalias() = a * x;
    ynext.noalias() = a * y;
    for (int i = 0; i < m; ++i) z.row(i) = w.row(i) / ynext[i];
    double step = alpha.value(t + 1);
    for (int i = 0; i < m; ++i) {
      zi = z.row(i);
      objective.gradient_into(i, zi, gi);
      x.row(i) = w.row(i) - step * gi.transpose();
    }
    y = ynext;
    if (keep_history) {
      out.x_history.push_back(x);
      out.y_history.push_back(y);
    }
  }
  out.x = std::move(x);
  out.y = std::move(y);
  out.zhat = std::move(z);
  return out;
}

}  // namespace etgp
