#pragma once

// Time-varying directed graph sequences, the out-degree based column
// stochastic mixing matrices built from them, window connectivity checking,
// and empirical estimation of the backward-product decay (phi, C0, lambda, Q).

#include "etgp/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <utility>
#include <vector>

namespace etgp {

/// One round's communication topology. Edges are ordered pairs (i, j) meaning
/// i can send to j, with 0-based node indices. Self-loops are implicit at
/// every node and never appear in the edge list.
class DirectedGraphSnapshot {
 public:
  DirectedGraphSnapshot(int m, std::vector<std::pair<int, int>> edges)
      : m_(m), out_(static_cast<std::size_t>(m)), in_(static_cast<std::size_t>(m)) {
    detail::require(m >= 1, "graph needs at least one node");
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    for (auto [i, j] : edges) {
      detail::require(0 <= i && i < m && 0 <= j && j < m,
                      "edge endpoint out of range");
      detail::require(i != j, "explicit self-loops are not allowed");
      out_[static_cast<std::size_t>(i)].push_back(j);
      in_[static_cast<std::size_t>(j)].push_back(i);
    }
    edges_ = std::move(edges);
  }

  int size() const { return m_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// Out-degree including the implicit self-loop.
  int out_degree(int i) const {
    return static_cast<int>(out_[static_cast<std::size_t>(i)].size()) + 1;
  }
  /// Out-neighbors excluding self.
  const std::vector<int>& out_neighbors(int i) const {
    return out_[static_cast<std::size_t>(i)];
  }
  /// In-neighbors excluding self.
  const std::vector<int>& in_neighbors(int i) const {
    return in_[static_cast<std::size_t>(i)];
  }

  bool operator==(const DirectedGraphSnapshot& o) const {
    return m_ == o.m_ && edges_ == o.edges_;
  }

 private:
  int m_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

/// Writes one "i j" pair per line, 1-based.
inline void write_edge_list(const DirectedGraphSnapshot& g, std::ostream& os) {
  for (auto [i, j] : g.edges()) os << (i + 1) << ' ' << (j + 1) << '\n';
}

/// a_ij = 1/d_j_out if j is an in-neighbor of i (or j == i), else 0.
/// Columns sum to exactly one term-count times 1/d_j_out, i.e. to 1.
inline Mat mixing_matrix(const DirectedGraphSnapshot& g) {
  int m = g.size();
  Mat a = Mat::Zero(m, m);
  for (int j = 0; j < m; ++j) {
    double w = 1.0 / static_cast<double>(g.out_degree(j));
    a(j, j) = w;
    for (int i : g.out_neighbors(j)) a(i, j) = w;
  }
  return a;
}

namespace detail {

inline bool strongly_connected(int m, const std::vector<std::vector<int>>& out,
                               const std::vector<std::vector<int>>& in) {
  auto reaches_all = [m](const std::vector<std::vector<int>>& adj) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == m;
  };
  return reaches_all(out) && reaches_all(in);
}

inline bool strongly_connected(const DirectedGraphSnapshot& g) {
  int m = g.size();
  std::vector<std::vector<int>> out(static_cast<std::size_t>(m));
  std::vector<std::vector<int>> in(static_cast<std::size_t>(m));
  for (auto [i, j] : g.edges()) {
    out[static_cast<std::size_t>(i)].push_back(j);
    in[static_cast<std::size_t>(j)].push_back(i);
  }
  return strongly_connected(m, out, in);
}

}  // namespace detail

/// Deterministic generator of per-round graph snapshots. Three kinds: a fixed
/// snapshot, a cyclic list of snapshots, and a seeded per-round random digraph
/// whose window unions are strongly connected by construction.
class GraphSequence {
 public:
  enum class Kind { Static, Cyclic, Random };

  static GraphSequence static_graph(DirectedGraphSnapshot g) {
    GraphSequence s(g.size(), Kind::Static);
    s.phases_.push_back(std::move(g));
    return s;
  }

  static GraphSequence cyclic(std::vector<DirectedGraphSnapshot> phases) {
    detail::require(!phases.empty(), "cyclic sequence needs at least one phase");
    int m = phases.front().size();
    for (const auto& g : phases)
      detail::require(g.size() == m, "cyclic phases must share the node count");
    GraphSequence s(m, Kind::Cyclic);
    s.phases_ = std::move(phases);
    return s;
  }

  /// Per-round random digraph: each ordered pair (i, j), i != j, is an edge
  /// with probability edge_prob, drawn deterministically from (seed, t).
  /// Redraws the whole sequence (up to 100 attempts) until every B-window
  /// union over the requested horizon is strongly connected.
  static GraphSequence random(int m, double edge_prob, int window_b,
                              long horizon, std::uint64_t seed);

  int size() const { return m_; }
  Kind kind() const { return kind_; }
  std::uint64_t seed() const { return seed_; }

  DirectedGraphSnapshot snapshot(long t) const {
    detail::require(t >= 0, "snapshot round must be nonnegative");
    switch (kind_) {
      case Kind::Static: return phases_.front();
      case Kind::Cyclic:
        return phases_[static_cast<std::size_t>(t % static_cast<long>(phases_.size()))];
      case Kind::Random: return random_snapshot(t);
    }
    return phases_.front();
  }

  long period() const {
    return kind_ == Kind::Cyclic ? static_cast<long>(phases_.size()) : 1;
  }

 private:
  GraphSequence(int m, Kind kind) : m_(m), kind_(kind) {}

  DirectedGraphSnapshot random_snapshot(long t) const {
    std::uint64_t key = detail::splitmix64(
        seed_ ^ detail::splitmix64(static_cast<std::uint64_t>(attempt_) * 0x51ed270b2d4c1a65ULL +
                                   static_cast<std::uint64_t>(t)));
    std::mt19937_64 rng(key);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        if (i != j && u(rng) < edge_prob_) edges.emplace_back(i, j);
    return DirectedGraphSnapshot(m_, std::move(edges));
  }

  int m_;
  Kind kind_;
  std::vector<DirectedGraphSnapshot> phases_;
  double edge_prob_ = 0.0;
  int window_b_ = 1;
  std::uint64_t seed_ = 0;
  int attempt_ = 0;

  friend GraphSequence make_random_sequence_impl(int, double, int, long,
                                                 std::uint64_t);
};

/// Union of all edge sets over rounds [k*B, (k+1)*B - 1] strongly connected,
/// for every complete window inside the horizon.
inline bool is_uniformly_strongly_connected(const GraphSequence& seq, int window_b,
                                            long horizon) {
  detail::require(window_b >= 1, "window must be >= 1");
  detail::require(horizon >= window_b, "horizon must cover at least one window");
  int m = seq.size();
  for (long k = 0; (k + 1) * window_b - 1 < horizon; ++k) {
    std::vector<std::pair<int, int>> edges;
    for (long t = k * window_b; t <= (k + 1) * window_b - 1; ++t) {
      auto snap = seq.snapshot(t);
      const auto& e = snap.edges();
      edges.insert(edges.end(), e.begin(), e.end());
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<std::vector<int>> out(static_cast<std::size_t>(m));
    std::vector<std::vector<int>> in(static_cast<std::size_t>(m));
    for (auto [i, j] : edges) {
      out[static_cast<std::size_t>(i)].push_back(j);
      in[static_cast<std::size_t>(j)].push_back(i);
    }
    if (!detail::strongly_connected(m, out, in)) return false;
  }
  return true;
}

inline GraphSequence make_random_sequence_impl(int m, double edge_prob,
                                               int window_b, long horizon,
                                               std::uint64_t seed) {
  detail::require(m >= 1, "random sequence needs m >= 1");
  detail::require(edge_prob >= 0.0 && edge_prob <= 1.0,
                  "edge probability must be in [0, 1]");
  detail::require(window_b >= 1 && horizon >= window_b,
                  "random sequence needs B >= 1 and horizon >= B");
  for (int attempt = 0; attempt < 100; ++attempt) {
    GraphSequence s(m, GraphSequence::Kind::Random);
    s.edge_prob_ = edge_prob;
    s.window_b_ = window_b;
    s.seed_ = seed;
    s.attempt_ = attempt;
    if (is_uniformly_strongly_connected(s, window_b, horizon)) return s;
  }
  throw Error("random graph sequence: no attempt satisfied the B-window "
              "connectivity check within 100 redraws");
}

inline GraphSequence GraphSequence::random(int m, double edge_prob, int window_b,
                                           long horizon, std::uint64_t seed) {
  return make_random_sequence_impl(m, edge_prob, window_b, horizon, seed);
}

/// Static strongly connected digraph where every node has exactly k
/// out-neighbors besides itself: a ring spine i -> i+1 guarantees strong
/// connectivity with B = 1, and each node draws k-1 further seed-driven
/// targets. The draws leave in-degrees uneven, so the mixing matrix is
/// column- but not row-stochastic and the push-sum weights stay dynamic.
inline GraphSequence k_out_neighbors_graph(int m, int k, std::uint64_t seed) {
  detail::require(m >= 2, "k-out graph needs m >= 2");
  detail::require(1 <= k && k <= m - 1, "k-out graph needs 1 <= k <= m-1");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
  std::vector<int> pool(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    int next = (i + 1) % m;
    edges.emplace_back(i, next);
    // Partial Fisher-Yates over the remaining m-2 candidates.
    int n = 0;
    for (int v = 0; v < m; ++v)
      if (v != i && v != next) pool[static_cast<std::size_t>(n++)] = v;
    for (int extra = 0; extra < k - 1; ++extra) {
      std::uniform_int_distribution<int> u(extra, n - 1);
      std::swap(pool[static_cast<std::size_t>(extra)],
                pool[static_cast<std::size_t>(u(rng))]);
      edges.emplace_back(i, pool[static_cast<std::size_t>(extra)]);
    }
  }
  return GraphSequence::static_graph(DirectedGraphSnapshot(m, std::move(edges)));
}

/// A(t:s) = A(t) A(t-1) ... A(s); column-stochastic like its factors.
inline Mat matrix_product(const GraphSequence& seq, long t, long s) {
  detail::require(t >= s && s >= 0, "matrix_product needs t >= s >= 0");
  Mat prod = mixing_matrix(seq.snapshot(s));
  for (long r = s + 1; r <= t; ++r)
    prod = (mixing_matrix(seq.snapshot(r)) * prod).eval();
  return prod;
}

struct DecayFitPoint {
  long t;
  long s;
  double deviation;  // max_ij |[A(t:s)]_ij - phi_i(t)|
};

/// Empirical push-sum product properties: the limiting stochastic vectors
/// phi(t), a fitted geometric envelope C0 lambda^{t-s} that dominates every
/// grid deviation above the noise floor, and Q = min over t <= horizon of
/// min_i [A(t:0) 1]_i.
struct PushSumDecay {
  std::vector<Vec> phi;  // phi[t] for t = 0..horizon
  double c0 = 1.0;
  double lambda = 0.5;
  double q = 0.0;
  int depth_cap = 0;           // reference product depth for slack accounting
  double noise_floor = 1e-13;  // deviations below this are not fitted
  std::vector<DecayFitPoint> grid;

  /// phi-estimation slack at round t: C0 lambda^{min(t, depth_cap)} absorbs
  /// the finite-depth estimation error of phi(t).
  double phi_slack(long t) const {
    long g = std::min<long>(t, depth_cap);
    return c0 * std::pow(lambda, static_cast<double>(g));
  }
};

inline PushSumDecay estimate_phi_decay(const GraphSequence& seq, long horizon) {
  detail::require(horizon >= 1, "estimate_phi_decay needs horizon >= 1");
  const int m = seq.size();
  PushSumDecay est;
  est.depth_cap = 8 * m;

  // phi(t) as the column average of A(t:0); the average obeys the exact
  // push-forward recursion phi(t) = A(t) phi(t-1), so no products are stored.
  // Q rides along since [A(t:0) 1]_i = m phi_i(t).
  est.phi.reserve(static_cast<std::size_t>(horizon) + 1);
  Vec phi = mixing_matrix(seq.snapshot(0)) * Vec::Ones(m) / static_cast<double>(m);
  est.phi.push_back(phi);
  double q = m * phi.minCoeff();
  for (long t = 1; t <= horizon; ++t) {
    phi = (mixing_matrix(seq.snapshot(t)) * phi).eval();
    est.phi.push_back(phi);
    q = std::min(q, m * phi.minCoeff());
  }
  est.q = q;

  // Deviation grid: windowed products from several anchors s, swept upward in
  // t, compared against phi(t).
  const long max_gap = std::min<long>(horizon, std::max<long>(6L * m, 60));
  const int anchor_count = 12;
  std::vector<long> anchors;
  const long spread = std::max<long>(horizon - max_gap, (3 * horizon) / 4);
  for (int a = 0; a < anchor_count; ++a) {
    long s = (a * spread) / std::max(1, anchor_count - 1);
    if (anchors.empty() || anchors.back() != s) anchors.push_back(s);
  }
  for (long s : anchors) {
    Mat w = mixing_matrix(seq.snapshot(s));
    long stale = 0;
    for (long t = s; t <= std::min(horizon, s + max_gap); ++t) {
      if (t > s) w = (mixing_matrix(seq.snapshot(t)) * w).eval();
      double dev = (w.colwise() - est.phi[static_cast<std::size_t>(t)])
                       .cwiseAbs()
                       .maxCoeff();
      est.grid.push_back({t, s, dev});
      stale = dev < est.noise_floor * 0.1 ? stale + 1 : 0;
      if (stale >= 3) break;  // deep in the noise floor, nothing left to fit
    }
  }

  // Least-squares fit of log dev = log C0 + (t-s) log lambda over points
  // above the noise floor, then C0 raised until the envelope dominates all
  // fitted points.
  double sg = 0, sl = 0, sgg = 0, sgl = 0;
  long n = 0;
  for (const auto& p : est.grid) {
    if (p.deviation <= est.noise_floor) continue;
    double g = static_cast<double>(p.t - p.s);
    double l = std::log(p.deviation);
    sg += g;
    sl += l;
    sgg += g * g;
    sgl += g * l;
    ++n;
  }
  if (n < 2) {
    // Deviations vanish immediately (e.g. complete graph): trivial envelope.
    est.c0 = 1.0;
    est.lambda = 0.5;
    return est;
  }
  double denom = static_cast<double>(n) * sgg - sg * sg;
  detail::require(std::abs(denom) > 0.0, "degenerate decay fit grid");
  double slope = (static_cast<double>(n) * sgl - sg * sl) / denom;
  if (!(slope < 0.0))
    throw Error("estimate_phi_decay: deviations do not decay; the sequence "
                "appears not to be uniformly strongly connected");
  est.lambda = std::min(std::exp(slope), 1.0 - 1e-9);
  double c0 = 1.0;
  for (const auto& p : est.grid) {
    if (p.deviation <= est.noise_floor) continue;
    c0 = std::max(c0, p.deviation / std::pow(est.lambda,
                                             static_cast<double>(p.t - p.s)));
  }
  est.c0 = c0;
  return est;
}

}  // namespace etgp
