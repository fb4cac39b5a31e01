#include "etgp/graph.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace etgp;

namespace {

DirectedGraphSnapshot cycle3() {
  return DirectedGraphSnapshot(3, {{0, 1}, {1, 2}, {2, 0}});
}

}  // namespace

TEST_CASE("snapshot validation") {
  CHECK_THROWS_AS(DirectedGraphSnapshot(3, {{0, 0}}), Error);
  CHECK_THROWS_AS(DirectedGraphSnapshot(3, {{0, 3}}), Error);
  CHECK_THROWS_AS(DirectedGraphSnapshot(3, {{-1, 0}}), Error);
  // Duplicate edges collapse.
  DirectedGraphSnapshot g(3, {{0, 1}, {0, 1}});
  CHECK(g.edges().size() == 1);
  CHECK(g.out_degree(0) == 2);  // self-loop included
  CHECK(g.out_degree(2) == 1);
}

TEST_CASE("sequence snapshots are deterministic") {
  auto stat = GraphSequence::static_graph(cycle3());
  CHECK(stat.snapshot(7) == stat.snapshot(0));

  auto cyc = GraphSequence::cyclic(
      {DirectedGraphSnapshot(2, {{0, 1}}), DirectedGraphSnapshot(2, {{1, 0}})});
  CHECK(cyc.snapshot(5) == cyc.snapshot(1));
  CHECK_FALSE(cyc.snapshot(5) == cyc.snapshot(0));

  auto rnd = GraphSequence::random(6, 0.3, 2, 20, 99);
  CHECK(rnd.snapshot(3) == rnd.snapshot(3));
  CHECK(rnd.snapshot(0).size() == 6);
}

TEST_CASE("k-out construction") {
  auto g50 = k_out_neighbors_graph(50, 4, 1).snapshot(0);
  for (int i = 0; i < 50; ++i) CHECK(g50.out_degree(i) == 5);
  CHECK(detail::strongly_connected(g50));

  // k = 1 is the plain directed cycle.
  auto ring = k_out_neighbors_graph(3, 1, 7).snapshot(0);
  CHECK(ring.edges() ==
        std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 0}});
  CHECK(detail::strongly_connected(ring));

  // k = m-1 is the complete digraph.
  auto full = k_out_neighbors_graph(5, 4, 3).snapshot(0);
  CHECK(full.edges().size() == 20);
  for (int i = 0; i < 5; ++i) CHECK(full.out_degree(i) == 5);

  CHECK_THROWS_AS(k_out_neighbors_graph(5, 0, 1), Error);
  CHECK_THROWS_AS(k_out_neighbors_graph(5, 5, 1), Error);
}

TEST_CASE("mixing matrix entries") {
  // Directed 3-cycle with self-loops: column j has 1/2 at rows j and j+1.
  Mat a = mixing_matrix(cycle3());
  for (int j = 0; j < 3; ++j) {
    CHECK(a(j, j) == 0.5);
    CHECK(a((j + 1) % 3, j) == 0.5);
    CHECK(a((j + 2) % 3, j) == 0.0);
  }

  // Complete digraph m = 4: all entries 1/4.
  auto full = k_out_neighbors_graph(4, 3, 1).snapshot(0);
  Mat af = mixing_matrix(full);
  CHECK((af.array() - 0.25).abs().maxCoeff() == 0.0);

  // A node with no out-edges besides itself owns a unit column.
  DirectedGraphSnapshot iso(2, {{0, 1}});
  Mat ai = mixing_matrix(iso);
  CHECK(ai(1, 1) == 1.0);
  CHECK(ai(0, 1) == 0.0);
}

TEST_CASE("column stochasticity and self-loop weight") {
  auto rnd = GraphSequence::random(8, 0.25, 1, 30, 5);
  for (long t = 0; t < 30; ++t) {
    Mat a = mixing_matrix(rnd.snapshot(t));
    Eigen::RowVectorXd colsum = a.colwise().sum();
    CHECK((colsum.array() - 1.0).abs().maxCoeff() <= 1e-12);
    for (int i = 0; i < 8; ++i) CHECK(a(i, i) >= 1.0 / 8.0);
  }
  // Stochasticity is preserved under products.
  Mat prod = matrix_product(rnd, 29, 0);
  CHECK((prod.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("uniform strong connectivity checker") {
  auto stat = GraphSequence::static_graph(cycle3());
  CHECK(is_uniformly_strongly_connected(stat, 1, 10));

  // Alternating one-way links: connected over windows of two, not one.
  auto cyc = GraphSequence::cyclic(
      {DirectedGraphSnapshot(2, {{0, 1}}), DirectedGraphSnapshot(2, {{1, 0}})});
  CHECK(is_uniformly_strongly_connected(cyc, 2, 10));
  CHECK_FALSE(is_uniformly_strongly_connected(cyc, 1, 10));

  auto edgeless = GraphSequence::static_graph(DirectedGraphSnapshot(2, {}));
  CHECK_FALSE(is_uniformly_strongly_connected(edgeless, 1, 4));
  CHECK_FALSE(is_uniformly_strongly_connected(edgeless, 3, 9));
}

TEST_CASE("matrix products") {
  auto stat = GraphSequence::static_graph(cycle3());
  Mat a = mixing_matrix(stat.snapshot(0));
  CHECK((matrix_product(stat, 4, 4) - a).cwiseAbs().maxCoeff() == 0.0);

  auto full2 = k_out_neighbors_graph(2, 1, 1);
  Mat p = matrix_product(full2, 1, 0);
  CHECK((p.array() - 0.5).abs().maxCoeff() <= 1e-15);

  CHECK_THROWS_AS(matrix_product(stat, 1, 2), Error);
}

TEST_CASE("phi decay estimation on the complete graph") {
  auto full = k_out_neighbors_graph(4, 3, 1);
  PushSumDecay est = estimate_phi_decay(full, 50);
  for (const Vec& phi : est.phi)
    CHECK((phi.array() - 0.25).abs().maxCoeff() <= 1e-14);
  CHECK(est.q == Catch::Approx(1.0).margin(1e-12));
  CHECK(est.c0 >= 1.0);
  CHECK(est.lambda < 1.0);
}

TEST_CASE("phi decay estimation on the 4-out graph") {
  auto g = k_out_neighbors_graph(50, 4, 1);
  PushSumDecay est = estimate_phi_decay(g, 250);

  CHECK(est.lambda > 0.0);
  CHECK(est.lambda < 1.0);
  CHECK(est.c0 >= 1.0);
  // Q is positive and trivially clears 1/m^{mB}.
  CHECK(est.q > 0.0);
  CHECK(est.q >= std::pow(50.0, -50.0));
  // phi vectors are stochastic.
  for (long t = 0; t <= 250; t += 50)
    CHECK(est.phi[static_cast<std::size_t>(t)].sum() ==
          Catch::Approx(1.0).margin(1e-12));

  // Fitted envelope dominates every grid deviation above the noise floor.
  for (const DecayFitPoint& p : est.grid)
    CHECK(p.deviation <=
          est.c0 * std::pow(est.lambda, static_cast<double>(p.t - p.s)) +
              est.noise_floor);

  // Deviations decay at least geometrically: compare gaps 10 and 30 at s = 0.
  double dev10 = -1, dev30 = -1;
  for (const DecayFitPoint& p : est.grid) {
    if (p.s == 0 && p.t == 10) dev10 = p.deviation;
    if (p.s == 0 && p.t == 30) dev30 = p.deviation;
  }
  REQUIRE(dev10 > 0);
  REQUIRE(dev30 >= 0);
  CHECK(dev30 <= 0.5 * dev10);
}

TEST_CASE("decay fit failure on a disconnected sequence") {
  DirectedGraphSnapshot two_islands(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  auto seq = GraphSequence::static_graph(two_islands);
  CHECK_THROWS_AS(estimate_phi_decay(seq, 120), Error);
}

TEST_CASE("random sequence honors the window check by construction") {
  auto seq = GraphSequence::random(6, 0.18, 2, 24, 3);
  CHECK(is_uniformly_strongly_connected(seq, 2, 24));
  // Hopeless parameters exhaust the retry cap.
  CHECK_THROWS_AS(GraphSequence::random(6, 0.0, 1, 6, 3), Error);
}

TEST_CASE("edge list export is 1-based") {
  std::ostringstream os;
  write_edge_list(cycle3(), os);
  CHECK(os.str() == "1 2\n2 3\n3 1\n");
}
