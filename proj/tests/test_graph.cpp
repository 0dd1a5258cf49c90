#include <doctest.h>

#include "ggsp/errors.hpp"
#include "ggsp/graph.hpp"
#include "ggsp/rng.hpp"
#include "ggsp/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

using namespace ggsp;

namespace {

Graph random_graph(int n, double edge_prob, Rng& rng) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(edge_prob)) edges.push_back({i, j, 0.2 + rng.uniform()});
    return build_graph(n, edges);
}

} // namespace

TEST_SUITE("graph") {

TEST_CASE("build_graph validates inputs") {
    Graph p2 = build_graph(2, {{0, 1, 1.0}});
    CHECK(p2.n == 2);
    CHECK(p2.edges.size() == 1);

    CHECK_THROWS_AS(build_graph(3, {{0, 0, 1.0}}), SelfLoop);
    CHECK_THROWS_AS(build_graph(3, {{0, 4, 1.0}}), IndexOutOfRange);
    CHECK_THROWS_AS(build_graph(3, {{0, 1, 0.0}}), NonpositiveWeight);
    CHECK_THROWS_AS(build_graph(3, {{0, 1, -2.0}}), NonpositiveWeight);
    CHECK_THROWS_AS(build_graph(3, {{0, 1, 1.0}, {1, 0, 2.0}}), DuplicateEdge);

    Graph c4 = build_graph(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {0, 3, 1}});
    CHECK(c4.edges.size() == 4);
}

TEST_CASE("graph_matrices on known graphs") {
    GraphMatrices p2 = graph_matrices(build_graph(2, {{0, 1, 1.0}}));
    CHECK(p2.laplacian(0, 0) == doctest::Approx(1.0));
    CHECK(p2.laplacian(0, 1) == doctest::Approx(-1.0));
    CHECK(p2.laplacian(1, 0) == doctest::Approx(-1.0));
    CHECK(p2.laplacian(1, 1) == doctest::Approx(1.0));

    GraphMatrices c4 = graph_matrices(cycle_graph(4));
    CHECK((c4.degree - 2.0 * Eigen::MatrixXd::Identity(4, 4)).norm() == doctest::Approx(0.0));
    for (int i = 0; i < 4; ++i) CHECK(c4.laplacian(i, i) == doctest::Approx(2.0));
    CHECK(c4.laplacian(0, 1) == doctest::Approx(-1.0));
    CHECK(c4.laplacian(0, 2) == doctest::Approx(0.0));

    GraphMatrices w3 = graph_matrices(build_graph(2, {{0, 1, 3.0}}));
    CHECK(w3.laplacian(0, 0) == doctest::Approx(3.0));
    CHECK(w3.laplacian(1, 0) == doctest::Approx(-3.0));
}

TEST_CASE("graph_matrices invariants on random graphs") {
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        Graph g = random_graph(2 + static_cast<int>(rng.uniform_index(6)), 0.5, rng);
        GraphMatrices m = graph_matrices(g);
        CHECK((m.laplacian - (m.degree - m.adjacency)).norm() == 0.0);
        CHECK((m.laplacian - m.laplacian.transpose()).norm() == 0.0);
        CHECK(m.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
        CHECK(m.adjacency.diagonal().cwiseAbs().maxCoeff() == 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.laplacian);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("generate_graph cycles and paths") {
    Graph c4 = generate_graph(CycleSpec{4});
    REQUIRE(c4.edges.size() == 4);
    CHECK(c4.edges[0].i == 0);
    CHECK(c4.edges[0].j == 1);
    CHECK(c4.edges[1].j == 3); // (0,3) sorts before (1,2)
    CHECK_THROWS_AS(cycle_graph(2), InvalidSpec);

    Graph p1 = path_graph(1);
    CHECK(p1.edges.empty());
}

TEST_CASE("erdos_renyi generation") {
    Graph g = erdos_renyi_graph(30, 0.5, 42, true);
    CHECK(g.n == 30);
    CHECK(is_connected(g));

    // p = 1 forces the complete graph
    Graph k5 = erdos_renyi_graph(5, 1.0, 7, false);
    CHECK(k5.edges.size() == 10);

    // determinism: bit-identical edge lists for a fixed seed
    Graph a = erdos_renyi_graph(12, 0.3, 99, true);
    Graph b = erdos_renyi_graph(12, 0.3, 99, true);
    REQUIRE(a.edges.size() == b.edges.size());
    for (size_t i = 0; i < a.edges.size(); ++i) {
        CHECK(a.edges[i].i == b.edges[i].i);
        CHECK(a.edges[i].j == b.edges[i].j);
        CHECK(a.edges[i].w == b.edges[i].w);
    }

    CHECK_THROWS_AS(erdos_renyi_graph(30, 0.0001, 1, true, 3), ConnectivityTimeout);
    CHECK_THROWS_AS(erdos_renyi_graph(3, 1.5, 1, false), InvalidSpec);
}

TEST_CASE("cartesian product against hand expansion") {
    Graph p2 = path_graph(2);
    Graph prod = cartesian_product(p2, p2);
    // W (x) I + I (x) W on 2x2 vertices is the 4-cycle (0,0)-(0,1)-(1,1)-(1,0)
    REQUIRE(prod.edges.size() == 4);
    auto has_edge = [&](int i, int j) {
        for (const Edge& e : prod.edges)
            if (e.i == i && e.j == j) return true;
        return false;
    };
    CHECK(has_edge(0, 1));
    CHECK(has_edge(2, 3));
    CHECK(has_edge(0, 2));
    CHECK(has_edge(1, 3));

    // identity factor: G x (single vertex) = G
    Graph single = build_graph(1, {});
    Graph same = cartesian_product(p2, single);
    CHECK(same.n == 2);
    REQUIRE(same.edges.size() == 1);
    CHECK(same.edges[0].w == 1.0);
}

TEST_CASE("product graphs match the Kronecker formulas") {
    Rng rng(17);
    for (int trial = 0; trial < 12; ++trial) {
        Graph g = random_graph(2 + static_cast<int>(rng.uniform_index(5)), 0.6, rng);
        Graph h = random_graph(2 + static_cast<int>(rng.uniform_index(5)), 0.6, rng);
        GraphMatrices gm = graph_matrices(g), hm = graph_matrices(h);
        Eigen::MatrixXd ig = Eigen::MatrixXd::Identity(g.n, g.n);
        Eigen::MatrixXd ih = Eigen::MatrixXd::Identity(h.n, h.n);

        GraphMatrices cart = graph_matrices(cartesian_product(g, h));
        Eigen::MatrixXd w_expect = kronecker(gm.adjacency, ih) + kronecker(ig, hm.adjacency);
        Eigen::MatrixXd l_expect = kronecker(gm.laplacian, ih) + kronecker(ig, hm.laplacian);
        CHECK((cart.adjacency - w_expect).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((cart.laplacian - l_expect).cwiseAbs().maxCoeff() < 1e-12);

        GraphMatrices tens = graph_matrices(tensor_product(g, h));
        CHECK((tens.adjacency - kronecker(gm.adjacency, hm.adjacency)).cwiseAbs().maxCoeff() <
              1e-12);
    }
}

TEST_CASE("tensor product specifics") {
    Graph p2 = path_graph(2);
    Graph t = tensor_product(p2, p2);
    // Kronecker of [[0,1],[1,0]] with itself: two disjoint edges
    REQUIRE(t.edges.size() == 2);
    auto has_edge = [&](int i, int j) {
        for (const Edge& e : t.edges)
            if (e.i == i && e.j == j) return true;
        return false;
    };
    CHECK(has_edge(0, 3));
    CHECK(has_edge(1, 2));

    Graph edgeless = build_graph(3, {});
    CHECK(tensor_product(p2, edgeless).edges.empty());

    Graph a = build_graph(2, {{0, 1, 2.0}});
    Graph b = build_graph(2, {{0, 1, 3.0}});
    Graph ab = tensor_product(a, b);
    for (const Edge& e : ab.edges) CHECK(e.w == doctest::Approx(6.0));
}

TEST_CASE("knn graph on a line") {
    std::vector<Eigen::VectorXd> pts(3, Eigen::VectorXd(1));
    pts[0] << 0.0;
    pts[1] << 1.0;
    pts[2] << 3.0;
    Graph g = knn_graph(pts, 1);
    REQUIRE(g.edges.size() == 2);
    // sigma^2 = population variance of {1, 3, 2} = 2/3
    CHECK(g.edges[0].i == 0);
    CHECK(g.edges[0].j == 1);
    CHECK(g.edges[0].w == doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
    CHECK(g.edges[1].w == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
}

TEST_CASE("knn graph symmetry and edge cases") {
    // equilateral triangle (basis vectors, so distances tie exactly):
    // complete graph, equal weights
    std::vector<Eigen::VectorXd> tri(3, Eigen::VectorXd(3));
    tri[0] << 1.0, 0.0, 0.0;
    tri[1] << 0.0, 1.0, 0.0;
    tri[2] << 0.0, 0.0, 1.0;
    Graph g = knn_graph(tri, 1);
    REQUIRE(g.edges.size() == 3);
    for (const Edge& e : g.edges) {
        CHECK(e.w == doctest::Approx(g.edges[0].w));
        CHECK(e.w > 0.0);
        CHECK(e.w <= 1.0);
    }

    // k >= n-1 gives the complete graph
    Rng rng(5);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 6; ++i) {
        Eigen::VectorXd p(2);
        p << rng.uniform(), rng.uniform();
        pts.push_back(p);
    }
    CHECK(knn_graph(pts, 5).edges.size() == 15);

    CHECK_THROWS_AS(knn_graph({pts[0], pts[1]}, 2), TooFewPoints);
    std::vector<Eigen::VectorXd> dup = {pts[0], pts[0], pts[1]};
    CHECK_THROWS_AS(knn_graph(dup, 1), DuplicatePoints);
}

TEST_CASE("knn weights lie in (0,1] and adjacency is symmetric") {
    Rng rng(23);
    std::vector<Eigen::VectorXd> pts;
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd p(3);
        p << rng.gaussian(), rng.gaussian(), rng.gaussian();
        pts.push_back(p);
    }
    Graph g = knn_graph(pts, 4);
    Eigen::MatrixXd w = graph_matrices(g).adjacency;
    CHECK((w - w.transpose()).norm() == 0.0);
    for (const Edge& e : g.edges) {
        CHECK(e.w > 0.0);
        CHECK(e.w <= 1.0);
    }
}

TEST_CASE("correlation graph") {
    Eigen::MatrixXd rows(3, 6);
    rows.row(0) << 1, 2, 3, 4, 5, 6;
    rows.row(1) << 1, 2, 3, 4, 5, 6;       // identical: corr = 1
    rows.row(2) << -1, -2, -3, -4, -5, -6; // negated: |corr| = 1
    Graph g = correlation_graph(rows, 0.75);
    CHECK(g.edges.size() == 3);
    for (const Edge& e : g.edges) CHECK(e.w == 1.0);

    Eigen::MatrixXd flat(2, 4);
    flat.row(0) << 1, 1, 1, 1;
    flat.row(1) << 1, 2, 3, 4;
    CHECK_THROWS_AS(correlation_graph(flat, 0.75), ZeroVarianceRow);

    Eigen::MatrixXd tiny(2, 1);
    CHECK_THROWS_AS(correlation_graph(tiny, 0.75), TooFewSamples);

    // independent long rows stay uncorrelated
    Rng rng(31);
    Eigen::MatrixXd indep(4, 10000);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 10000; ++c) indep(r, c) = rng.gaussian();
    CHECK(correlation_graph(indep, 0.75).edges.empty());
}

TEST_CASE("edge list round trip") {
    Graph g = build_graph(4, {{0, 1, 1.5}, {2, 3, 0.25}});
    Graph back = from_edge_list(to_edge_list(g));
    CHECK(back.n == g.n);
    REQUIRE(back.edges.size() == g.edges.size());
    for (size_t i = 0; i < g.edges.size(); ++i) {
        CHECK(back.edges[i].i == g.edges[i].i);
        CHECK(back.edges[i].j == g.edges[i].j);
        CHECK(back.edges[i].w == g.edges[i].w);
    }
    CHECK_THROWS_AS(from_edge_list(std::string("0 1 1.0\n")), ParseError);
}

TEST_CASE("coordinate CSV ingestion") {
    std::istringstream in("id,x,y\n2,0.5,0.5\n0,0,0\n1,1,0\n");
    auto pts = read_coords_csv(in);
    REQUIRE(pts.size() == 3);
    CHECK(pts[0](0) == 0.0); // sorted by id
    CHECK(pts[2](0) == 0.5);

    std::istringstream bad("x,y\n0,0\n");
    CHECK_THROWS_AS(read_coords_csv(bad), ParseError);
}

} // TEST_SUITE
