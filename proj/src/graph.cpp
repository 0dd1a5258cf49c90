#include "ggsp/graph.hpp"
#include "ggsp/csv.hpp"
#include "ggsp/errors.hpp"
#include "ggsp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ggsp {

Graph build_graph(int n, const std::vector<Edge>& edges) {
    if (n < 1) throw InvalidSpec("graph needs at least one vertex");
    Graph g;
    g.n = n;
    g.edges.reserve(edges.size());
    std::set<std::pair<int, int>> seen;
    for (const Edge& e : edges) {
        int i = e.i, j = e.j;
        if (i == j) throw SelfLoop("self-loop at vertex " + std::to_string(i));
        if (i < 0 || j < 0 || i >= n || j >= n)
            throw IndexOutOfRange("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") out of range for n=" + std::to_string(n));
        if (!(e.w > 0.0) || !std::isfinite(e.w))
            throw NonpositiveWeight("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") has weight " + std::to_string(e.w));
        if (i > j) std::swap(i, j);
        if (!seen.insert({i, j}).second)
            throw DuplicateEdge("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                ") listed twice");
        g.edges.push_back({i, j, e.w});
    }
    std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
        return std::pair{a.i, a.j} < std::pair{b.i, b.j};
    });
    return g;
}

GraphMatrices graph_matrices(const Graph& g) {
    GraphMatrices m;
    m.adjacency = Eigen::MatrixXd::Zero(g.n, g.n);
    for (const Edge& e : g.edges) {
        m.adjacency(e.i, e.j) = e.w;
        m.adjacency(e.j, e.i) = e.w;
    }
    m.degree = Eigen::MatrixXd::Zero(g.n, g.n);
    m.degree.diagonal() = m.adjacency.rowwise().sum();
    m.laplacian = m.degree - m.adjacency;
    return m;
}

Graph cycle_graph(int t) {
    if (t < 3) throw InvalidSpec("cycle needs at least 3 vertices");
    std::vector<Edge> edges;
    edges.reserve(static_cast<size_t>(t));
    for (int i = 0; i + 1 < t; ++i) edges.push_back({i, i + 1, 1.0});
    edges.push_back({0, t - 1, 1.0});
    return build_graph(t, edges);
}

Graph path_graph(int n) {
    if (n < 1) throw InvalidSpec("path needs at least 1 vertex");
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
    return build_graph(n, edges);
}

bool is_connected(const Graph& g) {
    if (g.n <= 1) return true;
    std::vector<std::vector<int>> adj(static_cast<size_t>(g.n));
    for (const Edge& e : g.edges) {
        adj[static_cast<size_t>(e.i)].push_back(e.j);
        adj[static_cast<size_t>(e.j)].push_back(e.i);
    }
    std::vector<char> seen(static_cast<size_t>(g.n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : adj[static_cast<size_t>(v)]) {
            if (!seen[static_cast<size_t>(u)]) {
                seen[static_cast<size_t>(u)] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == g.n;
}

Graph erdos_renyi_graph(int n, double p, std::uint64_t seed, bool connected, int max_retries) {
    if (n < 1) throw InvalidSpec("erdos_renyi needs n >= 1");
    if (!(p > 0.0) || p > 1.0) throw InvalidSpec("erdos_renyi needs 0 < p <= 1");
    Rng rng(seed);
    for (int attempt = 0; attempt < std::max(1, max_retries); ++attempt) {
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (rng.bernoulli(p)) edges.push_back({i, j, 1.0});
        Graph g = build_graph(n, edges);
        if (!connected || is_connected(g)) return g;
    }
    throw ConnectivityTimeout("no connected graph after " + std::to_string(max_retries) +
                              " attempts (n=" + std::to_string(n) + ", p=" + std::to_string(p) + ")");
}

Graph generate_graph(const GraphSpec& spec) {
    return std::visit(
        [](const auto& s) -> Graph {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, CycleSpec>) return cycle_graph(s.t);
            else if constexpr (std::is_same_v<T, PathSpec>) return path_graph(s.n);
            else return erdos_renyi_graph(s.n, s.p, s.seed, s.connected, s.max_retries);
        },
        spec);
}

Graph knn_graph(const std::vector<Eigen::VectorXd>& coords, int k) {
    const int n = static_cast<int>(coords.size());
    if (k < 1) throw InvalidSpec("knn needs k >= 1");
    if (n < k + 1)
        throw TooFewPoints("knn with k=" + std::to_string(k) + " needs at least " +
                           std::to_string(k + 1) + " points, got " + std::to_string(n));
    Eigen::MatrixXd dist(n, n);
    double sum = 0.0, sumsq = 0.0;
    const double count = static_cast<double>(n) * (n - 1) / 2.0;
    for (int i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            double d = (coords[static_cast<size_t>(i)] - coords[static_cast<size_t>(j)]).norm();
            if (d == 0.0)
                throw DuplicatePoints("points " + std::to_string(i) + " and " + std::to_string(j) +
                                      " coincide");
            dist(i, j) = dist(j, i) = d;
            sum += d;
            sumsq += d * d;
        }
    }
    const double mean = sum / count;
    const double sigma2 = sumsq / count - mean * mean; // population variance
    // sigma2 > 0 whenever distances are not all equal; if they are, fall back
    // to the squared mean so weights stay in (0,1]
    const double denom = sigma2 > 0.0 ? sigma2 : mean * mean;

    std::set<std::pair<int, int>> nominated;
    std::vector<int> order;
    for (int i = 0; i < n; ++i) {
        order.clear();
        for (int j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            return std::pair{dist(i, a), a} < std::pair{dist(i, b), b};
        });
        // ties at the k-th distance are all nominated
        double cutoff = dist(i, order[static_cast<size_t>(k - 1)]);
        for (int j : order) {
            if (dist(i, j) > cutoff) break;
            nominated.insert({std::min(i, j), std::max(i, j)});
        }
    }
    std::vector<Edge> edges;
    edges.reserve(nominated.size());
    for (auto [i, j] : nominated)
        edges.push_back({i, j, std::exp(-dist(i, j) * dist(i, j) / denom)});
    return build_graph(n, edges);
}

Graph correlation_graph(const Eigen::MatrixXd& samples, double threshold) {
    const int n = static_cast<int>(samples.rows());
    const int t = static_cast<int>(samples.cols());
    if (t < 2) throw TooFewSamples("correlation graph needs at least 2 observations per row");
    Eigen::MatrixXd centered = samples.colwise() - samples.rowwise().mean();
    Eigen::VectorXd norms = centered.rowwise().norm();
    for (int i = 0; i < n; ++i)
        if (norms(i) == 0.0) throw ZeroVarianceRow("row " + std::to_string(i) + " is constant");
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double corr = centered.row(i).dot(centered.row(j)) / (norms(i) * norms(j));
            if (std::abs(corr) > threshold) edges.push_back({i, j, 1.0});
        }
    }
    return build_graph(n, edges);
}

Graph cartesian_product(const Graph& g, const Graph& h) {
    std::vector<Edge> edges;
    edges.reserve(g.edges.size() * static_cast<size_t>(h.n) +
                  h.edges.size() * static_cast<size_t>(g.n));
    // W_g (x) I: edge between (i, v) and (j, v)
    for (const Edge& e : g.edges)
        for (int v = 0; v < h.n; ++v) edges.push_back({e.i * h.n + v, e.j * h.n + v, e.w});
    // I (x) W_h: edge between (u, i) and (u, j)
    for (int u = 0; u < g.n; ++u)
        for (const Edge& e : h.edges) edges.push_back({u * h.n + e.i, u * h.n + e.j, e.w});
    return build_graph(g.n * h.n, edges);
}

Graph tensor_product(const Graph& g, const Graph& h) {
    std::vector<Edge> edges;
    edges.reserve(2 * g.edges.size() * h.edges.size());
    for (const Edge& a : g.edges) {
        for (const Edge& b : h.edges) {
            // W_g (x) W_h couples (a.i, b.i)-(a.j, b.j) and (a.i, b.j)-(a.j, b.i)
            edges.push_back({a.i * h.n + b.i, a.j * h.n + b.j, a.w * b.w});
            edges.push_back({a.i * h.n + b.j, a.j * h.n + b.i, a.w * b.w});
        }
    }
    return build_graph(g.n * h.n, edges);
}

std::string to_edge_list(const Graph& g) {
    std::ostringstream out;
    out << "n=" << g.n << '\n';
    for (const Edge& e : g.edges)
        out << e.i << ' ' << e.j << ' ' << format_double(e.w) << '\n';
    return out.str();
}

Graph from_edge_list(std::istream& in) {
    std::string line;
    int line_no = 0;
    int n = -1;
    std::vector<Edge> edges;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (n < 0) {
            if (line.rfind("n=", 0) != 0)
                throw ParseError("line 1: expected header n=<count>");
            n = static_cast<int>(parse_long(line.substr(2), line_no));
            continue;
        }
        std::istringstream ss(line);
        Edge e;
        if (!(ss >> e.i >> e.j >> e.w))
            throw ParseError("line " + std::to_string(line_no) + ": expected 'i j w'");
        edges.push_back(e);
    }
    if (n < 0) throw ParseError("missing n=<count> header");
    return build_graph(n, edges);
}

Graph from_edge_list(const std::string& text) {
    std::istringstream ss(text);
    return from_edge_list(ss);
}

std::vector<Eigen::VectorXd> read_coords_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    std::vector<std::pair<long, Eigen::VectorXd>> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        auto toks = split_csv_line(line);
        if (!header_seen) {
            if (toks.empty() || toks[0] != "id")
                throw ParseError("line 1: expected header starting with 'id'");
            header_seen = true;
            continue;
        }
        if (toks.size() < 2)
            throw ParseError("line " + std::to_string(line_no) + ": expected id plus coordinates");
        long id = parse_long(toks[0], line_no);
        Eigen::VectorXd x(static_cast<Eigen::Index>(toks.size()) - 1);
        for (size_t c = 1; c < toks.size(); ++c)
            x(static_cast<Eigen::Index>(c) - 1) = parse_double(toks[c], line_no);
        rows.emplace_back(id, std::move(x));
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Eigen::VectorXd> out;
    out.reserve(rows.size());
    for (auto& [id, x] : rows) out.push_back(std::move(x));
    return out;
}

} // namespace ggsp
