#ifndef GGSP_GRAPH_HPP
#define GGSP_GRAPH_HPP

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ggsp {

struct Edge {
    int i = 0;
    int j = 0;
    double w = 1.0;
};

/// Weighted undirected graph. Edges are stored with i < j, sorted
/// lexicographically; weights are strictly positive and there are no
/// self-loops or duplicates (enforced by build_graph).
struct Graph {
    int n = 0;
    std::vector<Edge> edges;
};

struct GraphMatrices {
    Eigen::MatrixXd adjacency; // symmetric, zero diagonal
    Eigen::MatrixXd degree;    // diagonal, D_ii = sum_j W_ij
    Eigen::MatrixXd laplacian; // L = D - W
};

Graph build_graph(int n, const std::vector<Edge>& edges);

GraphMatrices graph_matrices(const Graph& g);

// Generators ---------------------------------------------------------------

struct CycleSpec { int t = 3; };
struct PathSpec  { int n = 1; };
struct ErdosRenyiSpec {
    int n = 1;
    double p = 0.5;
    std::uint64_t seed = 0;
    bool connected = false;
    int max_retries = 1000;
};
using GraphSpec = std::variant<CycleSpec, PathSpec, ErdosRenyiSpec>;

Graph cycle_graph(int t);
Graph path_graph(int n);
Graph erdos_renyi_graph(int n, double p, std::uint64_t seed, bool connected,
                        int max_retries = 1000);
Graph generate_graph(const GraphSpec& spec);

bool is_connected(const Graph& g);

// Data-driven builders -------------------------------------------------------

/// k-nearest-neighbour graph with union symmetrization. Edge weight is
/// exp(-d(i,j)^2 / sigma^2) with sigma^2 the population variance of all
/// pairwise distances.
Graph knn_graph(const std::vector<Eigen::VectorXd>& coords, int k);

/// Unit-weight edge (i,j) iff |pearson_corr(row_i, row_j)| > threshold.
/// `samples` is vertices x observations.
Graph correlation_graph(const Eigen::MatrixXd& samples, double threshold);

// Products -------------------------------------------------------------------

/// Cartesian product: adjacency W_g (x) I + I (x) W_h. Vertex (u, v) gets
/// index u * h.n + v.
Graph cartesian_product(const Graph& g, const Graph& h);

/// Tensor product: adjacency W_g (x) W_h, same vertex ordering.
Graph tensor_product(const Graph& g, const Graph& h);

// Serialization --------------------------------------------------------------

/// Edge-list text format: header "n=<count>", then one "i j w" line per edge.
std::string to_edge_list(const Graph& g);
Graph from_edge_list(std::istream& in);
Graph from_edge_list(const std::string& text);

/// Reads coordinates from a CSV with header "id,x,y" (any number of
/// coordinate columns after id); rows are sorted by id.
std::vector<Eigen::VectorXd> read_coords_csv(std::istream& in);

} // namespace ggsp

#endif // GGSP_GRAPH_HPP
