#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <utility>
#include <vector>

namespace rcpp {

// Directed communication graph. An edge (i, j) means node i transmits to
// node j. Self-loops are permitted; duplicate edges are not.
class Digraph {
public:
    Digraph() = default;
    explicit Digraph(int n);

    int node_count() const { return n_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }

    // Throws InvalidArgument on out-of-range endpoints or duplicates.
    void add_edge(int from, int to);
    bool has_edge(int from, int to) const;

    // Edges in deterministic (lexicographic) order.
    const std::set<std::pair<int, int>>& edges() const { return edges_; }

    std::vector<int> out_neighbors(int node) const;
    std::vector<int> in_neighbors(int node) const;
    // Out-degree not counting a self-loop; the per-transmission count used
    // for bit accounting.
    int out_degree_excluding_self(int node) const;

    Digraph reversed() const;
    // Same graph with every self-loop present.
    Digraph with_self_loops() const;

    bool operator==(const Digraph& other) const = default;

private:
    int n_ = 0;
    std::set<std::pair<int, int>> edges_;
};

// Directed cycle 0->1->...->(n-1)->0 plus all self-loops plus `extra_edges`
// distinct random chords; strongly connected by construction.
Digraph make_ring(int n, int extra_edges, std::uint64_t seed);

bool is_strongly_connected(const Digraph& g);

// Nodes with a directed path to every node (spanning-tree roots), ascending.
std::vector<int> root_set(const Digraph& g);

// Plain-text edge list: first line `n`, then one `i j` line per edge.
void save_edge_list(const Digraph& g, std::ostream& out);
void save_edge_list(const Digraph& g, const std::string& path);
Digraph load_edge_list(std::istream& in);
Digraph load_edge_list_file(const std::string& path);

// Row-stochastic R paired with column-stochastic C on their support graphs,
// together with the eigenvectors u_R (left, of R) and u_C (right, of C),
// both normalized to sum n.
struct MixingPair {
    Eigen::MatrixXd R;
    Eigen::MatrixXd C;
    Eigen::VectorXd u_R;
    Eigen::VectorXd u_C;
    Digraph graph_R;  // support of R, self-loops included
    Digraph graph_C;  // support of C, self-loops included
};

// Builds the mixing pair over the two graphs (self-loops added if absent).
// Weights are uniform over each neighborhood, optionally perturbed by
// seeded positive noise of amplitude `perturb` and renormalized.
//
// Requires root_set(g_R) and root_set(reversed(g_C)) to intersect; throws
// PreconditionViolation otherwise.
MixingPair build_mixing(const Digraph& g_R, const Digraph& g_C,
                        std::uint64_t seed, double perturb = 0.0);

}  // namespace rcpp
