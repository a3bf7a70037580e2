#include "digraph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <string>

#include "errors.hpp"
#include "rng.hpp"

namespace rcpp {

Digraph::Digraph(int n) : n_(n) {
    if (n < 1) {
        throw InvalidArgument("digraph needs at least one node, got " +
                              std::to_string(n));
    }
}

void Digraph::add_edge(int from, int to) {
    if (from < 0 || from >= n_ || to < 0 || to >= n_) {
        throw InvalidArgument("edge (" + std::to_string(from) + ", " +
                              std::to_string(to) + ") out of range for " +
                              std::to_string(n_) + " nodes");
    }
    if (!edges_.insert({from, to}).second) {
        throw InvalidArgument("duplicate edge (" + std::to_string(from) + ", " +
                              std::to_string(to) + ")");
    }
}

bool Digraph::has_edge(int from, int to) const {
    return edges_.count({from, to}) > 0;
}

std::vector<int> Digraph::out_neighbors(int node) const {
    std::vector<int> out;
    for (const auto& [i, j] : edges_) {
        if (i == node) out.push_back(j);
    }
    return out;
}

std::vector<int> Digraph::in_neighbors(int node) const {
    std::vector<int> in;
    for (const auto& [i, j] : edges_) {
        if (j == node) in.push_back(i);
    }
    return in;
}

int Digraph::out_degree_excluding_self(int node) const {
    int deg = 0;
    for (const auto& [i, j] : edges_) {
        if (i == node && j != node) ++deg;
    }
    return deg;
}

Digraph Digraph::reversed() const {
    Digraph r(n_);
    for (const auto& [i, j] : edges_) r.add_edge(j, i);
    return r;
}

Digraph Digraph::with_self_loops() const {
    Digraph g = *this;
    for (int i = 0; i < n_; ++i) {
        if (!g.has_edge(i, i)) g.add_edge(i, i);
    }
    return g;
}

Digraph make_ring(int n, int extra_edges, std::uint64_t seed) {
    if (n < 1) {
        throw InvalidArgument("ring size must be positive, got " +
                              std::to_string(n));
    }
    const long long slots =
        static_cast<long long>(n) * (n - 1) - n;  // non-loop pairs minus cycle
    if (extra_edges < 0 || extra_edges > std::max(slots, 0LL)) {
        throw InvalidArgument("extra_edges must be in [0, " +
                              std::to_string(std::max(slots, 0LL)) + "], got " +
                              std::to_string(extra_edges));
    }

    Digraph g(n);
    for (int i = 0; i < n; ++i) {
        if (!g.has_edge(i, i)) g.add_edge(i, i);
        const int next = (i + 1) % n;
        if (!g.has_edge(i, next)) g.add_edge(i, next);
    }

    CounterRng rng(seed, 0, 0, Stream::kGraph);
    int added = 0;
    while (added < extra_edges) {
        const int i = static_cast<int>(rng.next_below(n));
        const int j = static_cast<int>(rng.next_below(n));
        if (i == j || g.has_edge(i, j)) continue;
        g.add_edge(i, j);
        ++added;
    }
    return g;
}

namespace {

// Nodes reachable from `start`, including `start` itself.
std::vector<bool> reachable_from(const Digraph& g, int start) {
    const int n = g.node_count();
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : g.edges()) adj[i].push_back(j);

    std::vector<bool> seen(n, false);
    std::deque<int> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
        const int u = queue.front();
        queue.pop_front();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    return seen;
}

}  // namespace

bool is_strongly_connected(const Digraph& g) {
    const int n = g.node_count();
    if (n <= 1) return true;
    const auto fwd = reachable_from(g, 0);
    for (bool b : fwd) {
        if (!b) return false;
    }
    const auto bwd = reachable_from(g.reversed(), 0);
    for (bool b : bwd) {
        if (!b) return false;
    }
    return true;
}

std::vector<int> root_set(const Digraph& g) {
    std::vector<int> roots;
    for (int i = 0; i < g.node_count(); ++i) {
        const auto seen = reachable_from(g, i);
        bool all = true;
        for (bool b : seen) {
            if (!b) {
                all = false;
                break;
            }
        }
        if (all) roots.push_back(i);
    }
    return roots;
}

void save_edge_list(const Digraph& g, std::ostream& out) {
    out << g.node_count() << "\n";
    for (const auto& [i, j] : g.edges()) out << i << " " << j << "\n";
}

void save_edge_list(const Digraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    save_edge_list(g, out);
    if (!out.good()) throw IoError("write failed for '" + path + "'");
}

Digraph load_edge_list(std::istream& in) {
    std::string line;
    int lineno = 0;
    long n = -1;
    Digraph g;
    std::vector<std::string> issues;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (n < 0) {
            if (!(ls >> n) || n < 1) {
                throw ParseError("edge list: first line must be a positive "
                                 "node count (line " +
                                     std::to_string(lineno) + ")",
                                 {});
            }
            g = Digraph(static_cast<int>(n));
            continue;
        }
        long i, j;
        if (!(ls >> i)) continue;  // blank or comment-only line
        if (!(ls >> j)) {
            issues.push_back("line " + std::to_string(lineno) +
                             ": expected 'i j'");
            continue;
        }
        try {
            g.add_edge(static_cast<int>(i), static_cast<int>(j));
        } catch (const InvalidArgument& e) {
            issues.push_back("line " + std::to_string(lineno) + ": " +
                             e.what());
        }
    }
    if (n < 0) throw ParseError("edge list: empty input", {});
    if (!issues.empty()) {
        std::string what = "edge list has " + std::to_string(issues.size()) +
                           " invalid line(s)";
        for (const auto& s : issues) what += "\n  " + s;
        throw ParseError(what, issues);
    }
    return g;
}

Digraph load_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return load_edge_list(in);
}

namespace {

// Left eigenvector of a row-stochastic M for eigenvalue 1 via power
// iteration on M^T; returns the fixed point normalized to sum 1.
// M^T preserves entry sums and nonnegativity, so the iterate stays a
// probability vector.
Eigen::VectorXd stationary_left(const Eigen::MatrixXd& M) {
    const int n = static_cast<int>(M.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
    constexpr double kTol = 1e-14;
    constexpr int kMaxIter = 100000;
    for (int it = 0; it < kMaxIter; ++it) {
        Eigen::VectorXd next = M.transpose() * v;
        const double res = (next - v).lpNorm<Eigen::Infinity>();
        v = next;
        if (res < kTol) return v;
    }
    throw PreconditionViolation(
        "power iteration for the stationary vector did not reach 1e-14 "
        "within 100000 steps");
}

}  // namespace

MixingPair build_mixing(const Digraph& g_R_in, const Digraph& g_C_in,
                        std::uint64_t seed, double perturb) {
    if (g_R_in.node_count() != g_C_in.node_count()) {
        throw InvalidArgument("mixing graphs must share the node count");
    }
    if (perturb < 0.0) {
        throw InvalidArgument("perturb must be nonnegative");
    }

    const auto roots_R = root_set(g_R_in);
    const auto roots_Ct = root_set(g_C_in.reversed());
    std::vector<int> common;
    std::set_intersection(roots_R.begin(), roots_R.end(), roots_Ct.begin(),
                          roots_Ct.end(), std::back_inserter(common));
    if (common.empty()) {
        throw PreconditionViolation(
            "mixing graphs admit no common spanning-tree root: the root set "
            "of the R-graph and the root set of the reversed C-graph do not "
            "intersect");
    }

    MixingPair mp;
    mp.graph_R = g_R_in.with_self_loops();
    mp.graph_C = g_C_in.with_self_loops();
    const int n = mp.graph_R.node_count();
    mp.R = Eigen::MatrixXd::Zero(n, n);
    mp.C = Eigen::MatrixXd::Zero(n, n);

    // R row i averages over in-neighbors (node i's received copies).
    CounterRng rng_R(seed, 0, 0, Stream::kMixingR);
    for (int i = 0; i < n; ++i) {
        const auto nbrs = mp.graph_R.in_neighbors(i);
        double total = 0.0;
        std::vector<double> w(nbrs.size());
        for (std::size_t t = 0; t < nbrs.size(); ++t) {
            w[t] = 1.0 + perturb * rng_R.next_uniform();
            total += w[t];
        }
        for (std::size_t t = 0; t < nbrs.size(); ++t) {
            mp.R(i, nbrs[t]) = w[t] / total;
        }
    }

    // C column j splits node j's mass over its out-neighbors.
    CounterRng rng_C(seed, 0, 0, Stream::kMixingC);
    for (int j = 0; j < n; ++j) {
        const auto nbrs = mp.graph_C.out_neighbors(j);
        double total = 0.0;
        std::vector<double> w(nbrs.size());
        for (std::size_t t = 0; t < nbrs.size(); ++t) {
            w[t] = 1.0 + perturb * rng_C.next_uniform();
            total += w[t];
        }
        for (std::size_t t = 0; t < nbrs.size(); ++t) {
            mp.C(nbrs[t], j) = w[t] / total;
        }
    }

    mp.u_R = stationary_left(mp.R) * static_cast<double>(n);
    mp.u_C = stationary_left(mp.C.transpose()) * static_cast<double>(n);

    if (mp.u_R.dot(mp.u_C) <= 0.0) {
        throw PreconditionViolation(
            "eigenvectors u_R and u_C have non-overlapping support despite a "
            "common root; mixing construction is inconsistent");
    }
    return mp;
}

}  // namespace rcpp
