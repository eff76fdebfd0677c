#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"

namespace gtaxo::stats {

// Number of triangles through each node.
inline std::vector<std::size_t> node_triangles(const Graph& g) {
    std::vector<std::size_t> t(static_cast<std::size_t>(g.num_nodes()), 0);
    for (auto [u, v] : g.edges()) {
        auto a = g.neighbors(u), b = g.neighbors(v);
        auto i = a.begin(), j = b.begin();
        while (i != a.end() && j != b.end()) {
            if (*i < *j) {
                ++i;
            } else if (*j < *i) {
                ++j;
            } else {
                // each triangle (u,v,w) is seen once per edge; credit only w > v
                if (*i > v) {
                    ++t[u];
                    ++t[v];
                    ++t[*i];
                }
                ++i;
                ++j;
            }
        }
    }
    return t;
}

inline std::size_t triangle_count(const Graph& g) {
    std::size_t s = 0;
    for (auto t : node_triangles(g)) s += t;
    return s / 3;
}

inline std::vector<double> clustering_coefficient(const Graph& g) {
    const auto tri = node_triangles(g);
    std::vector<double> c(tri.size(), 0.0);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const double d = g.degree(v);
        if (d >= 2) c[v] = 2.0 * static_cast<double>(tri[v]) / (d * (d - 1.0));
    }
    return c;
}

inline double average_clustering(const Graph& g) {
    if (g.num_nodes() == 0) return 0.0;
    double s = 0.0;
    for (double c : clustering_coefficient(g)) s += c;
    return s / g.num_nodes();
}

inline double density(const Graph& g) {
    const double n = g.num_nodes();
    return n < 2 ? 0.0 : 2.0 * static_cast<double>(g.num_edges()) / (n * (n - 1.0));
}

// Mean shortest-path length over ordered pairs; requires a connected graph.
inline double avg_path_length(const Graph& g) {
    const NodeId n = g.num_nodes();
    if (n <= 1) return 0.0;
    double total = 0.0;
    for (NodeId s = 0; s < n; ++s) {
        const auto d = bfs_distances(g, s);
        for (NodeId t = 0; t < n; ++t) {
            if (d[t] < 0) throw InputError("avg_path_length: graph is disconnected");
            total += d[t];
        }
    }
    return total / (static_cast<double>(n) * (n - 1.0));
}

// Largest finite eccentricity; for disconnected graphs the maximum over
// components.
inline int diameter(const Graph& g) {
    int best = 0;
    for (NodeId s = 0; s < g.num_nodes(); ++s) {
        const auto d = bfs_distances(g, s);
        for (int x : d) best = std::max(best, x);
    }
    return best;
}

struct PageRankOptions {
    double damping = 0.85;
    double tol = 1e-10;
    int max_iterations = 1000;
};

// Power iteration; mass of isolated nodes is spread uniformly.
inline std::vector<double> pagerank(const Graph& g, const PageRankOptions& opt = {}) {
    if (!(opt.damping > 0.0 && opt.damping < 1.0)) throw InputError("pagerank: damping must lie in (0, 1)");
    const NodeId n = g.num_nodes();
    if (n == 0) return {};
    std::vector<double> r(static_cast<std::size_t>(n), 1.0 / n), next(static_cast<std::size_t>(n));
    for (int it = 0; it < opt.max_iterations; ++it) {
        double dangling = 0.0;
        for (NodeId v = 0; v < n; ++v)
            if (g.degree(v) == 0) dangling += r[v];
        const double base = (1.0 - opt.damping) / n + opt.damping * dangling / n;
        std::fill(next.begin(), next.end(), base);
        for (NodeId v = 0; v < n; ++v) {
            const int d = g.degree(v);
            if (d == 0) continue;
            const double share = opt.damping * r[v] / d;
            for (NodeId w : g.neighbors(v)) next[w] += share;
        }
        double sum = 0.0;
        for (double x : next) sum += x;
        double diff = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            next[v] /= sum;
            diff += std::abs(next[v] - r[v]);
        }
        r.swap(next);
        if (diff < opt.tol) break;
    }
    return r;
}

struct GraphStats {
    double num_nodes = 0;
    double num_edges = 0;
    double density = 0;
    double diameter = 0;
    double avg_clustering = 0;
    double triangles = 0;
};

inline GraphStats graph_stats(const Graph& g) {
    GraphStats s;
    s.num_nodes = g.num_nodes();
    s.num_edges = static_cast<double>(g.num_edges());
    s.density = density(g);
    s.diameter = diameter(g);
    s.avg_clustering = average_clustering(g);
    s.triangles = static_cast<double>(triangle_count(g));
    return s;
}

}  // namespace gtaxo::stats
