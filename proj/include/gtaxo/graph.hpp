#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gtaxo/errors.hpp"

namespace gtaxo {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;
using EdgeList = std::vector<Edge>;
using FeatureMatrix = Eigen::MatrixXd;

inline Edge canonical_edge(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

// Undirected, unweighted, attributed simple graph. Immutable once built:
// perturbations return new graphs via with_edges()/with_features().
class Graph {
public:
    Graph() = default;

    // `edges` must already be canonical (u < v, sorted, unique); use
    // preprocess() for arbitrary input.
    Graph(NodeId num_nodes, EdgeList edges, FeatureMatrix features,
          std::vector<int> node_labels = {}, std::optional<int> graph_label = std::nullopt)
        : n_(num_nodes),
          edges_(std::move(edges)),
          x_(std::move(features)),
          node_labels_(std::move(node_labels)),
          graph_label_(graph_label) {
        if (n_ < 0) throw InputError("negative node count");
        if (x_.rows() != n_) {
            if (x_.size() == 0 && x_.rows() == 0) {
                x_.resize(n_, 0);
            } else {
                throw InputError("feature matrix has " + std::to_string(x_.rows()) + " rows, expected " +
                                 std::to_string(n_));
            }
        }
        if (!node_labels_.empty() && static_cast<NodeId>(node_labels_.size()) != n_)
            throw InputError("node label count does not match node count");
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const auto [u, v] = edges_[i];
            if (u < 0 || v >= n_ || u >= v)
                throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) + ") is not canonical");
            if (i > 0 && !(edges_[i - 1] < edges_[i])) throw InputError("edge list not sorted or has duplicates");
        }
        build_adjacency();
    }

    NodeId num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    Eigen::Index feature_dim() const noexcept { return x_.cols(); }

    const EdgeList& edges() const noexcept { return edges_; }
    const FeatureMatrix& features() const noexcept { return x_; }
    const std::vector<int>& node_labels() const noexcept { return node_labels_; }
    std::optional<int> graph_label() const noexcept { return graph_label_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {adj_.data() + offsets_[v], adj_.data() + offsets_[v + 1]};
    }
    int degree(NodeId v) const { return static_cast<int>(offsets_[v + 1] - offsets_[v]); }

    std::vector<int> degrees() const {
        std::vector<int> d(static_cast<std::size_t>(n_));
        for (NodeId v = 0; v < n_; ++v) d[v] = degree(v);
        return d;
    }

    bool has_edge(NodeId u, NodeId v) const {
        if (u == v) return false;
        auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    Graph with_edges(EdgeList edges) const {
        for (auto& e : edges) e = canonical_edge(e.first, e.second);
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        return Graph(n_, std::move(edges), x_, node_labels_, graph_label_);
    }

    Graph with_features(FeatureMatrix x) const { return Graph(n_, edges_, std::move(x), node_labels_, graph_label_); }

    Graph with_node_labels(std::vector<int> labels) const {
        return Graph(n_, edges_, x_, std::move(labels), graph_label_);
    }

    Eigen::MatrixXd adjacency_dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
        for (auto [u, v] : edges_) m(u, v) = m(v, u) = 1.0;
        return m;
    }

private:
    void build_adjacency() {
        offsets_.assign(static_cast<std::size_t>(n_) + 1, 0);
        for (auto [u, v] : edges_) {
            ++offsets_[u + 1];
            ++offsets_[v + 1];
        }
        for (NodeId i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
        adj_.resize(2 * edges_.size());
        std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
        for (auto [u, v] : edges_) {
            adj_[fill[u]++] = v;
            adj_[fill[v]++] = u;
        }
        // Edges are sorted, so v's list of smaller neighbours is sorted but
        // interleaved with larger ones; sort each row.
        for (NodeId i = 0; i < n_; ++i) std::sort(adj_.begin() + offsets_[i], adj_.begin() + offsets_[i + 1]);
    }

    NodeId n_ = 0;
    EdgeList edges_;
    FeatureMatrix x_;
    std::vector<int> node_labels_;
    std::optional<int> graph_label_;
    std::vector<std::size_t> offsets_{0};
    std::vector<NodeId> adj_;
};

// Input as read from disk: possibly directed, duplicated, self-looped,
// weighted, and keyed by external node ids.
struct RawGraph {
    std::int64_t num_nodes = 0;
    std::vector<std::pair<std::int64_t, std::int64_t>> edges;
    std::vector<double> edge_weights;  // discarded
    FeatureMatrix features;
    std::vector<int> node_labels;
    std::optional<int> graph_label;
    std::vector<std::int64_t> external_ids;  // empty => edges use 0..n-1
};

struct PreprocessReport {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_merged = 0;
    std::vector<std::int64_t> external_ids;  // dense index -> external id
};

inline Graph preprocess(const RawGraph& raw, PreprocessReport* report = nullptr) {
    const auto n = raw.num_nodes;
    if (n < 0 || n > INT32_MAX) throw InputError("invalid node count");
    std::vector<std::pair<std::int64_t, NodeId>> id_map;
    if (!raw.external_ids.empty()) {
        if (static_cast<std::int64_t>(raw.external_ids.size()) != n)
            throw InputError("external id list length does not match node count");
        for (NodeId i = 0; i < n; ++i) id_map.emplace_back(raw.external_ids[i], i);
        std::sort(id_map.begin(), id_map.end());
        for (std::size_t i = 1; i < id_map.size(); ++i)
            if (id_map[i].first == id_map[i - 1].first) throw InputError("duplicate external node id");
    }
    auto resolve = [&](std::int64_t id) -> NodeId {
        if (id_map.empty()) {
            if (id < 0 || id >= n) throw InputError("node index " + std::to_string(id) + " out of range [0," +
                                                    std::to_string(n) + ")");
            return static_cast<NodeId>(id);
        }
        auto it = std::lower_bound(id_map.begin(), id_map.end(), std::pair<std::int64_t, NodeId>{id, INT32_MIN});
        if (it == id_map.end() || it->first != id) throw InputError("unknown external node id " + std::to_string(id));
        return it->second;
    };

    PreprocessReport rep;
    EdgeList edges;
    edges.reserve(raw.edges.size());
    for (auto [a, b] : raw.edges) {
        const NodeId u = resolve(a), v = resolve(b);
        if (u == v) {
            ++rep.self_loops_dropped;
            continue;
        }
        edges.push_back(canonical_edge(u, v));
    }
    std::sort(edges.begin(), edges.end());
    const auto before = edges.size();
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    rep.duplicates_merged = before - edges.size();
    rep.external_ids = raw.external_ids;
    if (report) *report = std::move(rep);
    FeatureMatrix x = raw.features;
    if (x.rows() == 0 && x.cols() == 0) x.resize(n, 0);
    return Graph(static_cast<NodeId>(n), std::move(edges), std::move(x), raw.node_labels, raw.graph_label);
}

inline RawGraph to_raw(const Graph& g) {
    RawGraph r;
    r.num_nodes = g.num_nodes();
    for (auto [u, v] : g.edges()) r.edges.emplace_back(u, v);
    r.features = g.features();
    r.node_labels = g.node_labels();
    r.graph_label = g.graph_label();
    return r;
}

// Component id per node (ids in order of smallest member) plus member lists.
struct Components {
    std::vector<int> component_of;
    std::vector<std::vector<NodeId>> members;
};

inline Components connected_components(const Graph& g) {
    Components c;
    const NodeId n = g.num_nodes();
    c.component_of.assign(static_cast<std::size_t>(n), -1);
    std::vector<NodeId> stack;
    for (NodeId s = 0; s < n; ++s) {
        if (c.component_of[s] >= 0) continue;
        const int id = static_cast<int>(c.members.size());
        c.members.emplace_back();
        c.component_of[s] = id;
        stack.push_back(s);
        while (!stack.empty()) {
            const NodeId v = stack.back();
            stack.pop_back();
            c.members[id].push_back(v);
            for (NodeId w : g.neighbors(v)) {
                if (c.component_of[w] < 0) {
                    c.component_of[w] = id;
                    stack.push_back(w);
                }
            }
        }
        std::sort(c.members[id].begin(), c.members[id].end());
    }
    return c;
}

// BFS distances from `source`; -1 for unreachable. `allowed`, when given,
// restricts the search to nodes with allowed[v] == true.
inline std::vector<int> bfs_distances(const Graph& g, NodeId source, int max_depth = -1,
                                      const std::vector<char>* allowed = nullptr) {
    std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), -1);
    std::queue<NodeId> q;
    dist[source] = 0;
    q.push(source);
    while (!q.empty()) {
        const NodeId v = q.front();
        q.pop();
        if (max_depth >= 0 && dist[v] >= max_depth) continue;
        for (NodeId w : g.neighbors(v)) {
            if (dist[w] >= 0) continue;
            if (allowed && !(*allowed)[w]) continue;
            dist[w] = dist[v] + 1;
            q.push(w);
        }
    }
    return dist;
}

// All nodes within `k` hops of `seed` (seed included), sorted.
inline std::vector<NodeId> k_hop_ball(const Graph& g, NodeId seed, int k) {
    if (seed < 0 || seed >= g.num_nodes()) throw InputError("seed node out of range");
    if (k < 0) throw InputError("k must be non-negative");
    const auto dist = bfs_distances(g, seed, k);
    std::vector<NodeId> ball;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (dist[v] >= 0) ball.push_back(v);
    return ball;
}

enum class Task { graph_classification, inductive_node_classification, transductive_node_classification };

inline std::string to_string(Task t) {
    switch (t) {
        case Task::graph_classification: return "graph-classification";
        case Task::inductive_node_classification: return "inductive-node-classification";
        case Task::transductive_node_classification: return "transductive-node-classification";
    }
    return "?";
}

inline Task parse_task(const std::string& s) {
    if (s == "graph-classification") return Task::graph_classification;
    if (s == "inductive-node-classification") return Task::inductive_node_classification;
    if (s == "transductive-node-classification") return Task::transductive_node_classification;
    throw InputError("unknown task '" + s + "'");
}

inline bool is_node_task(Task t) { return t != Task::graph_classification; }

// Split values: with predefined splits (num_folds == 0) one of SplitTag; with
// k-fold cross-validation the fold index in [0, num_folds). -1 = unassigned.
enum SplitTag : int { split_none = -1, split_train = 0, split_val = 1, split_test = 2 };

struct Dataset {
    std::string name;
    Task task = Task::graph_classification;
    int num_classes = 0;
    int num_folds = 0;
    std::vector<Graph> graphs;
    // Per graph for inductive tasks, per node of graphs[0] for transductive.
    std::vector<int> split;

    bool predefined_splits() const noexcept { return num_folds == 0; }

    std::size_t num_entities() const {
        if (task == Task::transductive_node_classification) return graphs.empty() ? 0 : graphs[0].num_nodes();
        return graphs.size();
    }

    void validate() const {
        if (num_classes < 1) throw InputError(name + ": num_classes must be >= 1");
        if (num_folds < 0 || num_folds == 1) throw InputError(name + ": num_folds must be 0 or >= 2");
        if (task == Task::transductive_node_classification && graphs.size() != 1)
            throw InputError(name + ": transductive datasets hold exactly one graph");
        if (split.size() != num_entities()) throw InputError(name + ": split length does not match entity count");
        const int hi = predefined_splits() ? split_test : num_folds - 1;
        for (int s : split)
            if (s < -1 || s > hi) throw InputError(name + ": split value " + std::to_string(s) + " out of range");
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            const auto& g = graphs[i];
            if (task == Task::graph_classification) {
                if (!g.graph_label()) throw InputError(name + ": graph " + std::to_string(i) + " has no label");
                if (*g.graph_label() < 0 || *g.graph_label() >= num_classes)
                    throw InputError(name + ": graph label out of range");
            } else {
                if (static_cast<NodeId>(g.node_labels().size()) != g.num_nodes())
                    throw InputError(name + ": graph " + std::to_string(i) + " lacks node labels");
                for (int y : g.node_labels())
                    if (y < -1 || y >= num_classes) throw InputError(name + ": node label out of range");
            }
        }
    }

    Dataset with_graphs(std::vector<Graph> gs) const {
        Dataset d = *this;
        d.graphs = std::move(gs);
        return d;
    }
};

}  // namespace gtaxo
