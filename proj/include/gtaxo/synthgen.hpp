#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"
#include "gtaxo/graph_stats.hpp"
#include "gtaxo/rng.hpp"
#include "gtaxo/splits.hpp"

namespace gtaxo::synth {

enum class Family { small_world, scale_free, sbm_pattern, sbm_cluster, synthie_like, syntheticnew_like };

inline std::string to_string(Family f) {
    switch (f) {
        case Family::small_world: return "small_world";
        case Family::scale_free: return "scale_free";
        case Family::sbm_pattern: return "sbm_pattern";
        case Family::sbm_cluster: return "sbm_cluster";
        case Family::synthie_like: return "synthie_like";
        case Family::syntheticnew_like: return "syntheticnew_like";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    for (auto f : {Family::small_world, Family::scale_free, Family::sbm_pattern, Family::sbm_cluster,
                   Family::synthie_like, Family::syntheticnew_like})
        if (to_string(f) == s) return f;
    throw UsageError("unknown generator family '" + s + "'");
}

// Generator parameters. Every family reads only the fields relevant to it;
// defaults() fills values giving shapes close to the reference benchmarks.
struct GenSpec {
    Family family = Family::small_world;
    std::uint64_t seed = 0;
    int num_graphs = 256;
    int nodes_per_graph = 64;
    int num_folds = 10;  // cross-validated families

    // Watts-Strogatz: even ring degree in [ws_k_min, ws_k_max], rewiring
    // probability log-uniform in [ws_p_min, ws_p_max].
    int ws_k_min = 8, ws_k_max = 36;
    double ws_p_min = 0.01, ws_p_max = 0.5;

    // Holme-Kim (Barabasi-Albert with triad formation).
    int ba_m_min = 3, ba_m_max = 14;
    double ba_triad_min = 0.0, ba_triad_max = 1.0;

    int max_retries = 50;

    // Stochastic block models (block sizes uniform in [min, max]).
    int sbm_blocks = 6;
    int sbm_block_min = 15, sbm_block_max = 25;
    double sbm_p_in = 0.5, sbm_p_out = 0.05;
    int pattern_size = 20;
    double pattern_p_in = 0.5, pattern_p_out = 0.5;
    int pattern_feature_width = 3;
    double train_frac = 0.8, val_frac = 0.1;

    // Synthie-like: two ER templates, perturbed copies, 10 sampled parts per graph.
    int synthie_template_nodes = 10;
    double synthie_er_p = 0.4;
    int synthie_set_size = 10;
    int synthie_edge_flips = 2;
    int synthie_parts = 10;
    int synthie_connectors = 16;
    double synthie_major_prob = 0.8;
    int synthie_feature_dim = 15;
    int synthie_vectors_per_set = 10;
    double synthie_feature_noise = 0.25;
    bool synthie_shared_features = false;

    // SYNTHETICnew-like: per-class edge moves and attribute swaps on one base graph.
    double er_p = 0.0396;
    int rewire_class0 = 5, rewire_class1 = 15;
    int permute_class0 = 15, permute_class1 = 5;
    double noise_sigma = 0.3;

    static GenSpec defaults(Family f) {
        GenSpec s;
        s.family = f;
        switch (f) {
            case Family::small_world:
            case Family::scale_free:
                s.num_graphs = 256;
                s.nodes_per_graph = 64;
                break;
            case Family::sbm_cluster:
                s.num_graphs = 200;
                s.sbm_blocks = 6;
                s.sbm_block_min = 15;
                s.sbm_block_max = 25;
                s.sbm_p_in = 0.5;
                s.sbm_p_out = 0.05;
                s.num_folds = 0;
                break;
            case Family::sbm_pattern:
                s.num_graphs = 200;
                s.sbm_blocks = 5;
                s.sbm_block_min = 15;
                s.sbm_block_max = 25;
                s.sbm_p_in = 0.5;
                s.sbm_p_out = 0.35;
                s.num_folds = 0;
                break;
            case Family::synthie_like:
                s.num_graphs = 400;
                s.nodes_per_graph = 100;
                break;
            case Family::syntheticnew_like:
                s.num_graphs = 300;
                s.nodes_per_graph = 100;
                break;
        }
        return s;
    }

    void validate() const {
        auto prob = [](double p, const char* what) {
            if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(what) + " must lie in [0, 1]");
        };
        prob(ws_p_min, "ws_p_min");
        prob(ws_p_max, "ws_p_max");
        prob(ba_triad_min, "ba_triad_min");
        prob(ba_triad_max, "ba_triad_max");
        prob(sbm_p_in, "sbm_p_in");
        prob(sbm_p_out, "sbm_p_out");
        prob(pattern_p_in, "pattern_p_in");
        prob(pattern_p_out, "pattern_p_out");
        prob(synthie_er_p, "synthie_er_p");
        prob(synthie_major_prob, "synthie_major_prob");
        prob(er_p, "er_p");
        if (nodes_per_graph < 2) throw InputError("nodes_per_graph must be >= 2");
        if (num_graphs < 1) throw InputError("num_graphs must be >= 1");
        if (sbm_block_min < 1 || sbm_block_max < sbm_block_min) throw InputError("invalid SBM block size range");
        if (family == Family::small_world && (ws_k_min < 2 || ws_k_max < ws_k_min || ws_k_max >= nodes_per_graph))
            throw InputError("invalid Watts-Strogatz degree range");
        if (family == Family::scale_free && (ba_m_min < 1 || ba_m_max < ba_m_min || ba_m_max >= nodes_per_graph))
            throw InputError("invalid Barabasi-Albert attachment range");
        if (num_folds != 0 && num_folds < 2) throw InputError("num_folds must be 0 or >= 2");
        if (noise_sigma < 0) throw InputError("noise_sigma must be non-negative");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["family"] = to_string(family);
        j["seed"] = seed;
        j["num_graphs"] = num_graphs;
        j["nodes_per_graph"] = nodes_per_graph;
        j["num_folds"] = num_folds;
        switch (family) {
            case Family::small_world:
                j["ws_k_range"] = {ws_k_min, ws_k_max};
                j["ws_p_range"] = {ws_p_min, ws_p_max};
                j["max_retries"] = max_retries;
                break;
            case Family::scale_free:
                j["ba_m_range"] = {ba_m_min, ba_m_max};
                j["ba_triad_range"] = {ba_triad_min, ba_triad_max};
                j["max_retries"] = max_retries;
                break;
            case Family::sbm_cluster:
            case Family::sbm_pattern:
                j["sbm_blocks"] = sbm_blocks;
                j["sbm_block_range"] = {sbm_block_min, sbm_block_max};
                j["sbm_p_in"] = sbm_p_in;
                j["sbm_p_out"] = sbm_p_out;
                if (family == Family::sbm_pattern) {
                    j["pattern_size"] = pattern_size;
                    j["pattern_p_in"] = pattern_p_in;
                    j["pattern_p_out"] = pattern_p_out;
                    j["pattern_feature_width"] = pattern_feature_width;
                }
                j["train_frac"] = train_frac;
                j["val_frac"] = val_frac;
                break;
            case Family::synthie_like:
                j["template_nodes"] = synthie_template_nodes;
                j["er_p"] = synthie_er_p;
                j["set_size"] = synthie_set_size;
                j["edge_flips"] = synthie_edge_flips;
                j["parts"] = synthie_parts;
                j["connectors"] = synthie_connectors;
                j["major_prob"] = synthie_major_prob;
                j["feature_dim"] = synthie_feature_dim;
                j["vectors_per_set"] = synthie_vectors_per_set;
                j["feature_noise"] = synthie_feature_noise;
                j["shared_features"] = synthie_shared_features;
                break;
            case Family::syntheticnew_like:
                j["er_p"] = er_p;
                j["rewire"] = {rewire_class0, rewire_class1};
                j["permute"] = {permute_class0, permute_class1};
                j["noise_sigma"] = noise_sigma;
                break;
        }
        return j;
    }
};

// ---------------------------------------------------------------------------
// Random graph models

namespace detail {

inline EdgeList erdos_renyi(NodeId n, double p, Rng& rng) {
    EdgeList e;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) e.emplace_back(u, v);
    return e;
}

// Ring lattice with k/2 neighbours per side; each edge (u, u+j) has its far
// end moved to a uniform non-neighbour with probability p.
inline EdgeList watts_strogatz(NodeId n, int k, double p, Rng& rng) {
    std::vector<std::set<NodeId>> adj(static_cast<std::size_t>(n));
    for (NodeId u = 0; u < n; ++u)
        for (int j = 1; j <= k / 2; ++j) {
            const NodeId v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    for (int j = 1; j <= k / 2; ++j) {
        for (NodeId u = 0; u < n; ++u) {
            const NodeId v = (u + j) % n;
            if (!adj[u].count(v) || !rng.bernoulli(p)) continue;
            if (static_cast<NodeId>(adj[u].size()) >= n - 1) continue;
            NodeId w;
            do {
                w = static_cast<NodeId>(rng.below(static_cast<std::uint64_t>(n)));
            } while (w == u || adj[u].count(w));
            adj[u].erase(v);
            adj[v].erase(u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    EdgeList e;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : adj[u])
            if (u < v) e.emplace_back(u, v);
    return e;
}

// Holme-Kim growth: each new node attaches m edges by preferential
// attachment, following each with a triad-closing step with probability pt.
inline EdgeList holme_kim(NodeId n, int m, double pt, Rng& rng) {
    std::vector<std::set<NodeId>> adj(static_cast<std::size_t>(n));
    std::vector<NodeId> repeated;  // node repeated once per unit of degree
    for (NodeId v = 0; v < m; ++v) repeated.push_back(v);
    auto add = [&](NodeId a, NodeId b) {
        adj[a].insert(b);
        adj[b].insert(a);
        repeated.push_back(a);
        repeated.push_back(b);
    };
    for (NodeId src = m; src < n; ++src) {
        std::set<NodeId> targets;
        while (static_cast<int>(targets.size()) < m) targets.insert(repeated[rng.below(repeated.size())]);
        std::vector<NodeId> pool(targets.begin(), targets.end());
        rng.shuffle(pool);
        NodeId target = pool.back();
        pool.pop_back();
        add(src, target);
        int count = 1;
        while (count < m) {
            if (rng.bernoulli(pt)) {
                std::vector<NodeId> nbh;
                for (NodeId w : adj[target])
                    if (w != src && !adj[src].count(w)) nbh.push_back(w);
                if (!nbh.empty()) {
                    add(src, nbh[rng.below(nbh.size())]);
                    ++count;
                    continue;
                }
            }
            while (!pool.empty() && adj[src].count(pool.back())) pool.pop_back();
            if (pool.empty()) break;
            target = pool.back();
            pool.pop_back();
            add(src, target);
            ++count;
        }
    }
    EdgeList e;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : adj[u])
            if (u < v) e.emplace_back(u, v);
    return e;
}

inline bool is_connected(NodeId n, const EdgeList& e) {
    if (n <= 1) return true;
    Graph g(n, e, FeatureMatrix(n, 0));
    return connected_components(g).members.size() == 1;
}

inline EdgeList sorted_unique(EdgeList e) {
    for (auto& x : e) x = canonical_edge(x.first, x.second);
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

inline Graph structural_feature_graph(NodeId n, EdgeList edges) {
    Graph g(n, sorted_unique(std::move(edges)), FeatureMatrix(n, 0));
    const auto cc = stats::clustering_coefficient(g);
    const auto pr = stats::pagerank(g);
    FeatureMatrix x(n, 2);
    for (NodeId v = 0; v < n; ++v) {
        x(v, 0) = cc[v];
        x(v, 1) = pr[v];
    }
    return g.with_features(std::move(x));
}

}  // namespace detail

// Decile bin edges of `values`; bin(v) = number of edges <= v.
inline std::vector<double> decile_edges(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    for (int j = 1; j < 10; ++j) edges.push_back(values[(values.size() * j) / 10]);
    return edges;
}

inline int decile_bin(const std::vector<double>& edges, double v) {
    return static_cast<int>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
}

namespace detail {

template <class MakeEdges>
Dataset path_length_dataset(const GenSpec& spec, const std::string& name, MakeEdges&& make) {
    spec.validate();
    Dataset ds;
    ds.name = name;
    ds.task = Task::graph_classification;
    ds.num_classes = 10;
    ds.num_folds = spec.num_folds;
    std::vector<double> apl;
    const NodeId n = spec.nodes_per_graph;
    for (int i = 0; i < spec.num_graphs; ++i) {
        Rng rng(derive_seed(spec.seed, {to_string(spec.family), i}));
        EdgeList e;
        bool ok = false;
        for (int attempt = 0; attempt <= spec.max_retries && !ok; ++attempt) {
            e = make(n, rng);
            ok = is_connected(n, e);
        }
        if (!ok) throw InputError(name + ": could not draw a connected graph within the retry limit");
        ds.graphs.push_back(structural_feature_graph(n, std::move(e)));
        apl.push_back(stats::avg_path_length(ds.graphs.back()));
    }
    const auto edges = decile_edges(apl);
    std::vector<int> labels;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        const int y = decile_bin(edges, apl[i]);
        labels.push_back(y);
        ds.graphs[i] = Graph(ds.graphs[i].num_nodes(), ds.graphs[i].edges(), ds.graphs[i].features(), {}, y);
    }
    ds.split = stratified_folds(labels, spec.num_folds, derive_seed(spec.seed, {"folds"}));
    return ds;
}

}  // namespace detail

// Watts-Strogatz graphs, features [clustering coefficient, PageRank], label =
// decile of average shortest-path length over the collection.
inline Dataset gen_small_world(const GenSpec& spec) {
    if (spec.family != Family::small_world) throw InputError("gen_small_world: wrong family");
    return detail::path_length_dataset(spec, "small_world", [&](NodeId n, Rng& rng) {
        const int kmin = (spec.ws_k_min + 1) / 2, kmax = spec.ws_k_max / 2;
        const int k = 2 * static_cast<int>(rng.integer(kmin, kmax));
        const double lp = rng.uniform(std::log(spec.ws_p_min), std::log(spec.ws_p_max));
        return detail::watts_strogatz(n, k, std::exp(lp), rng);
    });
}

inline Dataset gen_scale_free(const GenSpec& spec) {
    if (spec.family != Family::scale_free) throw InputError("gen_scale_free: wrong family");
    return detail::path_length_dataset(spec, "scale_free", [&](NodeId n, Rng& rng) {
        const int m = static_cast<int>(rng.integer(spec.ba_m_min, spec.ba_m_max));
        const double pt = rng.uniform(spec.ba_triad_min, spec.ba_triad_max);
        return detail::holme_kim(n, m, pt, rng);
    });
}

namespace detail {

struct SbmDraw {
    NodeId n = 0;
    std::vector<int> block;
    EdgeList edges;
};

inline SbmDraw draw_sbm(const GenSpec& spec, Rng& rng) {
    SbmDraw d;
    for (int b = 0; b < spec.sbm_blocks; ++b) {
        const auto size = rng.integer(spec.sbm_block_min, spec.sbm_block_max);
        for (std::int64_t i = 0; i < size; ++i) d.block.push_back(b);
    }
    // interleave block membership so node order carries no information
    rng.shuffle(d.block);
    d.n = static_cast<NodeId>(d.block.size());
    for (NodeId u = 0; u < d.n; ++u)
        for (NodeId v = u + 1; v < d.n; ++v)
            if (rng.bernoulli(d.block[u] == d.block[v] ? spec.sbm_p_in : spec.sbm_p_out)) d.edges.emplace_back(u, v);
    return d;
}

}  // namespace detail

// Semi-supervised clustering: one node per block reveals its block as a
// one-hot feature, every other node carries the extra "unlabeled" symbol.
// Revealed nodes are excluded from the labels that are scored.
inline Dataset gen_sbm_cluster(const GenSpec& spec) {
    if (spec.family != Family::sbm_cluster) throw InputError("gen_sbm_cluster: wrong family");
    spec.validate();
    Dataset ds;
    ds.name = "sbm_cluster";
    ds.task = Task::inductive_node_classification;
    ds.num_classes = spec.sbm_blocks;
    ds.num_folds = 0;
    const int width = spec.sbm_blocks + 1;
    for (int i = 0; i < spec.num_graphs; ++i) {
        Rng rng(derive_seed(spec.seed, {"sbm_cluster", i}));
        auto d = detail::draw_sbm(spec, rng);
        FeatureMatrix x = FeatureMatrix::Zero(d.n, width);
        std::vector<int> labels = d.block;
        for (NodeId v = 0; v < d.n; ++v) x(v, width - 1) = 1.0;
        for (int b = 0; b < spec.sbm_blocks; ++b) {
            std::vector<NodeId> members;
            for (NodeId v = 0; v < d.n; ++v)
                if (d.block[v] == b) members.push_back(v);
            const NodeId r = members[rng.below(members.size())];
            x(r, width - 1) = 0.0;
            x(r, b) = 1.0;
            labels[r] = -1;
        }
        ds.graphs.emplace_back(d.n, detail::sorted_unique(std::move(d.edges)), std::move(x), std::move(labels));
    }
    ds.split = random_split(ds.graphs.size(), spec.train_frac, spec.val_frac, derive_seed(spec.seed, {"split"}));
    return ds;
}

// SBM background plus a planted subgraph with its own connectivity; label 1
// marks pattern nodes. Features are uniform categorical one-hots.
inline Dataset gen_sbm_pattern(const GenSpec& spec) {
    if (spec.family != Family::sbm_pattern) throw InputError("gen_sbm_pattern: wrong family");
    spec.validate();
    Dataset ds;
    ds.name = "sbm_pattern";
    ds.task = Task::inductive_node_classification;
    ds.num_classes = 2;
    ds.num_folds = 0;
    for (int i = 0; i < spec.num_graphs; ++i) {
        Rng rng(derive_seed(spec.seed, {"sbm_pattern", i}));
        auto d = detail::draw_sbm(spec, rng);
        const NodeId nb = d.n;
        const NodeId n = nb + spec.pattern_size;
        EdgeList e = std::move(d.edges);
        for (NodeId u = nb; u < n; ++u) {
            for (NodeId v = u + 1; v < n; ++v)
                if (rng.bernoulli(spec.pattern_p_in)) e.emplace_back(u, v);
            for (NodeId v = 0; v < nb; ++v)
                if (rng.bernoulli(spec.pattern_p_out)) e.emplace_back(v, u);
        }
        // random relabelling so pattern nodes are not the trailing indices
        std::vector<NodeId> perm(static_cast<std::size_t>(n));
        for (NodeId v = 0; v < n; ++v) perm[v] = v;
        rng.shuffle(perm);
        for (auto& [a, b] : e) {
            a = perm[a];
            b = perm[b];
        }
        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        for (NodeId v = nb; v < n; ++v) labels[perm[v]] = 1;
        FeatureMatrix x = FeatureMatrix::Zero(n, spec.pattern_feature_width);
        for (NodeId v = 0; v < n; ++v) x(v, static_cast<Eigen::Index>(rng.below(spec.pattern_feature_width))) = 1.0;
        ds.graphs.emplace_back(n, detail::sorted_unique(std::move(e)), std::move(x), std::move(labels));
    }
    ds.split = random_split(ds.graphs.size(), spec.train_frac, spec.val_frac, derive_seed(spec.seed, {"split"}));
    return ds;
}

// Four classes from {structure mixture S1-heavy, S2-heavy} x {feature
// orientation}: parts drawn from S1 get vectors from set A and parts from S2
// from set B, or the reverse.
inline Dataset gen_synthie_like(const GenSpec& spec) {
    if (spec.family != Family::synthie_like) throw InputError("gen_synthie_like: wrong family");
    spec.validate();
    Dataset ds;
    ds.name = "synthie_like";
    ds.task = Task::graph_classification;
    ds.num_classes = 4;
    ds.num_folds = spec.num_folds;

    Rng base(derive_seed(spec.seed, {"synthie_like", "templates"}));
    const NodeId tn = spec.synthie_template_nodes;
    std::vector<EdgeList> templates = {detail::erdos_renyi(tn, spec.synthie_er_p, base),
                                       detail::erdos_renyi(tn, spec.synthie_er_p, base)};
    // S1, S2: perturbed copies of each template
    std::vector<std::vector<EdgeList>> sets(2);
    for (int s = 0; s < 2; ++s) {
        for (int c = 0; c < spec.synthie_set_size; ++c) {
            std::set<Edge> e(templates[s].begin(), templates[s].end());
            for (int f = 0; f < spec.synthie_edge_flips; ++f) {
                if (!e.empty()) {
                    auto it = e.begin();
                    std::advance(it, static_cast<long>(base.below(e.size())));
                    e.erase(it);
                }
                NodeId a, b;
                do {
                    a = static_cast<NodeId>(base.below(tn));
                    b = static_cast<NodeId>(base.below(tn));
                } while (a == b);
                e.insert(canonical_edge(a, b));
            }
            sets[s].emplace_back(e.begin(), e.end());
        }
    }
    const int dim = spec.synthie_feature_dim;
    auto vector_set = [&](double offset) {
        std::vector<Eigen::VectorXd> vs;
        Eigen::VectorXd centre(dim);
        for (int k = 0; k < dim; ++k) centre[k] = base.normal(offset, 1.0);
        for (int v = 0; v < spec.synthie_vectors_per_set; ++v) {
            Eigen::VectorXd x(dim);
            for (int k = 0; k < dim; ++k) x[k] = centre[k] + base.normal(0.0, 0.5);
            vs.push_back(std::move(x));
        }
        return vs;
    };
    const auto set_a = vector_set(0.0);
    const auto set_b = spec.synthie_shared_features ? set_a : vector_set(0.0);

    std::vector<int> labels;
    for (int i = 0; i < spec.num_graphs; ++i) {
        Rng rng(derive_seed(spec.seed, {"synthie_like", i}));
        const int label = i % 4;
        const bool s1_heavy = label < 2;
        const bool flipped = label % 2 == 1;
        EdgeList e;
        std::vector<int> part_set;
        std::vector<NodeId> part_start;
        NodeId n = 0;
        for (int p = 0; p < spec.synthie_parts; ++p) {
            const bool from_s1 = rng.bernoulli(s1_heavy ? spec.synthie_major_prob : 1.0 - spec.synthie_major_prob);
            const int s = from_s1 ? 0 : 1;
            const auto& part = sets[s][rng.below(sets[s].size())];
            for (auto [a, b] : part) e.emplace_back(a + n, b + n);
            part_set.push_back(s);
            part_start.push_back(n);
            n += tn;
        }
        part_start.push_back(n);
        // chain the parts together, then add random cross-part edges
        for (int p = 0; p + 1 < spec.synthie_parts; ++p)
            e.emplace_back(part_start[p] + static_cast<NodeId>(rng.below(tn)),
                           part_start[p + 1] + static_cast<NodeId>(rng.below(tn)));
        for (int c = 0; c < spec.synthie_connectors; ++c) {
            const NodeId a = static_cast<NodeId>(rng.below(n)), b = static_cast<NodeId>(rng.below(n));
            if (a / tn != b / tn) e.emplace_back(a, b);
        }
        FeatureMatrix x(n, dim);
        for (int p = 0; p < spec.synthie_parts; ++p) {
            const bool use_a = (part_set[p] == 0) != flipped;
            const auto& vs = use_a ? set_a : set_b;
            for (NodeId v = part_start[p]; v < part_start[p + 1]; ++v) {
                const auto& src = vs[rng.below(vs.size())];
                for (int k = 0; k < dim; ++k) x(v, k) = src[k] + rng.normal(0.0, spec.synthie_feature_noise);
            }
        }
        ds.graphs.emplace_back(n, detail::sorted_unique(std::move(e)), std::move(x), std::vector<int>{}, label);
        labels.push_back(label);
    }
    ds.split = stratified_folds(labels, spec.num_folds, derive_seed(spec.seed, {"folds"}));
    return ds;
}

// Two classes derived from one ER base graph with N(0,1) scalar attributes:
// each graph moves a class-specific number of edges to random non-edges and
// swaps a class-specific number of attribute pairs, then adds Gaussian noise.
inline Dataset gen_syntheticnew_like(const GenSpec& spec) {
    if (spec.family != Family::syntheticnew_like) throw InputError("gen_syntheticnew_like: wrong family");
    spec.validate();
    Dataset ds;
    ds.name = "syntheticnew_like";
    ds.task = Task::graph_classification;
    ds.num_classes = 2;
    ds.num_folds = spec.num_folds;
    const NodeId n = spec.nodes_per_graph;
    Rng base(derive_seed(spec.seed, {"syntheticnew_like", "base"}));
    const EdgeList base_edges = detail::erdos_renyi(n, spec.er_p, base);
    std::vector<double> base_x(static_cast<std::size_t>(n));
    for (auto& v : base_x) v = base.normal();

    std::vector<int> labels;
    for (int i = 0; i < spec.num_graphs; ++i) {
        Rng rng(derive_seed(spec.seed, {"syntheticnew_like", i}));
        const int label = i % 2;
        std::set<Edge> e(base_edges.begin(), base_edges.end());
        const int moves = label == 0 ? spec.rewire_class0 : spec.rewire_class1;
        const std::size_t max_edges = static_cast<std::size_t>(n) * (n - 1) / 2;
        for (int r = 0; r < moves && !e.empty() && e.size() < max_edges; ++r) {
            auto it = e.begin();
            std::advance(it, static_cast<long>(rng.below(e.size())));
            const Edge removed = *it;
            Edge added;
            do {
                NodeId a, b;
                do {
                    a = static_cast<NodeId>(rng.below(n));
                    b = static_cast<NodeId>(rng.below(n));
                } while (a == b);
                added = canonical_edge(a, b);
            } while (e.count(added));
            e.erase(removed);
            e.insert(added);
        }
        std::vector<double> xs = base_x;
        const int swaps = label == 0 ? spec.permute_class0 : spec.permute_class1;
        for (int s = 0; s < swaps; ++s) {
            const auto a = rng.below(n), b = rng.below(n);
            std::swap(xs[a], xs[b]);
        }
        FeatureMatrix x(n, 1);
        for (NodeId v = 0; v < n; ++v) x(v, 0) = xs[v] + rng.normal(0.0, spec.noise_sigma);
        ds.graphs.emplace_back(n, EdgeList(e.begin(), e.end()), std::move(x), std::vector<int>{}, label);
        labels.push_back(label);
    }
    ds.split = stratified_folds(labels, spec.num_folds, derive_seed(spec.seed, {"folds"}));
    return ds;
}

inline Dataset generate(const GenSpec& spec) {
    switch (spec.family) {
        case Family::small_world: return gen_small_world(spec);
        case Family::scale_free: return gen_scale_free(spec);
        case Family::sbm_pattern: return gen_sbm_pattern(spec);
        case Family::sbm_cluster: return gen_sbm_cluster(spec);
        case Family::synthie_like: return gen_synthie_like(spec);
        case Family::syntheticnew_like: return gen_syntheticnew_like(spec);
    }
    throw UsageError("unknown family");
}

}  // namespace gtaxo::synth
