#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"
#include "gtaxo/rng.hpp"
#include "gtaxo/spectral.hpp"

namespace gtaxo::perturb {

using spectral::Band;

enum class Kind {
    original,
    low_pass,
    mid_pass,
    high_pass,
    no_node_ftrs,
    node_deg,
    rand_ftrs,
    rand_rewire,
    no_edges,
    fully_conn,
    frag_k,
    fiedler_frag,
};

enum class BandpassMode { hard, wavelet, automatic };

inline std::string to_string(BandpassMode m) {
    switch (m) {
        case BandpassMode::hard: return "hard";
        case BandpassMode::wavelet: return "wavelet";
        case BandpassMode::automatic: return "auto";
    }
    return "?";
}

inline BandpassMode parse_mode(const std::string& s) {
    if (s == "hard") return BandpassMode::hard;
    if (s == "wavelet") return BandpassMode::wavelet;
    if (s == "auto") return BandpassMode::automatic;
    throw UsageError("unknown band-pass mode '" + s + "'");
}

struct Perturbation {
    Kind kind = Kind::original;
    int k = 0;  // Frag-k only
    BandpassMode mode = BandpassMode::automatic;

    std::string name() const {
        switch (kind) {
            case Kind::original: return "Original";
            case Kind::low_pass: return "LowPass";
            case Kind::mid_pass: return "MidPass";
            case Kind::high_pass: return "HighPass";
            case Kind::no_node_ftrs: return "NoNodeFtrs";
            case Kind::node_deg: return "NodeDeg";
            case Kind::rand_ftrs: return "RandFtrs";
            case Kind::rand_rewire: return "RandRewire";
            case Kind::no_edges: return "NoEdges";
            case Kind::fully_conn: return "FullyConn";
            case Kind::frag_k: return "Frag-k" + std::to_string(k);
            case Kind::fiedler_frag: return "FiedlerFrag";
        }
        return "?";
    }

    bool stochastic() const { return kind == Kind::rand_ftrs || kind == Kind::rand_rewire || kind == Kind::frag_k; }
    bool alters_structure() const {
        return kind == Kind::rand_rewire || kind == Kind::no_edges || kind == Kind::fully_conn ||
               kind == Kind::frag_k || kind == Kind::fiedler_frag;
    }
    bool is_bandpass() const { return kind == Kind::low_pass || kind == Kind::mid_pass || kind == Kind::high_pass; }

    friend bool operator==(const Perturbation& a, const Perturbation& b) {
        return a.kind == b.kind && a.k == b.k;
    }
};

// Accepts the display names ("Frag-k2", "LowPass", ...) and "FragK" with an
// explicit k.
inline Perturbation parse_perturbation(const std::string& name, int k = 0) {
    static const std::pair<const char*, Kind> table[] = {
        {"Original", Kind::original},       {"LowPass", Kind::low_pass},       {"MidPass", Kind::mid_pass},
        {"HighPass", Kind::high_pass},      {"NoNodeFtrs", Kind::no_node_ftrs}, {"NodeDeg", Kind::node_deg},
        {"RandFtrs", Kind::rand_ftrs},      {"RandRewire", Kind::rand_rewire}, {"NoEdges", Kind::no_edges},
        {"FullyConn", Kind::fully_conn},    {"FiedlerFrag", Kind::fiedler_frag},
    };
    for (auto [n, kind] : table)
        if (name == n) return Perturbation{kind};
    if (name == "FragK" || name == "Frag-k") {
        if (k < 1) throw UsageError("FragK requires k >= 1");
        return Perturbation{Kind::frag_k, k};
    }
    if (name.rfind("Frag-k", 0) == 0 && name.size() > 6) {
        try {
            const int kk = std::stoi(name.substr(6));
            if (kk >= 1) return Perturbation{Kind::frag_k, kk};
        } catch (const std::exception&) {
        }
    }
    throw UsageError("unknown perturbation '" + name + "'");
}

// The 13 perturbations in display order (without Original).
inline std::vector<Perturbation> standard_perturbations() {
    return {{Kind::low_pass},      {Kind::mid_pass},   {Kind::high_pass},  {Kind::no_node_ftrs}, {Kind::node_deg},
            {Kind::rand_ftrs},     {Kind::rand_rewire}, {Kind::no_edges},  {Kind::fully_conn},   {Kind::frag_k, 1},
            {Kind::frag_k, 2},     {Kind::frag_k, 3},  {Kind::fiedler_frag}};
}

// ---------------------------------------------------------------------------
// Node feature perturbations

inline Graph no_node_ftrs(const Graph& g) { return g.with_features(FeatureMatrix::Ones(g.num_nodes(), 1)); }

// One-hot of min(degree, cap); width cap + 1.
inline Graph node_deg(const Graph& g, int cap) {
    if (cap < 0) throw InputError("node_deg: cap must be non-negative");
    FeatureMatrix x = FeatureMatrix::Zero(g.num_nodes(), cap + 1);
    for (NodeId v = 0; v < g.num_nodes(); ++v) x(v, std::min(g.degree(v), cap)) = 1.0;
    return g.with_features(std::move(x));
}

inline Graph rand_ftrs(const Graph& g, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix x(g.num_nodes(), 1);
    for (NodeId v = 0; v < g.num_nodes(); ++v) x(v, 0) = rng.uniform(-1.0, 1.0);
    return g.with_features(std::move(x));
}

inline bool uses_hard_path(const Graph& g, BandpassMode mode, Eigen::Index limit) {
    switch (mode) {
        case BandpassMode::hard: return true;
        case BandpassMode::wavelet: return false;
        case BandpassMode::automatic: return g.num_nodes() <= limit;
    }
    return false;
}

inline Graph bandpass(const Graph& g, Band band, BandpassMode mode = BandpassMode::automatic,
                      Eigen::Index limit = spectral::dense_limit()) {
    if (g.feature_dim() == 0) throw UnsupportedPerturbation("band-pass filtering needs node features (d = 0)");
    if (g.num_nodes() == 0) return g;
    if (uses_hard_path(g, mode, limit)) {
        const auto dec = spectral::decompose(g, spectral::LaplacianKind::normalized, limit);
        return g.with_features(spectral::hard_bandpass(g.features(), dec, band));
    }
    return g.with_features(spectral::wavelet_filter(g.features(), g, band));
}

// ---------------------------------------------------------------------------
// Structure perturbations

inline Graph no_edges(const Graph& g) { return g.with_edges({}); }

inline constexpr NodeId default_fully_conn_guard = 10000;

inline Graph fully_conn(const Graph& g, NodeId guard = std::numeric_limits<NodeId>::max()) {
    const NodeId n = g.num_nodes();
    if (n > guard)
        throw ResourceError("FullyConn refused: " + std::to_string(n) + " nodes exceeds guard " +
                            std::to_string(guard));
    EdgeList e;
    e.reserve(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v) e.emplace_back(u, v);
    return g.with_edges(std::move(e));
}

enum class RewireStatus { quota_met, no_legal_swap, budget_exhausted, too_few_edges };

inline std::string to_string(RewireStatus s) {
    switch (s) {
        case RewireStatus::quota_met: return "quota met";
        case RewireStatus::no_legal_swap: return "no legal swap";
        case RewireStatus::budget_exhausted: return "attempt budget exhausted";
        case RewireStatus::too_few_edges: return "fewer than two edges";
    }
    return "?";
}

struct RewireResult {
    Graph graph;
    std::size_t quota = 0;
    std::size_t rewired = 0;
    RewireStatus status = RewireStatus::quota_met;
    EdgeList unrewired;  // edges still eligible when the procedure stopped
};

struct RewireOptions {
    double fraction = 0.5;
    std::size_t rejection_budget_per_edge = 20;
    // Once the random budget is spent, pools up to this size are searched
    // exhaustively for a remaining legal swap.
    std::size_t exhaustive_limit = 4096;
};

// Degree-preserving double-edge swaps over not-yet-rewired edges until
// ceil(fraction * |E|) edges are rewired. A swap of (a,b),(c,d) yields either
// (a,c),(b,d) or (a,d),(b,c); swaps creating a self-loop or an existing edge
// are rejected.
inline RewireResult rand_rewire(const Graph& g, std::uint64_t seed, const RewireOptions& opt = {}) {
    if (!(opt.fraction > 0.0 && opt.fraction <= 1.0)) throw InputError("rewire fraction must lie in (0, 1]");
    RewireResult res;
    const std::size_t m = g.num_edges();
    res.quota = static_cast<std::size_t>(std::ceil(opt.fraction * static_cast<double>(m)));
    if (m < 2) {
        res.graph = g;
        res.status = RewireStatus::too_few_edges;
        res.unrewired = g.edges();
        return res;
    }
    const auto n = static_cast<std::uint64_t>(g.num_nodes());
    auto key = [n](NodeId a, NodeId b) {
        auto e = canonical_edge(a, b);
        return static_cast<std::uint64_t>(e.first) * n + static_cast<std::uint64_t>(e.second);
    };
    EdgeList edges = g.edges();
    std::unordered_set<std::uint64_t> present;
    present.reserve(2 * m);
    for (auto [u, v] : edges) present.insert(key(u, v));
    std::vector<std::size_t> pool(m);
    for (std::size_t i = 0; i < m; ++i) pool[i] = i;

    auto legal = [&](const Edge& e1, const Edge& e2, bool cross, Edge& n1, Edge& n2) {
        const NodeId a = e1.first, b = e1.second;
        const NodeId c = cross ? e2.second : e2.first;
        const NodeId d = cross ? e2.first : e2.second;
        if (a == c || b == d) return false;
        if (present.count(key(a, c)) || present.count(key(b, d))) return false;
        n1 = canonical_edge(a, c);
        n2 = canonical_edge(b, d);
        return true;
    };
    auto apply = [&](std::size_t pi, std::size_t pj, const Edge& n1, const Edge& n2) {
        const std::size_t ei = pool[pi], ej = pool[pj];
        present.erase(key(edges[ei].first, edges[ei].second));
        present.erase(key(edges[ej].first, edges[ej].second));
        edges[ei] = n1;
        edges[ej] = n2;
        present.insert(key(n1.first, n1.second));
        present.insert(key(n2.first, n2.second));
        const std::size_t hi = std::max(pi, pj), lo = std::min(pi, pj);
        pool[hi] = pool.back();
        pool.pop_back();
        pool[lo] = pool.back();
        pool.pop_back();
        res.rewired += 2;
    };

    Rng rng(seed);
    const std::size_t budget = opt.rejection_budget_per_edge * m;
    std::size_t rejections = 0;
    bool exhaustive = false;
    res.status = RewireStatus::quota_met;
    while (res.rewired < res.quota) {
        if (pool.size() < 2) {
            res.status = RewireStatus::no_legal_swap;
            break;
        }
        if (!exhaustive) {
            const std::size_t pi = rng.below(pool.size());
            std::size_t pj = rng.below(pool.size() - 1);
            if (pj >= pi) ++pj;
            const bool cross = rng.below(2) == 1;
            Edge n1, n2;
            if (legal(edges[pool[pi]], edges[pool[pj]], cross, n1, n2)) {
                apply(pi, pj, n1, n2);
                continue;
            }
            if (++rejections < budget) continue;
            if (pool.size() > opt.exhaustive_limit) {
                res.status = RewireStatus::budget_exhausted;
                break;
            }
            exhaustive = true;
        }
        struct Candidate {
            std::size_t pi, pj;
            Edge n1, n2;
        };
        std::vector<Candidate> cands;
        for (std::size_t pi = 0; pi < pool.size(); ++pi)
            for (std::size_t pj = pi + 1; pj < pool.size(); ++pj)
                for (bool cross : {false, true}) {
                    Edge n1, n2;
                    if (legal(edges[pool[pi]], edges[pool[pj]], cross, n1, n2)) cands.push_back({pi, pj, n1, n2});
                }
        if (cands.empty()) {
            res.status = RewireStatus::no_legal_swap;
            break;
        }
        const auto& c = cands[rng.below(cands.size())];
        apply(c.pi, c.pj, c.n1, c.n2);
    }
    for (std::size_t i : pool) res.unrewired.push_back(edges[i]);
    std::sort(res.unrewired.begin(), res.unrewired.end());
    res.graph = g.with_edges(std::move(edges));
    return res;
}

struct FragmentResult {
    Graph graph;
    std::vector<int> fragment_of;  // fragment index per node
    std::vector<NodeId> seeds;     // seed of each fragment, in draw order
};

// Repeatedly draw a seed uniformly from unassigned nodes, take its k-hop ball
// within the unassigned remainder as a fragment, and cut every edge leaving it.
inline FragmentResult frag_k(const Graph& g, int k, std::uint64_t seed) {
    if (k < 1) throw InputError("Frag-k requires k >= 1");
    const NodeId n = g.num_nodes();
    FragmentResult res;
    res.fragment_of.assign(static_cast<std::size_t>(n), -1);
    std::vector<char> unassigned(static_cast<std::size_t>(n), 1);
    std::vector<NodeId> remaining(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) remaining[v] = v;
    Rng rng(seed);
    int frag = 0;
    while (!remaining.empty()) {
        const NodeId s = remaining[rng.below(remaining.size())];
        const auto dist = bfs_distances(g, s, k, &unassigned);
        for (NodeId v = 0; v < n; ++v) {
            if (dist[v] >= 0) {
                res.fragment_of[v] = frag;
                unassigned[v] = 0;
            }
        }
        res.seeds.push_back(s);
        ++frag;
        std::erase_if(remaining, [&](NodeId v) { return !unassigned[v]; });
    }
    EdgeList kept;
    for (auto e : g.edges())
        if (res.fragment_of[e.first] == res.fragment_of[e.second]) kept.push_back(e);
    res.graph = g.with_edges(std::move(kept));
    return res;
}

// |E(U,W)| / (|U| |W|)
inline double ratio_cut_objective(const Graph& g, const std::vector<NodeId>& u, const std::vector<NodeId>& w) {
    if (u.empty() || w.empty()) throw InputError("ratio cut: both sides must be non-empty");
    std::vector<signed char> side(static_cast<std::size_t>(g.num_nodes()), 0);
    for (NodeId v : u) {
        if (v < 0 || v >= g.num_nodes() || side[v]) throw InputError("ratio cut: invalid node in U");
        side[v] = 1;
    }
    for (NodeId v : w) {
        if (v < 0 || v >= g.num_nodes() || side[v]) throw InputError("ratio cut: U and W overlap or invalid node");
        side[v] = 2;
    }
    std::size_t cut = 0;
    for (auto [a, b] : g.edges())
        if (side[a] && side[b] && side[a] != side[b]) ++cut;
    return static_cast<double>(cut) / (static_cast<double>(u.size()) * static_cast<double>(w.size()));
}

struct Bipartition {
    std::vector<NodeId> positive;  // phi_1 > 0, plus |phi_1| <= 1e-12
    std::vector<NodeId> negative;
    bool median_fallback = false;
};

// Binary Fiedler split of the subgraph induced by `members` (assumed
// connected). Returns node ids of g.
inline Bipartition fiedler_split(const Graph& g, const std::vector<NodeId>& members,
                                 Eigen::Index limit = spectral::dense_limit()) {
    const auto s = static_cast<Eigen::Index>(members.size());
    Bipartition part;
    if (s < 2) {
        part.positive = members;
        return part;
    }
    std::vector<int> local(static_cast<std::size_t>(g.num_nodes()), -1);
    for (Eigen::Index i = 0; i < s; ++i) local[members[i]] = static_cast<int>(i);
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        for (NodeId w : g.neighbors(members[i])) {
            const int j = local[w];
            if (j < 0) continue;
            l(i, j) = -1.0;
            l(i, i) += 1.0;
        }
    }
    const auto dec = spectral::eigendecompose(l, spectral::LaplacianKind::combinatorial, limit);
    const Eigen::VectorXd phi = dec.eigenvectors.col(1);
    for (Eigen::Index i = 0; i < s; ++i) {
        if (phi[i] > 0.0 || std::abs(phi[i]) <= 1e-12)
            part.positive.push_back(members[i]);
        else
            part.negative.push_back(members[i]);
    }
    if (part.positive.empty() || part.negative.empty()) {
        part.median_fallback = true;
        part.positive.clear();
        part.negative.clear();
        std::vector<Eigen::Index> order(static_cast<std::size_t>(s));
        for (Eigen::Index i = 0; i < s; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return phi[a] < phi[b]; });
        // lower half by phi goes negative
        const Eigen::Index half = s / 2;
        for (Eigen::Index r = 0; r < s; ++r)
            (r < half ? part.negative : part.positive).push_back(members[order[r]]);
        std::sort(part.positive.begin(), part.positive.end());
        std::sort(part.negative.begin(), part.negative.end());
    }
    return part;
}

struct FiedlerOptions {
    int max_iterations = 200;
    NodeId min_component = 20;  // stop once the largest component is smaller
};

struct FiedlerResult {
    Graph graph;
    int iterations = 0;
    bool hit_iteration_cap = false;
};

inline FiedlerResult fiedler_frag(const Graph& g, const FiedlerOptions& opt = {},
                                  Eigen::Index limit = spectral::dense_limit()) {
    FiedlerResult res;
    res.graph = g;
    while (true) {
        if (res.iterations >= opt.max_iterations) {
            res.hit_iteration_cap = true;
            break;
        }
        const auto comps = connected_components(res.graph);
        std::size_t best = 0;
        for (std::size_t c = 1; c < comps.members.size(); ++c)
            if (comps.members[c].size() > comps.members[best].size()) best = c;
        if (comps.members.empty()) break;
        const auto& members = comps.members[best];
        if (static_cast<NodeId>(members.size()) < opt.min_component || members.size() < 2) break;
        const auto part = fiedler_split(res.graph, members, limit);
        std::vector<char> pos(static_cast<std::size_t>(g.num_nodes()), 0);
        for (NodeId v : part.positive) pos[v] = 1;
        std::vector<char> in_comp(static_cast<std::size_t>(g.num_nodes()), 0);
        for (NodeId v : members) in_comp[v] = 1;
        EdgeList kept;
        for (auto [a, b] : res.graph.edges())
            if (!(in_comp[a] && pos[a] != pos[b])) kept.emplace_back(a, b);
        res.graph = res.graph.with_edges(std::move(kept));
        ++res.iterations;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Dataset-level application

struct PerturbOptions {
    std::optional<int> node_deg_cap;  // clamps the dataset-wide max degree
    NodeId fully_conn_guard = default_fully_conn_guard;
    Eigen::Index dense_limit = spectral::dense_limit();
    FiedlerOptions fiedler;
    RewireOptions rewire;
};

struct PerturbedDataset {
    Dataset dataset;
    std::vector<std::string> graph_notes;  // per graph, empty when nothing to report
    int node_deg_width = 0;
};

inline std::uint64_t graph_seed(std::uint64_t seed, std::size_t graph_index, const Perturbation& p) {
    return derive_seed(seed, {"perturb", p.name(), graph_index});
}

inline PerturbedDataset apply(const Dataset& ds, const Perturbation& p, std::uint64_t seed,
                              const PerturbOptions& opt = {}) {
    PerturbedDataset out;
    out.dataset = ds;
    out.graph_notes.assign(ds.graphs.size(), "");
    auto& graphs = out.dataset.graphs;
    const bool transductive = ds.task == Task::transductive_node_classification;

    int cap = 0;
    if (p.kind == Kind::node_deg) {
        for (const auto& g : ds.graphs)
            for (NodeId v = 0; v < g.num_nodes(); ++v) cap = std::max(cap, g.degree(v));
        if (opt.node_deg_cap) cap = std::min(cap, *opt.node_deg_cap);
        out.node_deg_width = cap + 1;
    }
    if (p.kind == Kind::fully_conn && transductive)
        for (const auto& g : ds.graphs)
            if (g.num_nodes() > opt.fully_conn_guard)
                throw ResourceError("FullyConn refused on transductive graph with " + std::to_string(g.num_nodes()) +
                                    " nodes (guard " + std::to_string(opt.fully_conn_guard) + ")");
    if (p.is_bandpass())
        for (const auto& g : ds.graphs)
            if (g.feature_dim() == 0)
                throw UnsupportedPerturbation(ds.name + ": band-pass filtering needs node features");

    const Band band = p.kind == Kind::low_pass ? Band::low : p.kind == Kind::mid_pass ? Band::mid : Band::high;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const Graph& g = ds.graphs[i];
        const auto s = graph_seed(seed, i, p);
        switch (p.kind) {
            case Kind::original: break;
            case Kind::low_pass:
            case Kind::mid_pass:
            case Kind::high_pass:
                graphs[i] = bandpass(g, band, p.mode, opt.dense_limit);
                if (!uses_hard_path(g, p.mode, opt.dense_limit)) out.graph_notes[i] = "wavelet";
                break;
            case Kind::no_node_ftrs: graphs[i] = no_node_ftrs(g); break;
            case Kind::node_deg: graphs[i] = node_deg(g, cap); break;
            case Kind::rand_ftrs: graphs[i] = rand_ftrs(g, s); break;
            case Kind::rand_rewire: {
                auto r = rand_rewire(g, s, opt.rewire);
                if (r.status != RewireStatus::quota_met)
                    out.graph_notes[i] = to_string(r.status) + " (" + std::to_string(r.rewired) + "/" +
                                         std::to_string(r.quota) + " rewired)";
                graphs[i] = std::move(r.graph);
                break;
            }
            case Kind::no_edges: graphs[i] = no_edges(g); break;
            case Kind::fully_conn: graphs[i] = fully_conn(g); break;
            case Kind::frag_k: graphs[i] = frag_k(g, p.k, s).graph; break;
            case Kind::fiedler_frag: {
                auto r = fiedler_frag(g, opt.fiedler, opt.dense_limit);
                if (r.hit_iteration_cap) out.graph_notes[i] = "iteration cap reached";
                graphs[i] = std::move(r.graph);
                break;
            }
        }
    }
    return out;
}

}  // namespace gtaxo::perturb
