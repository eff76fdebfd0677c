#include <gtest/gtest.h>

#include <set>

#include "gtaxo/graph_stats.hpp"
#include "gtaxo/synthgen.hpp"
#include "oracles.hpp"

using namespace gtaxo;
using namespace gtaxo::synth;

namespace {

GenSpec small(Family f, int graphs) {
    auto s = GenSpec::defaults(f);
    s.num_graphs = graphs;
    s.seed = 5;
    return s;
}

void expect_same(const Dataset& a, const Dataset& b) {
    ASSERT_EQ(a.graphs.size(), b.graphs.size());
    EXPECT_EQ(a.split, b.split);
    for (std::size_t i = 0; i < a.graphs.size(); ++i) {
        EXPECT_EQ(a.graphs[i].edges(), b.graphs[i].edges());
        EXPECT_EQ(a.graphs[i].features(), b.graphs[i].features());
        EXPECT_EQ(a.graphs[i].node_labels(), b.graphs[i].node_labels());
        EXPECT_EQ(a.graphs[i].graph_label(), b.graphs[i].graph_label());
    }
}

}  // namespace

TEST(SmallWorld, ShapeAndDeciles) {
    const auto spec = GenSpec::defaults(Family::small_world);
    EXPECT_EQ(spec.num_graphs, 256);
    EXPECT_EQ(spec.nodes_per_graph, 64);
    const Dataset ds = generate(spec);
    ASSERT_EQ(ds.graphs.size(), 256u);
    std::set<int> bins;
    for (const auto& g : ds.graphs) {
        EXPECT_EQ(g.num_nodes(), 64);
        EXPECT_EQ(g.feature_dim(), 2);
        EXPECT_EQ(connected_components(g).members.size(), 1u);
        bins.insert(*g.graph_label());
    }
    EXPECT_EQ(bins, (std::set<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
    EXPECT_NO_THROW(ds.validate());
}

TEST(SmallWorld, LabelsFollowPathLength) {
    const Dataset ds = generate(small(Family::small_world, 60));
    double lo = 0, hi = 0;
    int nlo = 0, nhi = 0;
    for (const auto& g : ds.graphs) {
        const double apl = stats::avg_path_length(g);
        if (*g.graph_label() <= 1) lo += apl, ++nlo;
        if (*g.graph_label() >= 8) hi += apl, ++nhi;
    }
    EXPECT_LT(lo / nlo, hi / nhi);
}

TEST(ScaleFree, HeavyTail) {
    const Dataset ds = generate(GenSpec::defaults(Family::scale_free));
    std::vector<int> degs;
    for (const auto& g : ds.graphs) {
        EXPECT_EQ(g.feature_dim(), 2);
        for (int d : g.degrees()) degs.push_back(d);
    }
    std::sort(degs.begin(), degs.end());
    EXPECT_GE(degs.back(), 3 * degs[degs.size() / 2]);
}

TEST(SbmCluster, RevealedNodesAndWidth) {
    const Dataset ds = generate(small(Family::sbm_cluster, 20));
    EXPECT_EQ(ds.task, Task::inductive_node_classification);
    for (const auto& g : ds.graphs) {
        EXPECT_EQ(g.feature_dim(), 7);
        int revealed = 0;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            EXPECT_EQ(g.features().row(v).sum(), 1.0);
            if (g.features()(v, 6) == 0.0) {
                ++revealed;
                EXPECT_EQ(g.node_labels()[v], -1);
            }
        }
        EXPECT_EQ(revealed, 6);
        EXPECT_GE(g.num_nodes(), 90);
        EXPECT_LE(g.num_nodes(), 150);
    }
}

TEST(SbmCluster, DisconnectedCliquesSolvedByPropagation) {
    auto spec = small(Family::sbm_cluster, 5);
    spec.sbm_p_in = 1.0;
    spec.sbm_p_out = 0.0;
    const Dataset ds = generate(spec);
    for (const auto& g : ds.graphs) {
        std::vector<std::pair<NodeId, int>> seeds;
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            for (int b = 0; b < 6; ++b)
                if (g.features()(v, b) == 1.0) seeds.emplace_back(v, b);
        const auto pred = oracle::propagate_labels(g, seeds);
        int correct = 0, total = 0;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (g.node_labels()[v] < 0) continue;
            ++total;
            correct += pred[v] == g.node_labels()[v];
        }
        EXPECT_EQ(correct, total);
    }
}

TEST(SbmPattern, MinorityAndWidth) {
    const Dataset ds = generate(small(Family::sbm_pattern, 20));
    EXPECT_EQ(ds.num_classes, 2);
    for (const auto& g : ds.graphs) {
        EXPECT_EQ(g.feature_dim(), 3);
        int pos = 0;
        for (int y : g.node_labels()) pos += y;
        EXPECT_LT(2 * pos, g.num_nodes());
        EXPECT_GT(pos, 0);
    }
}

TEST(SynthieLike, Defaults) {
    const Dataset ds = generate(GenSpec::defaults(Family::synthie_like));
    EXPECT_EQ(ds.graphs.size(), 400u);
    EXPECT_EQ(ds.num_classes, 4);
    std::set<int> labels;
    for (const auto& g : ds.graphs) {
        EXPECT_EQ(g.feature_dim(), 15);
        labels.insert(*g.graph_label());
    }
    EXPECT_EQ(labels.size(), 4u);
}

namespace {

// Nearest-centroid on mean node features, trained on even graphs and scored
// on odd ones, restricted to classes 0 and 1.
double features_only_accuracy(const Dataset& ds) {
    Eigen::VectorXd c[2] = {Eigen::VectorXd::Zero(15), Eigen::VectorXd::Zero(15)};
    int count[2] = {0, 0};
    std::vector<std::pair<Eigen::VectorXd, int>> test;
    for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
        const int y = *ds.graphs[i].graph_label();
        if (y > 1) continue;
        const Eigen::VectorXd m = ds.graphs[i].features().colwise().mean();
        if ((i / 4) % 2 == 0) {
            c[y] += m;
            ++count[y];
        } else {
            test.emplace_back(m, y);
        }
    }
    c[0] /= count[0];
    c[1] /= count[1];
    int correct = 0;
    for (const auto& [m, y] : test) correct += ((m - c[1]).norm() < (m - c[0]).norm() ? 1 : 0) == y;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace

TEST(SynthieLike, SharedFeaturesMergeClassPair) {
    auto spec = small(Family::synthie_like, 2000);
    EXPECT_GT(features_only_accuracy(generate(spec)), 0.8);
    spec.synthie_shared_features = true;
    EXPECT_LE(features_only_accuracy(generate(spec)), 0.55);
}

TEST(SyntheticNewLike, DefaultsAndEdgeBalance) {
    const Dataset ds = generate(GenSpec::defaults(Family::syntheticnew_like));
    EXPECT_EQ(ds.graphs.size(), 300u);
    double edges[2] = {0, 0};
    int count[2] = {0, 0};
    for (const auto& g : ds.graphs) {
        EXPECT_EQ(g.num_nodes(), 100);
        EXPECT_EQ(g.feature_dim(), 1);
        edges[*g.graph_label()] += static_cast<double>(g.num_edges());
        ++count[*g.graph_label()];
    }
    const double a = edges[0] / count[0], b = edges[1] / count[1];
    EXPECT_LE(std::abs(a - b) / a, 0.02);
}

TEST(Generators, DeterministicPerSeed) {
    for (auto f : {Family::small_world, Family::scale_free, Family::sbm_cluster, Family::sbm_pattern,
                   Family::synthie_like, Family::syntheticnew_like}) {
        const auto spec = small(f, 12);
        expect_same(generate(spec), generate(spec));
        EXPECT_NO_THROW(generate(spec).validate());
    }
}

TEST(Generators, FamilyNames) {
    EXPECT_EQ(parse_family("sbm_cluster"), Family::sbm_cluster);
    EXPECT_THROW(parse_family("lattice"), UsageError);
}

TEST(PageRank, RegularIsUniform) {
    const auto r = stats::pagerank(oracle::cycle(9));
    for (double v : r) EXPECT_NEAR(v, 1.0 / 9.0, 1e-10);
}

TEST(PageRank, StarMatchesLinearSolve) {
    const Graph g = oracle::star(3);
    const auto r = stats::pagerank(g);
    double sum = 0;
    for (double v : r) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-10);
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 4);
    for (NodeId v = 0; v < 4; ++v)
        for (NodeId w : g.neighbors(v)) p(w, v) = 1.0 / g.degree(v);
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4) - 0.85 * p;
    const Eigen::VectorXd ref = a.lu().solve(Eigen::VectorXd::Constant(4, 0.15 / 4));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(r[i], ref[i], 1e-8);
    EXPECT_GT(r[0], r[1]);
}

TEST(Stats, Triangle) {
    const Graph g = oracle::complete(3);
    EXPECT_EQ(stats::triangle_count(g), 1u);
    for (double c : stats::clustering_coefficient(g)) EXPECT_EQ(c, 1.0);
}

TEST(Stats, Star) {
    const Graph g = oracle::star(4);
    EXPECT_EQ(stats::triangle_count(g), 0u);
    for (double c : stats::clustering_coefficient(g)) EXPECT_EQ(c, 0.0);
}

TEST(Stats, PathLengths) {
    EXPECT_DOUBLE_EQ(stats::avg_path_length(oracle::path(4)), 5.0 / 3.0);
    EXPECT_EQ(stats::diameter(oracle::path(4)), 3);
    EXPECT_THROW(stats::avg_path_length(oracle::make_graph(3, {{0, 1}})), InputError);
    EXPECT_DOUBLE_EQ(stats::density(oracle::complete(5)), 1.0);
}

TEST(Stats, TrianglesMatchTraceOracle) {
    const Graph g = oracle::random_graph(25, 0.3, 4);
    const Eigen::MatrixXd a = g.adjacency_dense();
    EXPECT_NEAR(static_cast<double>(stats::triangle_count(g)), (a * a * a).trace() / 6.0, 1e-9);
}
