#include <gtest/gtest.h>

#include "gtaxo/taxonomy.hpp"
#include "oracles.hpp"

using namespace gtaxo;
using namespace gtaxo::taxonomy;

namespace {

Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd x(r, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    return x;
}

void expect_matches_oracle(const Eigen::MatrixXd& x) {
    const auto d = ward_cluster(x);
    const auto ref = oracle::ward(x);
    ASSERT_EQ(d.merges.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_EQ(d.merges[i].a, ref[i].a) << i;
        EXPECT_EQ(d.merges[i].b, ref[i].b) << i;
        EXPECT_EQ(d.merges[i].size, ref[i].size) << i;
        EXPECT_NEAR(d.merges[i].height, ref[i].height, 1e-9) << i;
    }
}

}  // namespace

TEST(Ward, SingleRow) {
    const auto d = ward_cluster(Eigen::MatrixXd::Ones(1, 3));
    EXPECT_TRUE(d.merges.empty());
    EXPECT_EQ(cut(d, 1), (std::vector<int>{0}));
}

TEST(Ward, ThreePointsOnALine) {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 10;
    const auto d = ward_cluster(x);
    EXPECT_EQ(d.merges[0].a, 0);
    EXPECT_EQ(d.merges[0].b, 1);
    EXPECT_DOUBLE_EQ(d.merges[0].height, 1.0);
    EXPECT_EQ(d.merges[1].a, 2);
    EXPECT_EQ(d.merges[1].b, 3);
    // sqrt(2 * 2*1/3 * 9.5^2)
    EXPECT_NEAR(d.merges[1].height, std::sqrt(4.0 / 3.0) * 9.5, 1e-12);
}

TEST(Ward, TwoCloudsSplitCleanly) {
    Eigen::MatrixXd x = random_matrix(10, 2, 4) * 0.1;
    x.bottomRows(5).array() += 10.0;
    const auto labels = cut(ward_cluster(x), 2);
    for (int i = 0; i < 10; ++i) EXPECT_EQ(labels[i], i < 5 ? 0 : 1);
}

TEST(Ward, MatchesReferenceImplementation) {
    for (std::uint64_t s = 0; s < 10; ++s) expect_matches_oracle(random_matrix(10, 13, s));
}

TEST(Ward, TiesGoToLowestIds) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 5, 6;
    const auto d = ward_cluster(x);
    EXPECT_EQ(d.merges[0].a, 0);
    EXPECT_EQ(d.merges[0].b, 1);
    EXPECT_EQ(d.merges[1].a, 2);
    EXPECT_EQ(d.merges[1].b, 3);
    expect_matches_oracle(x);
}

TEST(Ward, HeightsMonotone) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto d = ward_cluster(random_matrix(15, 4, s));
        for (std::size_t i = 1; i < d.merges.size(); ++i)
            EXPECT_GE(d.merges[i].height, d.merges[i - 1].height - 1e-12);
    }
}

TEST(Ward, NonFiniteNamesCells) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 2);
    x(1, 0) = std::numeric_limits<double>::quiet_NaN();
    try {
        ward_cluster(x, {"alpha", "beta"});
        FAIL();
    } catch (const InputError& e) {
        EXPECT_NE(std::string(e.what()).find("beta[0]"), std::string::npos);
    }
}

TEST(Cut, ExtremesAndRefinement) {
    const auto d = ward_cluster(random_matrix(12, 3, 7));
    for (int v : cut(d, 1)) EXPECT_EQ(v, 0);
    const auto all = cut(d, 12);
    for (int i = 0; i < 12; ++i) EXPECT_EQ(all[i], i);
    for (int k = 1; k < 12; ++k) {
        const auto coarse = cut(d, k), fine = cut(d, k + 1);
        EXPECT_EQ(*std::max_element(fine.begin(), fine.end()), k);
        for (int i = 0; i < 12; ++i)
            for (int j = 0; j < 12; ++j)
                if (fine[i] == fine[j]) EXPECT_EQ(coarse[i], coarse[j]);
    }
    EXPECT_THROW(cut(d, 0), InputError);
    EXPECT_THROW(cut(d, 13), InputError);
}

TEST(Newick, Format) {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 10;
    const auto d = ward_cluster(x, {"a", "b c", "d"});
    const auto s = newick(d);
    EXPECT_EQ(s.front(), '(');
    EXPECT_NE(s.find("a:1,'b c':1"), std::string::npos);
    EXPECT_EQ(s.back(), ';');
}

TEST(Pca, Collinear) {
    Eigen::MatrixXd x(5, 2);
    for (int i = 0; i < 5; ++i) x.row(i) << i, 2 * i;
    const auto p = pca(x);
    EXPECT_NEAR(p.explained_ratio[0], 1.0, 1e-12);
    EXPECT_NEAR(p.explained_ratio[1], 0.0, 1e-12);
    EXPECT_GT(p.loadings(1, 0), 0.0);
    EXPECT_NEAR(p.loadings(0, 0), 1.0 / std::sqrt(5.0), 1e-12);
}

TEST(Pca, DuplicateRowsHaveEqualScores) {
    Eigen::MatrixXd x = random_matrix(6, 4, 2);
    x.row(5) = x.row(2);
    const auto p = pca(x);
    EXPECT_LT((p.scores.row(5) - p.scores.row(2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Pca, MatchesCovarianceOracle) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Eigen::MatrixXd x = random_matrix(10, 13, s);
        const auto p = pca(x);
        const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
        const auto e = oracle::jacobi(c.transpose() * c / 9.0);
        // descending, top min(rows, cols) components
        for (Eigen::Index k = 0; k < p.explained_variance.size(); ++k)
            EXPECT_NEAR(p.explained_variance[k], e.values[12 - k], 1e-8);
        EXPECT_NEAR(p.explained_ratio.sum(), 1.0, 1e-12);
        EXPECT_LT((p.scores * p.loadings.transpose() - c).cwiseAbs().maxCoeff(), 1e-10);
    }
}

TEST(Correlation, Examples) {
    Eigen::MatrixXd x(4, 4);
    x << 1, 2, 4, 5, 2, 4, 3, 5, 3, 6, 2, 5, 4, 8, 1, 5;
    const auto r = pert_correlation(x);
    EXPECT_DOUBLE_EQ(r(0, 1), 1.0);
    EXPECT_DOUBLE_EQ(r(0, 2), -1.0);
    EXPECT_TRUE(std::isnan(r(0, 3)));
    EXPECT_TRUE(std::isnan(r(3, 3)));
    EXPECT_EQ(r(2, 2), 1.0);
}

TEST(Correlation, AffineInvariance) {
    const Eigen::MatrixXd x = random_matrix(8, 5, 3);
    Eigen::MatrixXd y = x;
    y.col(2) = 3.0 * x.col(2).array() + 2.0;
    EXPECT_LT((pert_correlation(x) - pert_correlation(y)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModelCorrelation, AlignsByName) {
    SensitivityMatrix a;
    a.datasets = {"d1", "d2", "d3"};
    a.perturbations = {original_column, "P", "Q"};
    const double vals[3][2] = {{0.5, 0.9}, {0.7, 0.2}, {1.0, 0.6}};
    for (int r = 0; r < 3; ++r)
        a.cells.push_back({Cell{CellStatus::ok, {1.0}}, Cell{CellStatus::ok, {vals[r][0]}},
                           Cell{CellStatus::ok, {vals[r][1]}}});
    SensitivityMatrix b;
    b.datasets = {"d3", "d1", "d2"};
    b.perturbations = {"Q", original_column, "P"};
    for (int r : {2, 0, 1})
        b.cells.push_back({Cell{CellStatus::ok, {vals[r][1]}}, Cell{CellStatus::ok, {1.0}},
                           Cell{CellStatus::ok, {vals[r][0]}}});
    EXPECT_NEAR(model_correlation(a, b), 1.0, 1e-12);
    b.datasets[0] = "d4";
    EXPECT_THROW(model_correlation(a, b), InputError);
}
