#include <gtest/gtest.h>

#include "gtaxo/metrics.hpp"
#include "gtaxo/rng.hpp"

using namespace gtaxo;
using namespace gtaxo::metrics;

namespace {

// O(n^2) pair count; ties count one half.
double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = 0; j < s.size(); ++j)
            if (y[i] == 1 && y[j] == 0) {
                den += 1;
                num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
            }
    return num / den;
}

}  // namespace

TEST(Auroc, KnownExample) {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_EQ(*auroc_binary(s, y), 0.75);
}

TEST(Auroc, PerfectAndInverted) {
    const std::vector<int> y{0, 0, 1, 1};
    EXPECT_EQ(*auroc_binary(std::vector<double>{0.1, 0.2, 0.3, 0.4}, y), 1.0);
    EXPECT_EQ(*auroc_binary(std::vector<double>{0.4, 0.3, 0.2, 0.1}, y), 0.0);
    EXPECT_EQ(*auroc_binary(std::vector<double>{0.5, 0.5, 0.5, 0.5}, y), 0.5);
}

TEST(Auroc, SingleClassUndefined) {
    EXPECT_FALSE(auroc_binary(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}).has_value());
}

TEST(Auroc, MatchesPairwiseAndMonotoneInvariant) {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> s(40), f(40);
        std::vector<int> y(40);
        for (int i = 0; i < 40; ++i) {
            s[i] = std::round(rng.uniform() * 20) / 20;
            y[i] = rng.bernoulli(0.4) ? 1 : 0;
            f[i] = std::exp(3 * s[i]) - 7;
        }
        y[0] = 0;
        y[1] = 1;
        const double a = *auroc_binary(s, y);
        EXPECT_NEAR(a, pairwise_auroc(s, y), 1e-12);
        EXPECT_EQ(a, *auroc_binary(f, y));
    }
}

TEST(Auroc, MulticlassMacroAverage) {
    Eigen::MatrixXd p(4, 3);
    p << 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8, 0.6, 0.3, 0.1;
    const std::vector<int> y{0, 1, 2, 0};
    EXPECT_EQ(*auroc(p, y), 1.0);
    const std::vector<int> y2{0, 1, 2, 1};
    double expect = 0;
    for (int c = 0; c < 3; ++c) {
        std::vector<double> s(4);
        std::vector<int> b(4);
        for (int i = 0; i < 4; ++i) {
            s[i] = p(i, c);
            b[i] = y2[i] == c;
        }
        expect += pairwise_auroc(s, b) / 3;
    }
    EXPECT_NEAR(*auroc(p, y2), expect, 1e-15);
}

TEST(Auroc, Multilabel) {
    Eigen::MatrixXd s(4, 2);
    s << 0.9, 0.1, 0.2, 0.8, 0.7, 0.3, 0.1, 0.4;
    Eigen::MatrixXi y(4, 2);
    y << 1, 0, 0, 1, 1, -1, 0, 0;
    EXPECT_EQ(*auroc_multilabel(s, y), 1.0);
}

TEST(Pearson, Basics) {
    const std::vector<double> a{1, 2, 3, 4}, b{2, 4, 6, 8}, c{4, 3, 2, 1}, k{1, 1, 1, 1};
    EXPECT_DOUBLE_EQ(pearson(a, b), 1.0);
    EXPECT_DOUBLE_EQ(pearson(a, c), -1.0);
    EXPECT_TRUE(std::isnan(pearson(a, k)));
    EXPECT_THROW(pearson(a, std::vector<double>{1.0}), InputError);
}
