#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"
#include "gtaxo/metrics.hpp"
#include "gtaxo/sensitivity.hpp"

namespace gtaxo::taxonomy {

// Leaves are 0..n-1; the cluster formed by merge i gets id n+i.
struct Merge {
    int a = 0, b = 0;
    double height = 0.0;
    int size = 0;
};

struct Dendrogram {
    std::vector<std::string> leaves;
    std::vector<Merge> merges;

    int num_leaves() const noexcept { return static_cast<int>(leaves.size()); }
};

// Ward agglomeration on Euclidean row distances via the Lance-Williams
// recurrence. Heights are sqrt(2 * Ward increase), i.e. the Euclidean
// distance for two singletons. Equal increases go to the lowest id pair.
inline Dendrogram ward_cluster(const Eigen::MatrixXd& x, std::vector<std::string> leaves = {}) {
    const int n = static_cast<int>(x.rows());
    if (leaves.empty())
        for (int i = 0; i < n; ++i) leaves.push_back(std::to_string(i));
    if (static_cast<int>(leaves.size()) != n) throw InputError("ward: leaf names do not match rows");
    std::string bad;
    for (Eigen::Index r = 0; r < x.rows(); ++r)
        for (Eigen::Index c = 0; c < x.cols(); ++c)
            if (!std::isfinite(x(r, c)))
                bad += (bad.empty() ? "" : ", ") + leaves[static_cast<std::size_t>(r)] + "[" + std::to_string(c) + "]";
    if (!bad.empty()) throw InputError("ward: non-finite entries at " + bad);

    Dendrogram d{std::move(leaves), {}};
    if (n < 2) return d;
    // squared distances between active clusters, indexed by slot
    Eigen::MatrixXd d2(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d2(i, j) = (x.row(i) - x.row(j)).squaredNorm();
    std::vector<int> id(static_cast<std::size_t>(n)), size(static_cast<std::size_t>(n), 1);
    std::iota(id.begin(), id.end(), 0);
    std::vector<char> active(static_cast<std::size_t>(n), 1);

    for (int step = 0; step < n - 1; ++step) {
        int bi = -1, bj = -1;
        double best = std::numeric_limits<double>::infinity();
        std::pair<int, int> best_ids{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
        for (int i = 0; i < n; ++i) {
            if (!active[i]) continue;
            for (int j = i + 1; j < n; ++j) {
                if (!active[j]) continue;
                const std::pair<int, int> ids{std::min(id[i], id[j]), std::max(id[i], id[j])};
                if (d2(i, j) < best || (d2(i, j) == best && ids < best_ids)) {
                    best = d2(i, j);
                    best_ids = ids;
                    bi = i;
                    bj = j;
                }
            }
        }
        const double ni = size[bi], nj = size[bj];
        for (int k = 0; k < n; ++k) {
            if (!active[k] || k == bi || k == bj) continue;
            const double nk = size[k];
            const double v = ((ni + nk) * d2(bi, k) + (nj + nk) * d2(bj, k) - nk * best) / (ni + nj + nk);
            d2(bi, k) = d2(k, bi) = std::max(v, 0.0);
        }
        d.merges.push_back({best_ids.first, best_ids.second, std::sqrt(std::max(best, 0.0)),
                            size[bi] + size[bj]});
        size[bi] += size[bj];
        id[bi] = n + step;
        active[bj] = 0;
    }
    return d;
}

// Flat clustering into k groups by undoing the last k-1 merges. Labels are
// numbered in order of each cluster's first leaf.
inline std::vector<int> cut(const Dendrogram& d, int k) {
    const int n = d.num_leaves();
    if (k < 1 || k > n) throw InputError("cut: k must lie in [1, " + std::to_string(n) + "]");
    std::vector<int> parent(static_cast<std::size_t>(2 * n), -1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (int i = 0; i < n - k; ++i) {
        const auto& m = d.merges[static_cast<std::size_t>(i)];
        parent[find(m.a)] = n + i;
        parent[find(m.b)] = n + i;
    }
    std::vector<int> label(static_cast<std::size_t>(n), -1), root_label(static_cast<std::size_t>(2 * n), -1);
    int next = 0;
    for (int v = 0; v < n; ++v) {
        const int r = find(v);
        if (root_label[r] < 0) root_label[r] = next++;
        label[v] = root_label[r];
    }
    return label;
}

namespace detail {

inline std::string short_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline std::string newick_name(const std::string& s) {
    if (s.find_first_of(" ,;:()[]'\t") == std::string::npos && !s.empty()) return s;
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("''") : std::string(1, c);
    return q + "'";
}

}  // namespace detail

// Newick string with branch lengths equal to height differences.
inline std::string newick(const Dendrogram& d) {
    const int n = d.num_leaves();
    if (n == 0) return ";";
    if (n == 1) return detail::newick_name(d.leaves[0]) + ";";
    auto height = [&](int c) { return c < n ? 0.0 : d.merges[static_cast<std::size_t>(c - n)].height; };
    std::vector<std::string> text(static_cast<std::size_t>(2 * n - 1));
    for (int i = 0; i < n; ++i) text[i] = detail::newick_name(d.leaves[i]);
    for (int i = 0; i < n - 1; ++i) {
        const auto& m = d.merges[static_cast<std::size_t>(i)];
        const double h = m.height;
        text[n + i] = "(" + text[m.a] + ":" + detail::short_double(h - height(m.a)) + "," + text[m.b] + ":" +
                      detail::short_double(h - height(m.b)) + ")";
    }
    return text.back() + ";";
}

inline nlohmann::ordered_json to_json(const Dendrogram& d) {
    nlohmann::ordered_json j;
    j["leaves"] = d.leaves;
    nlohmann::ordered_json ms = nlohmann::ordered_json::array();
    for (const auto& m : d.merges) {
        nlohmann::ordered_json e;
        e["a"] = m.a;
        e["b"] = m.b;
        e["height"] = m.height;
        e["size"] = m.size;
        ms.push_back(std::move(e));
    }
    j["merges"] = std::move(ms);
    j["newick"] = newick(d);
    return j;
}

struct PcaResult {
    Eigen::MatrixXd loadings;            // columns x components, orthonormal columns
    Eigen::MatrixXd scores;              // rows x components
    Eigen::VectorXd explained_variance;  // s^2 / (rows - 1)
    Eigen::VectorXd explained_ratio;
    Eigen::RowVectorXd mean;
};

// Column-centered SVD; each component's largest-magnitude loading is made
// positive (first such index on ties).
inline PcaResult pca(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw InputError("pca: need at least two rows");
    PcaResult p;
    p.mean = x.colwise().mean();
    const Eigen::MatrixXd c = x.rowwise() - p.mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    p.loadings = svd.matrixV();
    p.scores = svd.matrixU() * s.asDiagonal();
    for (Eigen::Index k = 0; k < p.loadings.cols(); ++k) {
        Eigen::Index arg = 0;
        for (Eigen::Index i = 1; i < p.loadings.rows(); ++i)
            if (std::abs(p.loadings(i, k)) > std::abs(p.loadings(arg, k))) arg = i;
        if (p.loadings(arg, k) < 0) {
            p.loadings.col(k) *= -1.0;
            p.scores.col(k) *= -1.0;
        }
    }
    const Eigen::VectorXd s2 = s.array().square();
    p.explained_variance = s2 / static_cast<double>(x.rows() - 1);
    const double total = s2.sum();
    p.explained_ratio = total > 0.0 ? Eigen::VectorXd(s2 / total) : Eigen::VectorXd::Zero(s2.size());
    return p;
}

// Pearson correlation between every pair of columns; NaN where a column has
// zero variance.
inline Eigen::MatrixXd pert_correlation(const Eigen::MatrixXd& x) {
    if (x.rows() < 2) throw InputError("pert_correlation: need at least two rows");
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd r(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = i; j < p; ++j) {
            const Eigen::VectorXd a = x.col(i), b = x.col(j);
            double v = metrics::pearson({a.data(), static_cast<std::size_t>(a.size())},
                                        {b.data(), static_cast<std::size_t>(b.size())});
            if (i == j && !std::isnan(v)) v = 1.0;
            r(i, j) = r(j, i) = v;
        }
    return r;
}

// Pearson over the flattened clamped log2 entries of two matrices with the
// same rows and columns. The Original column and cells not valid in both
// are excluded.
inline double model_correlation(const SensitivityMatrix& a, const SensitivityMatrix& b) {
    auto sorted = [](std::vector<std::string> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    if (sorted(a.datasets) != sorted(b.datasets) || sorted(a.perturbations) != sorted(b.perturbations))
        throw InputError("model_correlation: matrices have different row or column ids");
    std::vector<double> xa, xb;
    for (std::size_t r = 0; r < a.datasets.size(); ++r)
        for (std::size_t c = 0; c < a.perturbations.size(); ++c) {
            if (a.perturbations[c] == original_column) continue;
            const auto rb = b.row(a.datasets[r]);
            const auto cb = b.column(a.perturbations[c]);
            const double va = SensitivityMatrix::clamp_log2(a.log2_ratio(r, c));
            const double vb = SensitivityMatrix::clamp_log2(b.log2_ratio(rb, cb));
            if (std::isnan(va) || std::isnan(vb)) continue;
            xa.push_back(va);
            xb.push_back(vb);
        }
    return metrics::pearson(xa, xb);
}

}  // namespace gtaxo::taxonomy
