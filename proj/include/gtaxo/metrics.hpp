#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gtaxo/errors.hpp"

namespace gtaxo::metrics {

// Mann-Whitney AUROC with tied scores counted 1/2. Labels are 0/1; nullopt
// when either class is absent.
inline std::optional<double> auroc_binary(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw InputError("auroc: scores and labels differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // midranks, 1-based, doubled to stay integral
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] > 0) pos_rank_sum += midrank;
        i = j;
    }
    for (int y : labels) n_pos += y > 0 ? 1 : 0;
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

// Unweighted macro average of one-vs-rest AUROCs; classes lacking positives
// or negatives are skipped. scores is entities x classes.
inline std::optional<double> auroc_multiclass(const Eigen::MatrixXd& scores, std::span<const int> labels) {
    if (static_cast<std::size_t>(scores.rows()) != labels.size())
        throw InputError("auroc: score rows and labels differ in length");
    if (scores.cols() == 1) throw InputError("auroc: multiclass scores need at least two columns");
    double sum = 0.0;
    int used = 0;
    std::vector<double> col(labels.size());
    std::vector<int> bin(labels.size());
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            col[i] = scores(static_cast<Eigen::Index>(i), c);
            bin[i] = labels[i] == c ? 1 : 0;
        }
        if (auto a = auroc_binary(col, bin)) {
            sum += *a;
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    return sum / used;
}

// Mean of per-label AUROCs over labels with both outcomes present. labels
// holds 0/1 with negative entries treated as missing.
inline std::optional<double> auroc_multilabel(const Eigen::MatrixXd& scores, const Eigen::MatrixXi& labels) {
    if (scores.rows() != labels.rows() || scores.cols() != labels.cols())
        throw InputError("auroc: multilabel shapes differ");
    double sum = 0.0;
    int used = 0;
    for (Eigen::Index c = 0; c < scores.cols(); ++c) {
        std::vector<double> s;
        std::vector<int> y;
        for (Eigen::Index i = 0; i < scores.rows(); ++i) {
            if (labels(i, c) < 0) continue;
            s.push_back(scores(i, c));
            y.push_back(labels(i, c));
        }
        if (auto a = auroc_binary(s, y)) {
            sum += *a;
            ++used;
        }
    }
    if (used == 0) return std::nullopt;
    return sum / used;
}

// Scores for `num_classes` classes: binary tasks use the positive-class
// column, multiclass tasks the macro one-vs-rest average.
inline std::optional<double> auroc(const Eigen::MatrixXd& probs, std::span<const int> labels) {
    if (probs.cols() == 2) {
        std::vector<double> s(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) s[i] = probs(static_cast<Eigen::Index>(i), 1);
        return auroc_binary(s, labels);
    }
    return auroc_multiclass(probs, labels);
}

// Pearson correlation; NaN when either side has zero variance or fewer than
// two points.
inline double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("pearson: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace gtaxo::metrics
