#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "gtaxo/graph.hpp"
#include "gtaxo/rng.hpp"

namespace gtaxo {

// Label-stratified fold assignment; unlabeled entities (label < 0) get -1.
inline std::vector<int> stratified_folds(const std::vector<int>& labels, int num_folds, std::uint64_t seed) {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] >= 0) by_class[labels[i]].push_back(i);
    std::vector<int> fold(labels.size(), -1);
    Rng rng(seed);
    int next = 0;
    for (auto& [label, idx] : by_class) {
        rng.shuffle(idx);
        for (std::size_t i : idx) {
            fold[i] = next;
            next = (next + 1) % num_folds;
        }
    }
    return fold;
}

// Shuffled train/val/test assignment by fractions.
inline std::vector<int> random_split(std::size_t count, double train_frac, double val_frac, std::uint64_t seed) {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);
    const auto n_train = static_cast<std::size_t>(train_frac * static_cast<double>(count) + 0.5);
    const auto n_val = static_cast<std::size_t>(val_frac * static_cast<double>(count) + 0.5);
    std::vector<int> split(count, split_test);
    for (std::size_t r = 0; r < count; ++r) {
        if (r < n_train)
            split[idx[r]] = split_train;
        else if (r < n_train + n_val)
            split[idx[r]] = split_val;
    }
    return split;
}

struct SplitMasks {
    std::vector<char> train, val, test;
};

// Materializes repeat `repeat` of a dataset's split scheme. Predefined splits
// are used as-is; with k folds, fold r is test and fold r+1 validation.
inline SplitMasks split_masks(const Dataset& ds, int repeat) {
    const auto n = ds.split.size();
    SplitMasks m{std::vector<char>(n, 0), std::vector<char>(n, 0), std::vector<char>(n, 0)};
    for (std::size_t i = 0; i < n; ++i) {
        const int s = ds.split[i];
        if (s < 0) continue;
        if (ds.predefined_splits()) {
            (s == split_train ? m.train : s == split_val ? m.val : m.test)[i] = 1;
        } else {
            const int test_fold = repeat % ds.num_folds;
            const int val_fold = (repeat + 1) % ds.num_folds;
            (s == test_fold ? m.test : s == val_fold ? m.val : m.train)[i] = 1;
        }
    }
    return m;
}

}  // namespace gtaxo
