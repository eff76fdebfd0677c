#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"
#include "gtaxo/perturb.hpp"
#include "gtaxo/rng.hpp"
#include "gtaxo/sensitivity.hpp"
#include "gtaxo/splits.hpp"
#include "gtaxo/train.hpp"

namespace gtaxo::profile {

struct ProfileConfig {
    mpnn::ConvKind conv = mpnn::ConvKind::gcn;
    int repeats = 10;
    int hidden_dim = 64;
    int num_layers = 5;
    mpnn::TrainConfig train;  // seed is replaced per repeat
    perturb::PerturbOptions perturb;
    std::vector<perturb::Perturbation> perturbations = perturb::standard_perturbations();
    std::uint64_t seed = 0;
    int jobs = 1;
    std::function<void(const std::string&)> log;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["model"] = mpnn::to_string(conv);
        j["repeats"] = repeats;
        j["hidden_dim"] = hidden_dim;
        j["num_layers"] = num_layers;
        auto t = train.to_json();
        t.erase("seed");
        j["train"] = std::move(t);
        nlohmann::ordered_json ps = nlohmann::ordered_json::array();
        for (const auto& p : perturbations) ps.push_back(p.name());
        j["perturbations"] = std::move(ps);
        j["bandpass_mode"] = perturbations.empty() ? std::string("auto") : perturb::to_string(perturbations.front().mode);
        j["fully_conn_guard"] = perturb.fully_conn_guard;
        j["dense_limit"] = perturb.dense_limit;
        j["fiedler_max_iterations"] = perturb.fiedler.max_iterations;
        j["fiedler_min_component"] = perturb.fiedler.min_component;
        j["rewire_fraction"] = perturb.rewire.fraction;
        j["seed"] = seed;
        j["baseline"] = "ratio of repeat-averaged AUROCs";
        return j;
    }
};

inline std::uint64_t train_seed(std::uint64_t root, const std::string& dataset, int repeat) {
    return derive_seed(root, {"train", dataset, repeat});
}

inline std::uint64_t perturb_seed(std::uint64_t root, const std::string& dataset, int repeat) {
    return derive_seed(root, {"perturb", dataset, repeat});
}

// Transductive datasets skip the structure perturbations that would discard
// the single graph's global structure.
inline bool skipped_for(const Dataset& ds, const perturb::Perturbation& p) {
    return ds.task == Task::transductive_node_classification &&
           (p.kind == perturb::Kind::fully_conn || p.kind == perturb::Kind::fiedler_frag);
}

struct RunResult {
    CellStatus status = CellStatus::ok;
    std::optional<double> auroc;
    std::uint64_t seed = 0;
    std::string note;
};

// Train once on the perturbed dataset and score the test split. Divergence
// is retried once with a derived seed.
inline RunResult run_once(const Dataset& ds, const perturb::Perturbation& p, int repeat, const ProfileConfig& cfg) {
    RunResult out;
    if (skipped_for(ds, p)) {
        out.status = CellStatus::skipped;
        out.note = "not applied to transductive datasets";
        return out;
    }
    perturb::PerturbedDataset pd;
    try {
        pd = perturb::apply(ds, p, perturb_seed(cfg.seed, ds.name, repeat), cfg.perturb);
    } catch (const UnsupportedPerturbation& e) {
        out.status = CellStatus::unsupported;
        out.note = e.what();
        return out;
    } catch (const ResourceError& e) {
        out.status = CellStatus::skipped;
        out.note = e.what();
        return out;
    }
    const SplitMasks masks = split_masks(pd.dataset, repeat);
    auto mcfg = mpnn::model_config_for(pd.dataset, cfg.conv, cfg.hidden_dim);
    mcfg.num_layers = cfg.num_layers;
    auto tcfg = cfg.train;
    tcfg.seed = train_seed(cfg.seed, ds.name, repeat);
    for (int attempt = 0; attempt < 2; ++attempt) {
        out.seed = tcfg.seed;
        try {
            const auto tm = mpnn::train(pd.dataset, masks, mcfg, tcfg);
            const auto ev = mpnn::evaluate(tm.model, pd.dataset, masks.test);
            if (!ev.auroc) {
                out.status = CellStatus::invalid;
                out.note = "test AUROC undefined (single class in test split)";
                return out;
            }
            out.auroc = ev.auroc;
            return out;
        } catch (const TrainingDiverged& e) {
            out.note = e.what();
            tcfg.seed = derive_seed(tcfg.seed, {"retry"});
        }
    }
    out.status = CellStatus::invalid;
    return out;
}

// Runs `fn(i)` for i in [0, count) on up to `jobs` threads. The first
// exception is rethrown after all workers stop.
inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                    failed = true;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline SensitivityMatrix run_grid(const std::vector<Dataset>& datasets, const ProfileConfig& cfg) {
    if (cfg.repeats < 1) throw UsageError("repeats must be >= 1");
    SensitivityMatrix m;
    m.model = mpnn::to_string(cfg.conv);
    std::vector<perturb::Perturbation> perts{perturb::Perturbation{}};
    m.perturbations.push_back(original_column);
    for (const auto& p : cfg.perturbations) {
        if (p.kind == perturb::Kind::original) continue;
        perts.push_back(p);
        m.perturbations.push_back(p.name());
    }
    for (const auto& ds : datasets) {
        for (const auto& name : m.datasets)
            if (name == ds.name) throw InputError("duplicate dataset name '" + ds.name + "'");
        m.datasets.push_back(ds.name);
    }

    struct GridTask {
        std::size_t d, p;
        int r;
    };
    std::vector<GridTask> tasks;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (std::size_t p = 0; p < perts.size(); ++p)
            for (int r = 0; r < cfg.repeats; ++r) tasks.push_back({d, p, r});

    std::vector<RunResult> results(tasks.size());
    std::atomic<std::size_t> done{0};
    std::mutex log_mu;
    parallel_for(tasks.size(), cfg.jobs, [&](std::size_t i) {
        const auto& t = tasks[i];
        results[i] = run_once(datasets[t.d], perts[t.p], t.r, cfg);
        const auto k = ++done;
        if (cfg.log) {
            std::lock_guard lock(log_mu);
            const auto& res = results[i];
            cfg.log("[" + std::to_string(k) + "/" + std::to_string(tasks.size()) + "] " + datasets[t.d].name + " " +
                    m.perturbations[t.p] + " repeat " + std::to_string(t.r) + ": " +
                    (res.auroc ? std::to_string(*res.auroc) : to_string(res.status)));
        }
    });

    m.cells.assign(datasets.size(), std::vector<Cell>(perts.size()));
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        const auto& t = tasks[i];
        const auto& res = results[i];
        Cell& cell = m.cells[t.d][t.p];
        cell.seeds.push_back(res.seed);
        if (res.status != CellStatus::ok) {
            if (cell.status == CellStatus::ok) {
                cell.status = res.status;
                cell.note = res.note;
            }
            continue;
        }
        cell.aurocs.push_back(*res.auroc);
    }
    for (auto& row : m.cells)
        for (auto& cell : row)
            if (cell.status != CellStatus::ok) cell.aurocs.clear();
    return m;
}

struct SeedVariance {
    std::vector<double> aurocs;
    double mean = 0.0;
    double std = 0.0;  // population
    double cv_percent = 0.0;
};

// Spread of test AUROC over repeats for a stochastic perturbation.
inline SeedVariance seed_variance(const Dataset& ds, const perturb::Perturbation& p, int num_seeds,
                                  const ProfileConfig& cfg) {
    if (!p.stochastic()) throw UsageError("seed_variance: " + p.name() + " is deterministic");
    if (num_seeds < 2) throw UsageError("seed_variance: need at least two seeds");
    std::vector<RunResult> runs(static_cast<std::size_t>(num_seeds));
    parallel_for(runs.size(), cfg.jobs,
                 [&](std::size_t r) { runs[r] = run_once(ds, p, static_cast<int>(r), cfg); });
    SeedVariance sv;
    for (const auto& r : runs) {
        if (!r.auroc) throw InputError("seed_variance: run failed: " + r.note);
        sv.aurocs.push_back(*r.auroc);
    }
    for (double a : sv.aurocs) sv.mean += a;
    sv.mean /= static_cast<double>(sv.aurocs.size());
    double ss = 0.0;
    for (double a : sv.aurocs) ss += (a - sv.mean) * (a - sv.mean);
    sv.std = std::sqrt(ss / static_cast<double>(sv.aurocs.size()));
    sv.cv_percent = sv.mean > 0.0 ? 100.0 * sv.std / sv.mean : std::numeric_limits<double>::infinity();
    return sv;
}

}  // namespace gtaxo::profile
