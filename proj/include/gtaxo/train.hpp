#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"
#include "gtaxo/metrics.hpp"
#include "gtaxo/mpnn.hpp"
#include "gtaxo/rng.hpp"
#include "gtaxo/splits.hpp"

namespace gtaxo::mpnn {

struct TrainConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double lr_decay_factor = 0.5;
    double plateau_threshold = 1e-4;  // relative improvement needed to reset the plateau counter
    double min_lr = 1e-5;
    int plateau_patience = 10;
    int early_stop_patience = 30;
    int max_epochs = 300;
    int batch_size = 32;
    int eval_batch_graphs = 128;
    std::uint64_t seed = 0;

    void validate() const {
        if (!(lr_decay_factor > 0.0 && lr_decay_factor < 1.0)) throw InputError("lr_decay_factor must lie in (0, 1)");
        if (!(lr > 0.0)) throw InputError("learning rate must be positive");
        if (max_epochs < 1 || batch_size < 1) throw InputError("max_epochs and batch_size must be positive");
        if (plateau_patience < 0 || early_stop_patience < 1) throw InputError("bad patience value");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["optimizer"] = "adam";
        j["lr"] = lr;
        j["beta1"] = beta1;
        j["beta2"] = beta2;
        j["adam_eps"] = adam_eps;
        j["lr_decay_factor"] = lr_decay_factor;
        j["plateau_threshold"] = plateau_threshold;
        j["min_lr"] = min_lr;
        j["plateau_patience"] = plateau_patience;
        j["early_stop_patience"] = early_stop_patience;
        j["max_epochs"] = max_epochs;
        j["batch_size"] = batch_size;
        j["seed"] = seed;
        return j;
    }
};

struct EpochRecord {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    std::optional<double> val_auroc;
    double lr = 0.0;
};

struct TrainedModel {
    Model model;
    TrainConfig train_config;
    std::vector<EpochRecord> history;
    int best_epoch = -1;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j = model.to_json();
        j["train_config"] = train_config.to_json();
        j["best_epoch"] = best_epoch;
        nlohmann::ordered_json h = nlohmann::ordered_json::array();
        for (const auto& e : history) {
            nlohmann::ordered_json r;
            r["epoch"] = e.epoch;
            r["train_loss"] = exact_decimal(e.train_loss);
            r["val_loss"] = exact_decimal(e.val_loss);
            r["val_auroc"] =
                e.val_auroc ? nlohmann::ordered_json(exact_decimal(*e.val_auroc)) : nlohmann::ordered_json(nullptr);
            r["lr"] = exact_decimal(e.lr);
            h.push_back(std::move(r));
        }
        j["history"] = std::move(h);
        return j;
    }
};

// Batching view over a dataset. Featureless graphs get a constant column.
class DatasetView {
public:
    explicit DatasetView(const Dataset& ds) : ds_(&ds) {
        graph_level_ = ds.task == Task::graph_classification;
        transductive_ = ds.task == Task::transductive_node_classification;
        Eigen::Index d = -1;
        for (const auto& g : ds.graphs) {
            if (d >= 0 && g.feature_dim() != d) throw InputError(ds.name + ": feature widths differ between graphs");
            d = g.feature_dim();
        }
        constant_ = d <= 0;
        if (constant_) {
            ones_.reserve(ds.graphs.size());
            for (const auto& g : ds.graphs) ones_.push_back(Matrix::Ones(g.num_nodes(), 1));
        }
        input_dim_ = constant_ ? 1 : static_cast<int>(d);
    }

    const Dataset& dataset() const noexcept { return *ds_; }
    int input_dim() const noexcept { return input_dim_; }
    bool graph_level() const noexcept { return graph_level_; }
    bool transductive() const noexcept { return transductive_; }

    // Entities are graphs, or nodes of the single graph when transductive.
    std::vector<std::size_t> entities(const std::vector<char>& mask) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) out.push_back(i);
        return out;
    }

    // Batch of whole graphs; every labeled target in them is scored.
    Batch graphs_batch(const std::vector<std::size_t>& idx) const {
        std::vector<const Graph*> gs;
        std::vector<const Matrix*> xs;
        std::vector<std::vector<int>> nt;
        std::vector<int> gt;
        for (std::size_t i : idx) {
            const Graph& g = ds_->graphs[i];
            gs.push_back(&g);
            xs.push_back(features(i));
            if (graph_level_)
                gt.push_back(*g.graph_label());
            else
                nt.push_back(g.node_labels());
        }
        return make_batch(gs, xs, graph_level_, nt, gt);
    }

    // The transductive graph with targets restricted to `mask`.
    Batch masked_batch(const std::vector<char>& mask) const {
        const Graph& g = ds_->graphs[0];
        std::vector<int> t(static_cast<std::size_t>(g.num_nodes()), -1);
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            if (mask[static_cast<std::size_t>(v)]) t[static_cast<std::size_t>(v)] = g.node_labels()[v];
        return make_batch({&g}, {features(0)}, false, {t}, {});
    }

    // Evaluation batches covering the entities in `mask`.
    std::vector<Batch> eval_batches(const std::vector<char>& mask, int graphs_per_batch) const {
        std::vector<Batch> out;
        if (transductive_) {
            out.push_back(masked_batch(mask));
            return out;
        }
        const auto idx = entities(mask);
        for (std::size_t s = 0; s < idx.size(); s += static_cast<std::size_t>(graphs_per_batch)) {
            const auto e = std::min(idx.size(), s + static_cast<std::size_t>(graphs_per_batch));
            out.push_back(graphs_batch({idx.begin() + static_cast<std::ptrdiff_t>(s),
                                        idx.begin() + static_cast<std::ptrdiff_t>(e)}));
        }
        return out;
    }

private:
    const Matrix* features(std::size_t i) const {
        return constant_ ? &ones_[i] : &ds_->graphs[i].features();
    }

    const Dataset* ds_;
    bool graph_level_ = true, transductive_ = false, constant_ = false;
    int input_dim_ = 1;
    std::vector<Matrix> ones_;
};

inline ModelConfig model_config_for(const Dataset& ds, ConvKind conv, int hidden_dim = 64) {
    const DatasetView view(ds);
    ModelConfig c;
    c.conv = conv;
    c.input_dim = view.input_dim();
    c.hidden_dim = hidden_dim;
    c.batch_norm = !view.transductive();
    c.pooling = view.graph_level() ? Pooling::mean : Pooling::none;
    c.num_classes = std::max(2, ds.num_classes);
    return c;
}

struct Evaluation {
    double loss = 0.0;
    std::optional<double> auroc;
    std::size_t count = 0;
};

inline Evaluation evaluate(const Model& model, const std::vector<Batch>& batches) {
    Evaluation ev;
    std::vector<Matrix> probs;
    std::vector<int> labels;
    double loss_sum = 0.0;
    Eigen::Index rows = 0;
    for (const auto& b : batches) {
        const Matrix logits = model.predict(b);
        std::size_t count = 0;
        for (int t : b.targets) count += t >= 0 ? 1 : 0;
        loss_sum += Model::cross_entropy(logits, b.targets, nullptr) * static_cast<double>(count);
        const Matrix p = Model::softmax(logits);
        Matrix kept(static_cast<Eigen::Index>(count), p.cols());
        Eigen::Index r = 0;
        for (Eigen::Index i = 0; i < p.rows(); ++i) {
            const int t = b.targets[static_cast<std::size_t>(i)];
            if (t < 0) continue;
            kept.row(r++) = p.row(i);
            labels.push_back(t);
        }
        rows += kept.rows();
        probs.push_back(std::move(kept));
        ev.count += count;
    }
    if (ev.count == 0) return ev;
    Matrix all(rows, model.config().num_classes);
    Eigen::Index off = 0;
    for (const auto& p : probs) {
        all.middleRows(off, p.rows()) = p;
        off += p.rows();
    }
    ev.loss = loss_sum / static_cast<double>(ev.count);
    ev.auroc = metrics::auroc(all, labels);
    return ev;
}

inline Evaluation evaluate(const Model& model, const Dataset& ds, const std::vector<char>& mask) {
    const DatasetView view(ds);
    const bool graph_model = model.config().pooling == Pooling::mean;
    if (graph_model != view.graph_level()) throw InputError("model task does not match dataset task");
    return evaluate(model, view.eval_batches(mask, 128));
}

namespace detail {

struct Adam {
    std::vector<Matrix> m, v;
    long long t = 0;

    explicit Adam(const std::vector<Matrix>& params) {
        for (const auto& p : params) {
            m.push_back(Matrix::Zero(p.rows(), p.cols()));
            v.push_back(Matrix::Zero(p.rows(), p.cols()));
        }
    }

    void step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, const TrainConfig& c, double lr) {
        ++t;
        const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < params.size(); ++i) {
            m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grads[i];
            v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grads[i].cwiseProduct(grads[i]);
            params[i].array() -=
                lr * (m[i].array() / bc1) / ((v[i].array() / bc2).sqrt() + c.adam_eps);
        }
    }
};

}  // namespace detail

// Adam with plateau learning-rate decay on validation loss and early stopping
// on validation AUROC (validation loss when AUROC is undefined). Returns the
// parameters of the best validation epoch.
inline TrainedModel train(const Dataset& ds, const SplitMasks& masks, const ModelConfig& mcfg,
                          const TrainConfig& tcfg) {
    tcfg.validate();
    mcfg.validate();
    const DatasetView view(ds);
    if ((mcfg.pooling == Pooling::mean) != view.graph_level())
        throw InputError("model pooling does not match dataset task");
    if (mcfg.input_dim != view.input_dim())
        throw InputError("model input width " + std::to_string(mcfg.input_dim) + " does not match dataset width " +
                         std::to_string(view.input_dim()));
    const auto train_idx = view.entities(masks.train);
    if (train_idx.empty()) throw InputError(ds.name + ": empty training split");
    if (view.entities(masks.val).empty()) throw InputError(ds.name + ": empty validation split");

    TrainedModel out{Model(mcfg, derive_seed(tcfg.seed, {"init"})), tcfg, {}, -1};
    Model& model = out.model;
    detail::Adam adam(model.params());
    const auto val_batches = view.eval_batches(masks.val, tcfg.eval_batch_graphs);
    std::optional<Batch> full;
    if (view.transductive()) full = view.masked_batch(masks.train);

    double lr = tcfg.lr;
    double plateau_best = std::numeric_limits<double>::infinity();
    int plateau_bad = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    int since_best = 0;
    Model best = model;
    std::vector<Matrix> grads;

    for (int epoch = 0; epoch < tcfg.max_epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        auto step = [&](const Batch& b) {
            std::size_t count = 0;
            for (int t : b.targets) count += t >= 0 ? 1 : 0;
            if (count == 0) return;
            const double loss = model.loss_and_grad(b, &grads, true);
            if (!std::isfinite(loss))
                throw TrainingDiverged(ds.name + ": non-finite training loss at epoch " + std::to_string(epoch));
            adam.step(model.params(), grads, tcfg, lr);
            loss_sum += loss * static_cast<double>(count);
            loss_count += count;
        };
        if (full) {
            step(*full);
        } else {
            auto order = train_idx;
            Rng rng(derive_seed(tcfg.seed, {"shuffle", epoch}));
            rng.shuffle(order);
            const auto bs = static_cast<std::size_t>(tcfg.batch_size);
            for (std::size_t s = 0; s < order.size(); s += bs) {
                const auto e = std::min(order.size(), s + bs);
                step(view.graphs_batch({order.begin() + static_cast<std::ptrdiff_t>(s),
                                        order.begin() + static_cast<std::ptrdiff_t>(e)}));
            }
        }

        const Evaluation val = evaluate(model, val_batches);
        if (!std::isfinite(val.loss))
            throw TrainingDiverged(ds.name + ": non-finite validation loss at epoch " + std::to_string(epoch));
        out.history.push_back({epoch, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0, val.loss,
                               val.auroc, lr});

        const double score = val.auroc ? *val.auroc : -val.loss;
        if (score > best_score) {
            best_score = score;
            since_best = 0;
            best = model;
            out.best_epoch = epoch;
        } else if (++since_best >= tcfg.early_stop_patience) {
            break;
        }

        if (val.loss < plateau_best * (1.0 - tcfg.plateau_threshold)) {
            plateau_best = val.loss;
            plateau_bad = 0;
        } else if (++plateau_bad > tcfg.plateau_patience) {
            lr = std::max(lr * tcfg.lr_decay_factor, tcfg.min_lr);
            plateau_bad = 0;
        }
    }
    out.model = std::move(best);
    return out;
}

}  // namespace gtaxo::mpnn
