#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"
#include "gtaxo/rng.hpp"

namespace gtaxo::mpnn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class ConvKind { gcn, gin };
enum class Pooling { mean, none };

inline std::string to_string(ConvKind k) { return k == ConvKind::gcn ? "gcn" : "gin"; }

inline ConvKind parse_conv(const std::string& s) {
    if (s == "gcn") return ConvKind::gcn;
    if (s == "gin") return ConvKind::gin;
    throw UsageError("unknown model '" + s + "' (expected gcn or gin)");
}

// Linear node embedding -> num_layers x (conv -> [batch norm] -> ReLU ->
// residual add) -> [global mean pool] -> 2-layer MLP head.
struct ModelConfig {
    ConvKind conv = ConvKind::gcn;
    int input_dim = 1;
    int hidden_dim = 64;
    int num_layers = 5;
    bool batch_norm = true;
    bool residual = true;
    Pooling pooling = Pooling::mean;
    int num_classes = 2;
    double bn_momentum = 0.1;
    double bn_eps = 1e-5;

    void validate() const {
        if (num_layers < 1) throw InputError("model needs at least one convolution layer");
        if (hidden_dim < 1 || input_dim < 1) throw InputError("model dimensions must be positive");
        if (num_classes < 2) throw InputError("model needs at least two classes");
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["conv"] = to_string(conv);
        j["input_dim"] = input_dim;
        j["hidden_dim"] = hidden_dim;
        j["num_layers"] = num_layers;
        j["batch_norm"] = batch_norm;
        j["residual"] = residual;
        j["pooling"] = pooling == Pooling::mean ? "mean" : "none";
        j["num_classes"] = num_classes;
        j["bn_momentum"] = bn_momentum;
        j["bn_eps"] = bn_eps;
        j["activation"] = "relu";
        return j;
    }
};

// A disjoint union of graphs assembled for one forward pass.
struct Batch {
    Matrix x;
    SparseMatrix adj;      // A, 0/1
    SparseMatrix gcn_adj;  // (D+I)^{-1/2} (A+I) (D+I)^{-1/2}
    SparseMatrix pool;     // graphs x nodes, rows average their graph's nodes
    std::vector<int> targets;  // one per output row; -1 = not scored

    Eigen::Index num_nodes() const { return x.rows(); }
};

// `features` overrides graph features (used to substitute a constant column
// for featureless graphs). `node_targets` gives a per-node target for node
// tasks; graph tasks use graph labels when `graph_targets` is set.
inline Batch make_batch(const std::vector<const Graph*>& graphs, const std::vector<const Matrix*>& features,
                        bool graph_level, const std::vector<std::vector<int>>& node_targets = {},
                        const std::vector<int>& graph_targets = {}) {
    Batch b;
    Eigen::Index n = 0, d = -1;
    std::size_t m = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        n += graphs[i]->num_nodes();
        m += graphs[i]->num_edges();
        if (d < 0) d = features[i]->cols();
        if (features[i]->cols() != d) throw InputError("batch: feature widths differ between graphs");
        if (features[i]->rows() != graphs[i]->num_nodes()) throw InputError("batch: feature rows do not match");
    }
    b.x.resize(n, std::max<Eigen::Index>(d, 0));
    std::vector<Eigen::Triplet<double>> ta, tg, tp;
    ta.reserve(2 * m);
    tg.reserve(2 * m + static_cast<std::size_t>(n));
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        const Graph& g = *graphs[i];
        const auto gn = g.num_nodes();
        if (gn > 0) b.x.middleRows(off, gn) = *features[i];
        std::vector<double> s(static_cast<std::size_t>(gn));
        for (NodeId v = 0; v < gn; ++v) s[v] = 1.0 / std::sqrt(static_cast<double>(g.degree(v) + 1));
        for (auto [u, v] : g.edges()) {
            ta.emplace_back(off + u, off + v, 1.0);
            ta.emplace_back(off + v, off + u, 1.0);
            tg.emplace_back(off + u, off + v, s[u] * s[v]);
            tg.emplace_back(off + v, off + u, s[u] * s[v]);
        }
        for (NodeId v = 0; v < gn; ++v) tg.emplace_back(off + v, off + v, s[v] * s[v]);
        if (graph_level) {
            for (NodeId v = 0; v < gn; ++v)
                tp.emplace_back(static_cast<Eigen::Index>(i), off + v, 1.0 / static_cast<double>(gn));
            b.targets.push_back(graph_targets.empty() ? -1 : graph_targets[i]);
        } else {
            for (NodeId v = 0; v < gn; ++v)
                b.targets.push_back(node_targets.empty() ? -1 : node_targets[i][static_cast<std::size_t>(v)]);
        }
        off += gn;
    }
    b.adj.resize(n, n);
    b.adj.setFromTriplets(ta.begin(), ta.end());
    b.gcn_adj.resize(n, n);
    b.gcn_adj.setFromTriplets(tg.begin(), tg.end());
    if (graph_level) {
        b.pool.resize(static_cast<Eigen::Index>(graphs.size()), n);
        b.pool.setFromTriplets(tp.begin(), tp.end());
    }
    return b;
}

class Model {
public:
    struct LayerSlots {
        int w = -1, b = -1;                    // GCN
        int eps = -1, w1 = -1, b1 = -1, w2 = -1, b2 = -1;  // GIN
        int gamma = -1, beta = -1;             // batch norm
    };

    Model() = default;

    Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
        cfg_.validate();
        Rng rng(seed);
        const int h = cfg_.hidden_dim;
        emb_w_ = add_linear("embed", cfg_.input_dim, h, rng, emb_b_);
        for (int l = 0; l < cfg_.num_layers; ++l) {
            LayerSlots s;
            const std::string p = "conv" + std::to_string(l);
            if (cfg_.conv == ConvKind::gcn) {
                s.w = add_linear(p, h, h, rng, s.b);
            } else {
                s.eps = add(p + ".eps", Matrix::Zero(1, 1));
                s.w1 = add_linear(p + ".mlp0", h, h, rng, s.b1);
                s.w2 = add_linear(p + ".mlp1", h, h, rng, s.b2);
            }
            if (cfg_.batch_norm) {
                s.gamma = add(p + ".bn.gamma", Matrix::Ones(1, h));
                s.beta = add(p + ".bn.beta", Matrix::Zero(1, h));
                running_mean_.push_back(RowVector::Zero(h));
                running_var_.push_back(RowVector::Ones(h));
            }
            layers_.push_back(s);
        }
        head_w1_ = add_linear("head0", h, h, rng, head_b1_);
        head_w2_ = add_linear("head1", h, cfg_.num_classes, rng, head_b2_);
    }

    const ModelConfig& config() const noexcept { return cfg_; }
    std::vector<Matrix>& params() noexcept { return params_; }
    const std::vector<Matrix>& params() const noexcept { return params_; }
    const std::vector<std::string>& param_names() const noexcept { return names_; }
    std::vector<RowVector>& running_mean() noexcept { return running_mean_; }
    std::vector<RowVector>& running_var() noexcept { return running_var_; }
    const std::vector<RowVector>& running_mean() const noexcept { return running_mean_; }
    const std::vector<RowVector>& running_var() const noexcept { return running_var_; }

    // Node embeddings after the last convolution (eval mode).
    Matrix embed(const Batch& b) const {
        Cache c;
        run_convs(b, false, c, nullptr);
        return c.h.back();
    }

    // Raw class scores (eval mode), one row per graph or node.
    Matrix predict(const Batch& b) const {
        Cache c;
        return forward(b, false, c, nullptr);
    }

    // Softmax probabilities (eval mode).
    Matrix predict_proba(const Batch& b) const { return softmax(predict(b)); }

    // Mean cross-entropy over scored rows in training mode (batch statistics).
    // Fills `grads` when non-null; running statistics are updated only when
    // `update_running` is set.
    double loss_and_grad(const Batch& b, std::vector<Matrix>* grads, bool update_running = false) {
        Cache c;
        std::vector<std::pair<RowVector, RowVector>> batch_stats;
        const Matrix logits = forward(b, true, c, &batch_stats);
        Matrix dlogits;
        const double loss = cross_entropy(logits, b.targets, grads ? &dlogits : nullptr);
        if (grads) backward(b, c, dlogits, *grads);
        if (update_running && cfg_.batch_norm && b.num_nodes() > 0) {
            const double mom = cfg_.bn_momentum;
            const double m = static_cast<double>(b.num_nodes());
            for (std::size_t l = 0; l < running_mean_.size(); ++l) {
                const RowVector unbiased = m > 1 ? RowVector(batch_stats[l].second * (m / (m - 1.0)))
                                                 : batch_stats[l].second;
                running_mean_[l] = (1.0 - mom) * running_mean_[l] + mom * batch_stats[l].first;
                running_var_[l] = (1.0 - mom) * running_var_[l] + mom * unbiased;
            }
        }
        return loss;
    }

    // Cross-entropy in eval mode; returns {sum of losses, scored rows}.
    std::pair<double, std::size_t> eval_loss(const Batch& b) const {
        const Matrix logits = predict(b);
        std::size_t count = 0;
        for (int t : b.targets) count += t >= 0 ? 1 : 0;
        return {cross_entropy(logits, b.targets, nullptr) * static_cast<double>(count), count};
    }

    static Matrix softmax(const Matrix& logits) {
        Matrix p(logits.rows(), logits.cols());
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            const double mx = logits.row(i).maxCoeff();
            const RowVector e = (logits.row(i).array() - mx).exp().matrix();
            p.row(i) = e / e.sum();
        }
        return p;
    }

    // Mean over rows with target >= 0; dlogits (when requested) is the
    // gradient of that mean.
    static double cross_entropy(const Matrix& logits, const std::vector<int>& targets, Matrix* dlogits) {
        if (static_cast<std::size_t>(logits.rows()) != targets.size())
            throw InputError("cross_entropy: target count does not match rows");
        std::size_t count = 0;
        for (int t : targets) count += t >= 0 ? 1 : 0;
        if (dlogits) dlogits->setZero(logits.rows(), logits.cols());
        if (count == 0) return 0.0;
        double loss = 0.0;
        for (Eigen::Index i = 0; i < logits.rows(); ++i) {
            const int t = targets[static_cast<std::size_t>(i)];
            if (t < 0) continue;
            if (t >= logits.cols()) throw InputError("cross_entropy: target class out of range");
            const double mx = logits.row(i).maxCoeff();
            const RowVector e = (logits.row(i).array() - mx).exp().matrix();
            const double z = e.sum();
            loss += -(logits(i, t) - mx - std::log(z));
            if (dlogits) {
                dlogits->row(i) = e / z;
                (*dlogits)(i, t) -= 1.0;
            }
        }
        const double inv = 1.0 / static_cast<double>(count);
        if (dlogits) *dlogits *= inv;
        return loss * inv;
    }

    nlohmann::ordered_json to_json() const;
    static Model from_json(const nlohmann::ordered_json& j);

private:
    struct LayerCache {
        Matrix m;                 // GCN: aggregated input; GIN: (1+eps)h + A h
        Matrix u, ur;             // GIN hidden pre/post ReLU
        Matrix z;                 // conv output
        Matrix xhat;              // batch norm normalized
        RowVector inv_std;
        Matrix y;                 // pre-activation
    };
    struct Cache {
        std::vector<Matrix> h;  // h[0] = embedding, h[l+1] = output of layer l
        std::vector<LayerCache> layers;
        Matrix g;               // pooled
        Matrix q1;              // head hidden pre-activation
        Matrix qr;
    };

    int add(std::string name, Matrix value) {
        names_.push_back(std::move(name));
        params_.push_back(std::move(value));
        return static_cast<int>(params_.size()) - 1;
    }

    // Fan-in scaled uniform init, bound 1/sqrt(fan_in).
    int add_linear(const std::string& name, int in, int out, Rng& rng, int& bias_slot) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Matrix w(in, out);
        for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
        Matrix b(1, out);
        for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-bound, bound);
        const int ws = add(name + ".weight", std::move(w));
        bias_slot = add(name + ".bias", std::move(b));
        return ws;
    }

    static Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

    static Matrix relu_grad(const Matrix& upstream, const Matrix& pre) {
        return (pre.array() > 0.0).select(upstream, 0.0);
    }

    void run_convs(const Batch& b, bool training, Cache& c,
                   std::vector<std::pair<RowVector, RowVector>>* stats) const {
        if (b.x.cols() != cfg_.input_dim)
            throw InputError("model expects " + std::to_string(cfg_.input_dim) + " input features, got " +
                             std::to_string(b.x.cols()));
        const auto& P = params_;
        c.h.clear();
        c.layers.assign(static_cast<std::size_t>(cfg_.num_layers), {});
        c.h.push_back((b.x * P[emb_w_]).rowwise() + RowVector(P[emb_b_]));
        for (int l = 0; l < cfg_.num_layers; ++l) {
            const auto& s = layers_[static_cast<std::size_t>(l)];
            auto& lc = c.layers[static_cast<std::size_t>(l)];
            const Matrix& h = c.h.back();
            if (cfg_.conv == ConvKind::gcn) {
                lc.m = b.gcn_adj * h;
                lc.z = (lc.m * P[s.w]).rowwise() + RowVector(P[s.b]);
            } else {
                lc.m = (1.0 + P[s.eps](0, 0)) * h + b.adj * h;
                lc.u = (lc.m * P[s.w1]).rowwise() + RowVector(P[s.b1]);
                lc.ur = relu(lc.u);
                lc.z = (lc.ur * P[s.w2]).rowwise() + RowVector(P[s.b2]);
            }
            if (cfg_.batch_norm) {
                const auto bn = static_cast<std::size_t>(l);
                RowVector mean, var;
                if (training) {
                    const double m = std::max<double>(1.0, static_cast<double>(lc.z.rows()));
                    mean = lc.z.colwise().sum() / m;
                    var = (lc.z.rowwise() - mean).array().square().colwise().sum().matrix() / m;
                    if (stats) stats->emplace_back(mean, var);
                } else {
                    mean = running_mean_[bn];
                    var = running_var_[bn];
                }
                lc.inv_std = (var.array() + cfg_.bn_eps).rsqrt().matrix();
                lc.xhat = (lc.z.rowwise() - mean).array().rowwise() * lc.inv_std.array();
                lc.y = (lc.xhat.array().rowwise() * RowVector(P[s.gamma]).array()).matrix().rowwise() +
                       RowVector(P[s.beta]);
            } else {
                lc.y = lc.z;
            }
            Matrix out = relu(lc.y);
            if (cfg_.residual) out += h;
            c.h.push_back(std::move(out));
        }
    }

    Matrix forward(const Batch& b, bool training, Cache& c,
                   std::vector<std::pair<RowVector, RowVector>>* stats) const {
        run_convs(b, training, c, stats);
        const auto& P = params_;
        c.g = cfg_.pooling == Pooling::mean ? Matrix(b.pool * c.h.back()) : c.h.back();
        c.q1 = (c.g * P[head_w1_]).rowwise() + RowVector(P[head_b1_]);
        c.qr = relu(c.q1);
        return (c.qr * P[head_w2_]).rowwise() + RowVector(P[head_b2_]);
    }

    void backward(const Batch& b, const Cache& c, const Matrix& dlogits, std::vector<Matrix>& grads) const {
        const auto& P = params_;
        grads.resize(P.size());
        for (std::size_t i = 0; i < P.size(); ++i) grads[i].setZero(P[i].rows(), P[i].cols());

        grads[head_w2_] = c.qr.transpose() * dlogits;
        grads[head_b2_] = dlogits.colwise().sum();
        const Matrix dq1 = relu_grad(dlogits * P[head_w2_].transpose(), c.q1);
        grads[head_w1_] = c.g.transpose() * dq1;
        grads[head_b1_] = dq1.colwise().sum();
        const Matrix dg = dq1 * P[head_w1_].transpose();
        Matrix dh = cfg_.pooling == Pooling::mean ? Matrix(b.pool.transpose() * dg) : dg;

        for (int l = cfg_.num_layers - 1; l >= 0; --l) {
            const auto& s = layers_[static_cast<std::size_t>(l)];
            const auto& lc = c.layers[static_cast<std::size_t>(l)];
            const Matrix& h_in = c.h[static_cast<std::size_t>(l)];
            const Matrix dy = relu_grad(dh, lc.y);
            Matrix dh_in = cfg_.residual ? dh : Matrix::Zero(dh.rows(), dh.cols());
            Matrix dz;
            if (cfg_.batch_norm) {
                grads[s.gamma] = (dy.array() * lc.xhat.array()).colwise().sum().matrix();
                grads[s.beta] = dy.colwise().sum();
                const Matrix dxhat = dy.array().rowwise() * RowVector(P[s.gamma]).array();
                const double m = static_cast<double>(dy.rows());
                const RowVector sum_dxhat = dxhat.colwise().sum();
                const RowVector sum_dxhat_xhat = (dxhat.array() * lc.xhat.array()).colwise().sum().matrix();
                Matrix t = (m * dxhat).rowwise() - sum_dxhat;
                t -= (lc.xhat.array().rowwise() * sum_dxhat_xhat.array()).matrix();
                dz = (t.array().rowwise() * (lc.inv_std.array() / m)).matrix();
            } else {
                dz = dy;
            }
            if (cfg_.conv == ConvKind::gcn) {
                grads[s.w] = lc.m.transpose() * dz;
                grads[s.b] = dz.colwise().sum();
                const Matrix dm = dz * P[s.w].transpose();
                dh_in += b.gcn_adj.transpose() * dm;
            } else {
                grads[s.w2] = lc.ur.transpose() * dz;
                grads[s.b2] = dz.colwise().sum();
                const Matrix du = relu_grad(dz * P[s.w2].transpose(), lc.u);
                grads[s.w1] = lc.m.transpose() * du;
                grads[s.b1] = du.colwise().sum();
                const Matrix dm = du * P[s.w1].transpose();
                grads[s.eps](0, 0) = (h_in.array() * dm.array()).sum();
                dh_in += (1.0 + P[s.eps](0, 0)) * dm;
                dh_in += b.adj.transpose() * dm;
            }
            dh = std::move(dh_in);
        }
        grads[emb_w_] = b.x.transpose() * dh;
        grads[emb_b_] = dh.colwise().sum();
    }

    ModelConfig cfg_;
    std::vector<Matrix> params_;
    std::vector<std::string> names_;
    std::vector<LayerSlots> layers_;
    std::vector<RowVector> running_mean_, running_var_;
    int emb_w_ = -1, emb_b_ = -1, head_w1_ = -1, head_b1_ = -1, head_w2_ = -1, head_b2_ = -1;
};

// Shortest decimal form that parses back to the same double.
inline std::string exact_decimal(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline double parse_exact_decimal(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("bad decimal value '" + s + "'");
    return v;
}

namespace detail {

inline nlohmann::ordered_json matrix_to_json(const Matrix& m) {
    nlohmann::ordered_json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    nlohmann::ordered_json data = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(exact_decimal(m(r, c)));
    j["data"] = std::move(data);
    return j;
}

inline Matrix matrix_from_json(const nlohmann::ordered_json& j) {
    Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != m.size()) throw InputError("parameter tensor size mismatch");
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = parse_exact_decimal(data[k++].get<std::string>());
    return m;
}

}  // namespace detail

inline nlohmann::ordered_json Model::to_json() const {
    nlohmann::ordered_json j;
    j["config"] = cfg_.to_json();
    nlohmann::ordered_json ps = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto t = detail::matrix_to_json(params_[i]);
        t["name"] = names_[i];
        ps.push_back(std::move(t));
    }
    j["parameters"] = std::move(ps);
    nlohmann::ordered_json bn = nlohmann::ordered_json::array();
    for (std::size_t l = 0; l < running_mean_.size(); ++l) {
        nlohmann::ordered_json e;
        e["mean"] = detail::matrix_to_json(running_mean_[l]);
        e["var"] = detail::matrix_to_json(running_var_[l]);
        bn.push_back(std::move(e));
    }
    j["batch_norm_running"] = std::move(bn);
    return j;
}

inline Model Model::from_json(const nlohmann::ordered_json& j) {
    const auto& cj = j.at("config");
    ModelConfig cfg;
    cfg.conv = parse_conv(cj.at("conv").get<std::string>());
    cfg.input_dim = cj.at("input_dim").get<int>();
    cfg.hidden_dim = cj.at("hidden_dim").get<int>();
    cfg.num_layers = cj.at("num_layers").get<int>();
    cfg.batch_norm = cj.at("batch_norm").get<bool>();
    cfg.residual = cj.at("residual").get<bool>();
    cfg.pooling = cj.at("pooling").get<std::string>() == "mean" ? Pooling::mean : Pooling::none;
    cfg.num_classes = cj.at("num_classes").get<int>();
    cfg.bn_momentum = cj.value("bn_momentum", 0.1);
    cfg.bn_eps = cj.value("bn_eps", 1e-5);
    Model m(cfg, 0);
    const auto& ps = j.at("parameters");
    if (ps.size() != m.params_.size()) throw InputError("model file has wrong parameter count");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        Matrix v = detail::matrix_from_json(ps[i]);
        if (v.rows() != m.params_[i].rows() || v.cols() != m.params_[i].cols())
            throw InputError("parameter '" + m.names_[i] + "' has the wrong shape");
        m.params_[i] = std::move(v);
    }
    const auto& bn = j.at("batch_norm_running");
    if (bn.size() != m.running_mean_.size()) throw InputError("model file has wrong batch norm state");
    for (std::size_t l = 0; l < bn.size(); ++l) {
        m.running_mean_[l] = detail::matrix_from_json(bn[l].at("mean"));
        m.running_var_[l] = detail::matrix_from_json(bn[l].at("var"));
    }
    return m;
}

}  // namespace gtaxo::mpnn
