// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "../oracles.hpp"
#include "gtaxo/alloc.hpp"
#include "gtaxo/cli.hpp"
#include "gtaxo/gtaxo.hpp"

using namespace gtaxo;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;
std::set<int> selected;

void report(int id, const std::string& title, const std::function<Outcome()>& fn) {
    if (!selected.empty() && !selected.contains(id)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << o.detail << " ["
              << fmt(seconds_since(t0), 3) << " s]" << std::endl;
}

Graph random_featured_graph(Rng& rng, NodeId max_n, int d) {
    const auto n = static_cast<NodeId>(rng.integer(2, max_n));
    const double p = rng.uniform(0.5, 6.0) / n;
    return oracle::random_graph(n, std::min(1.0, p), rng.next_u64(), d);
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// ---------------------------------------------------------------------------

Outcome wavelet_partition() {
    Rng rng(101);
    std::vector<Graph> graphs;
    for (int i = 0; i < 50; ++i) graphs.push_back(random_featured_graph(rng, 200, 4));
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (const auto& g : graphs) {
        const auto b = spectral::wavelet_bank(g.features(), g);
        worst = std::max(worst, max_abs(b.low + b.mid + b.high - g.features()));
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-10 && secs < 1.0, "max |low+mid+high-X| = " + fmt(worst) + " over 50 graphs in " +
                                              fmt(secs, 3) + " s (limits 1e-10, 1 s)"};
}

Outcome spectral_consistency() {
    Rng rng(202);
    double wavelet_err = 0.0, idem_err = 0.0, annihil_err = 0.0;
    const spectral::Band bands[] = {spectral::Band::low, spectral::Band::mid, spectral::Band::high};
    for (int i = 0; i < 20; ++i) {
        const Graph g = random_featured_graph(rng, 100, 3);
        // isolated nodes are fixed points of T with response h(1)
        Eigen::MatrixXd n = spectral::normalized_laplacian(g);
        for (NodeId v = 0; v < g.num_nodes(); ++v)
            if (g.degree(v) == 0) n(v, v) = 1.0;
        const auto dec = spectral::eigendecompose(n, spectral::LaplacianKind::normalized);
        for (auto b : bands) {
            Eigen::VectorXd h(dec.size());
            for (Eigen::Index k = 0; k < dec.size(); ++k) h[k] = spectral::wavelet_response(b, dec.eigenvalues[k]);
            const Eigen::MatrixXd ref = dec.eigenvectors * h.asDiagonal() * dec.eigenvectors.transpose() * g.features();
            wavelet_err = std::max(wavelet_err, max_abs(spectral::wavelet_filter(g.features(), g, b) - ref));
        }
        const auto hard = spectral::decompose(g, spectral::LaplacianKind::normalized);
        for (auto a : bands) {
            const auto pa = spectral::band_projector(hard, a);
            idem_err = std::max(idem_err, max_abs(pa * pa - pa));
            for (auto b : bands)
                if (a != b) annihil_err = std::max(annihil_err, max_abs(pa * spectral::band_projector(hard, b)));
        }
    }
    return {wavelet_err <= 1e-6 && idem_err <= 1e-8 && annihil_err <= 1e-8,
            "wavelet vs eigenbasis " + fmt(wavelet_err) + " (1e-6), P^2-P " + fmt(idem_err) + ", PaPb " +
                fmt(annihil_err) + " (1e-8), 20 graphs"};
}

Outcome rewire_quota() {
    Rng rng(303);
    int degree_ok = 0, small = 0, small_ok = 0, quota_met = 0;
    for (int i = 0; i < 100; ++i) {
        const bool tiny = i % 2 == 0;
        const auto n = static_cast<NodeId>(tiny ? rng.integer(4, 8) : rng.integer(10, 60));
        const double p = tiny ? rng.uniform(0.2, 0.6) : rng.uniform(0.05, 0.3);
        Graph g = oracle::random_graph(n, p, rng.next_u64());
        while (g.num_edges() < 2) g = oracle::random_graph(n, std::min(1.0, p + 0.2), rng.next_u64());
        const auto r = perturb::rand_rewire(g, rng.next_u64());
        degree_ok += r.graph.degrees() == g.degrees() && r.graph.num_edges() == g.num_edges();
        quota_met += r.rewired >= r.quota;
        if (g.num_edges() <= 12) {
            ++small;
            const bool legal_left = oracle::legal_swap_exists(r.graph.edges(), r.unrewired);
            small_ok += r.rewired >= r.quota || !legal_left;
        }
    }
    return {degree_ok == 100 && small > 0 && small_ok == small,
            "degrees preserved " + std::to_string(degree_ok) + "/100; |E|<=12: quota met or no legal swap left " +
                std::to_string(small_ok) + "/" + std::to_string(small) + "; quota met overall " +
                std::to_string(quota_met) + "/100"};
}

Outcome fiedler() {
    const Graph p4 = oracle::path(4);
    const auto part = perturb::fiedler_split(p4, {0, 1, 2, 3});
    auto a = part.positive, b = part.negative;
    if (!a.empty() && a.front() != 0) std::swap(a, b);
    const bool split_ok = a == std::vector<NodeId>{0, 1} && b == std::vector<NodeId>{2, 3};
    const double cut = perturb::ratio_cut_objective(p4, part.positive, part.negative);
    const double best = oracle::brute_force_min_ratio_cut(p4);
    Rng rng(404);
    int max_iter = 0, graphs = 0;
    bool terminated = true;
    for (int i = 0; i < 30; ++i) {
        const auto n = static_cast<NodeId>(rng.integer(20, 400));
        const Graph g = oracle::random_graph(n, rng.uniform(1.0, 8.0) / n, rng.next_u64());
        const auto r = perturb::fiedler_frag(g);
        max_iter = std::max(max_iter, r.iterations);
        terminated = terminated && r.iterations <= 200;
        ++graphs;
    }
    return {split_ok && cut == 0.25 && best == 0.25 && terminated,
            "P4 split " + std::string(split_ok ? "{0,1}|{2,3}" : "wrong") + ", ratio cut " + fmt(cut) +
                ", brute-force min over " + std::to_string(oracle::count_bipartitions(4)) + " bipartitions " +
                fmt(best) + "; FiedlerFrag max iterations " + std::to_string(max_iter) + " over " +
                std::to_string(graphs) + " graphs"};
}

double gradient_error(mpnn::ConvKind conv) {
    Rng rng(505);
    Eigen::MatrixXd x1(4, 3), x2(2, 3);
    for (Eigen::Index i = 0; i < x1.size(); ++i) x1.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < x2.size(); ++i) x2.data()[i] = rng.uniform(-1, 1);
    const Graph g1(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}}, x1), g2(2, {{0, 1}}, x2);
    const auto b = mpnn::make_batch({&g1, &g2}, {&g1.features(), &g2.features()}, true, {}, {0, 2});
    mpnn::ModelConfig cfg;
    cfg.conv = conv;
    cfg.input_dim = 3;
    cfg.hidden_dim = 5;
    cfg.num_layers = 2;
    cfg.num_classes = 3;
    mpnn::Model m(cfg, 9);
    for (std::size_t k = 0; k < m.params().size(); ++k)
        if (m.param_names()[k].ends_with(".eps")) m.params()[k](0, 0) = 0.2;
    std::vector<mpnn::Matrix> grads;
    m.loss_and_grad(b, &grads);
    double worst = 0.0;
    const double h = 1e-6;
    for (std::size_t k = 0; k < grads.size(); ++k) {
        mpnn::Matrix num(grads[k].rows(), grads[k].cols());
        auto& p = m.params()[k];
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double o = p.data()[i];
            p.data()[i] = o + h;
            const double up = m.loss_and_grad(b, nullptr);
            p.data()[i] = o - h;
            const double dn = m.loss_and_grad(b, nullptr);
            p.data()[i] = o;
            num.data()[i] = (up - dn) / (2 * h);
        }
        const double diff = (grads[k] - num).norm();
        if (diff > 1e-8) worst = std::max(worst, diff / std::max(grads[k].norm(), num.norm()));
        else if (grads[k].norm() > 1e-6) worst = std::max(worst, diff / grads[k].norm());
    }
    return worst;
}

Outcome gradient_check() {
    const double gcn = gradient_error(mpnn::ConvKind::gcn), gin = gradient_error(mpnn::ConvKind::gin);
    return {gcn <= 1e-4 && gin <= 1e-4,
            "max per-parameter-group relative error GCN " + fmt(gcn) + ", GIN " + fmt(gin) + " (limit 1e-4; groups with |diff| <= 1e-8 count as exact)"};
}

Outcome auroc_unit() {
    const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
    const std::vector<int> y{0, 0, 1, 1};
    const auto a = metrics::auroc_binary(s, y);
    Rng rng(606);
    int invariant = 0;
    for (int t = 0; t < 100; ++t) {
        std::vector<double> sc(50), tr(50);
        std::vector<int> lab(50);
        for (int i = 0; i < 50; ++i) {
            sc[i] = std::round(rng.uniform(-2, 2) * 10) / 10;
            tr[i] = std::atan(3 * sc[i]) + 5;
            lab[i] = i % 3 == 0 ? 1 : 0;
        }
        invariant += metrics::auroc_binary(sc, lab) == metrics::auroc_binary(tr, lab);
    }
    return {a && *a == 0.75 && invariant == 100,
            "example AUROC " + (a ? fmt(*a, 17) : std::string("undefined")) + " (expect 0.75 exactly); invariant under "
                "monotone transform " + std::to_string(invariant) + "/100"};
}

// ---------------------------------------------------------------------------
// Training-based criteria

profile::ProfileConfig desk_config(mpnn::ConvKind conv = mpnn::ConvKind::gcn) {
    profile::ProfileConfig c;
    c.conv = conv;
    c.repeats = 10;
    c.hidden_dim = 32;
    c.num_layers = 4;
    c.train.lr = 1e-2;
    c.train.max_epochs = 60;
    c.train.plateau_patience = 5;
    c.train.early_stop_patience = 15;
    c.train.batch_size = 32;
    c.seed = 2024;
    return c;
}

std::vector<double> aurocs(const Dataset& ds, const perturb::Perturbation& p, const profile::ProfileConfig& cfg) {
    std::vector<double> out;
    for (int r = 0; r < cfg.repeats; ++r) {
        const auto res = profile::run_once(ds, p, r, cfg);
        if (!res.auroc) throw std::runtime_error(p.name() + " repeat " + std::to_string(r) + ": " + res.note);
        out.push_back(*res.auroc);
    }
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double cv(const std::vector<double>& v) {
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size())) / m;
}

Dataset cluster_data() {
    auto spec = synth::GenSpec::defaults(synth::Family::sbm_cluster);
    spec.seed = 7;
    return synth::generate(spec);
}

Dataset pattern_data() {
    auto spec = synth::GenSpec::defaults(synth::Family::sbm_pattern);
    spec.seed = 8;
    return synth::generate(spec);
}

Outcome cluster_claim() {
    const Dataset ds = cluster_data();
    const auto cfg = desk_config();
    const double base = mean(aurocs(ds, perturb::Perturbation{}, cfg));
    const double none = mean(aurocs(ds, perturb::Perturbation{perturb::Kind::no_edges}, cfg));
    return {base >= 0.75 && none <= 0.55,
            "sbm_cluster mean test AUROC over 10 seeds: Original " + fmt(base) + " (>= 0.75), NoEdges " + fmt(none) +
                " (<= 0.55)"};
}

Outcome small_world_claim() {
    auto spec = synth::GenSpec::defaults(synth::Family::small_world);
    spec.seed = 9;
    const Dataset ds = synth::generate(spec);
    const auto cfg = desk_config();
    const double base = mean(aurocs(ds, perturb::Perturbation{}, cfg));
    const double deg = mean(aurocs(ds, perturb::Perturbation{perturb::Kind::node_deg}, cfg));
    const double none = mean(aurocs(ds, perturb::Perturbation{perturb::Kind::no_node_ftrs}, cfg));
    return {deg >= 0.85 * base && none > 0.55,
            "small_world over 10 folds: Original " + fmt(base) + ", NodeDeg " + fmt(deg) + " (" +
                fmt(100 * deg / base, 3) + "% of baseline, >= 85%), NoNodeFtrs " + fmt(none) + " (> 0.55)"};
}

Outcome frag_variance() {
    const auto cfg = desk_config();
    std::string detail;
    bool ok = true;
    for (const auto& [name, ds] : {std::pair<std::string, Dataset>{"sbm_cluster", cluster_data()},
                                   std::pair<std::string, Dataset>{"sbm_pattern", pattern_data()}}) {
        for (int k = 1; k <= 3; ++k) {
            const auto a = aurocs(ds, perturb::Perturbation{perturb::Kind::frag_k, k}, cfg);
            const double c = cv(a);
            ok = ok && c <= 0.05;
            detail += (detail.empty() ? "" : ", ") + name + " Frag-k" + std::to_string(k) + " mean " + fmt(mean(a)) +
                      " std/mean " + fmt(100 * c, 3) + "%";
        }
    }
    return {ok, detail + " (limit 5%)"};
}

Outcome taxonomy_oracles() {
    Rng rng(1010);
    Eigen::MatrixXd x(10, 13);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = std::clamp(rng.normal(0.0, 0.5), -1.0, 1.0);
    const auto d = taxonomy::ward_cluster(x);
    const auto ref = oracle::ward(x);
    bool order = d.merges.size() == ref.size();
    double height = 0.0;
    for (std::size_t i = 0; order && i < ref.size(); ++i) {
        order = d.merges[i].a == ref[i].a && d.merges[i].b == ref[i].b && d.merges[i].size == ref[i].size;
        height = std::max(height, std::abs(d.merges[i].height - ref[i].height));
    }
    const auto p = taxonomy::pca(x);
    const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
    const auto e = oracle::jacobi(c.transpose() * c / 9.0);
    double var = 0.0;
    for (Eigen::Index k = 0; k < p.explained_variance.size(); ++k)
        var = std::max(var, std::abs(p.explained_variance[k] - e.values[12 - k]));
    for (Eigen::Index k = p.explained_variance.size(); k < 13; ++k) var = std::max(var, std::abs(e.values[12 - k]));
    return {order && height <= 1e-9 && var <= 1e-8,
            "10x13 fixture: merge order " + std::string(order ? "identical" : "differs") + ", max height diff " +
                fmt(height) + " (1e-9), max explained-variance diff " + fmt(var) + " (1e-8)"};
}

std::vector<Dataset> reduced_suite() {
    std::vector<Dataset> out;
    auto add = [&](synth::Family f, int graphs, std::uint64_t seed) {
        auto spec = synth::GenSpec::defaults(f);
        spec.num_graphs = graphs;
        spec.seed = seed;
        if (f == synth::Family::small_world || f == synth::Family::scale_free || f == synth::Family::synthie_like ||
            f == synth::Family::syntheticnew_like)
            spec.num_folds = 5;
        out.push_back(synth::generate(spec));
    };
    add(synth::Family::small_world, 100, 21);
    add(synth::Family::scale_free, 100, 22);
    add(synth::Family::sbm_cluster, 60, 23);
    add(synth::Family::sbm_pattern, 60, 24);
    add(synth::Family::synthie_like, 100, 25);
    add(synth::Family::syntheticnew_like, 100, 26);
    return out;
}

Outcome model_agreement() {
    const auto suite = reduced_suite();
    auto cfg = desk_config(mpnn::ConvKind::gcn);
    cfg.repeats = 5;
    const auto gcn = profile::run_grid(suite, cfg);
    cfg.conv = mpnn::ConvKind::gin;
    const auto gin = profile::run_grid(suite, cfg);
    const double r = taxonomy::model_correlation(gcn, gin);
    return {r > 0.8, "Pearson(GCN, GIN) over clamped log2 ratios of " + std::to_string(suite.size()) +
                         " datasets x 13 perturbations = " + fmt(r) + " (> 0.8)"};
}

Outcome replay() {
    const fs::path root = fs::temp_directory_path() / "gtaxo_acceptance_replay";
    fs::remove_all(root);
    std::ostringstream sink;
    auto run = [&](std::vector<std::string> args) {
        const int code = cli::dispatch(args, sink, sink);
        if (code != 0) throw std::runtime_error("command failed: " + sink.str());
    };
    std::vector<std::string> profile_args = {"-q", "profile", "--datasets"};
    for (const auto& [name, family, seed] : {std::tuple<std::string, std::string, std::string>{"sw", "small_world", "1"},
                                             {"sf", "scale_free", "2"},
                                             {"sn", "syntheticnew_like", "3"}}) {
        run({"-q", "generate", "--family", family, "--name", name, "--seed", seed, "--num-graphs", "30", "--nodes",
             "40", "--folds", "3", "--out", (root / name).string()});
        profile_args.push_back((root / name).string());
    }
    const auto matrix = root / "profile" / "matrix.json";
    const auto tax = root / "taxonomy" / "taxonomy.json";
    for (const std::string s : {"--kinds", "NoEdges", "RandRewire", "Frag-k2", "NodeDeg", "--repeats", "2", "--hidden",
                                "8", "--layers", "2", "--epochs", "5", "--seed", "11", "--out"})
        profile_args.push_back(s);
    profile_args.push_back(matrix.string());
    run(profile_args);
    run({"-q", "taxonomize", "--matrix", matrix.string(), "--k", "2", "--out", tax.string()});
    const auto m1 = read_text_file(matrix), t1 = read_text_file(tax);
    run({"-q", "--replay", (matrix.parent_path() / "manifest.json").string()});
    run({"-q", "--replay", (tax.parent_path() / "manifest.json").string()});
    const bool same_m = read_text_file(matrix) == m1, same_t = read_text_file(tax) == t1;
    fs::remove_all(root);
    return {same_m && same_t, std::string("replayed matrix.json ") + (same_m ? "byte-identical" : "differs") +
                                  ", taxonomy.json " + (same_t ? "byte-identical" : "differs")};
}

}  // namespace

// optional arguments restrict the run to the listed criteria
int main(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
    tune_allocator();
    report(1, "wavelet partition of unity", wavelet_partition);
    report(2, "spectral consistency", spectral_consistency);
    report(3, "RandRewire degrees and quota", rewire_quota);
    report(4, "Fiedler split and termination", fiedler);
    report(5, "gradient check", gradient_check);
    report(6, "AUROC", auroc_unit);
    report(7, "CLUSTER structure dependence", cluster_claim);
    report(8, "structure-derived features", small_world_claim);
    report(9, "Frag-k seed variance", frag_variance);
    report(10, "taxonomy oracles", taxonomy_oracles);
    report(11, "GCN/GIN agreement", model_agreement);
    report(12, "manifest replay", replay);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
