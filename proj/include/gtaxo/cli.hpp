#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gtaxo/dataset_io.hpp"
#include "gtaxo/errors.hpp"
#include "gtaxo/graph_stats.hpp"
#include "gtaxo/manifest.hpp"
#include "gtaxo/perturb.hpp"
#include "gtaxo/profiler.hpp"
#include "gtaxo/sensitivity.hpp"
#include "gtaxo/synthgen.hpp"
#include "gtaxo/taxonomy.hpp"
#include "gtaxo/train.hpp"
#include "gtaxo/version.hpp"

namespace gtaxo::cli {

namespace detail {

inline std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

inline ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

inline fs::path sibling(const fs::path& out, const std::string& suffix) {
    return out.parent_path() / (out.stem().string() + suffix);
}

inline fs::path out_dir(const fs::path& file) {
    return file.has_parent_path() ? file.parent_path() : fs::path(".");
}

// Percentage ratio table: rows datasets, columns perturbations.
inline std::string ratio_csv(const SensitivityMatrix& m, const std::vector<std::size_t>& row_order,
                             const std::vector<int>* clusters = nullptr) {
    std::string s = "dataset";
    if (clusters) s += ",cluster";
    for (const auto& p : m.perturbations) s += "," + csv_field(p);
    s += "\n";
    for (std::size_t r : row_order) {
        s += csv_field(m.datasets[r]);
        if (clusters) s += "," + std::to_string((*clusters)[r]);
        for (std::size_t c = 0; c < m.perturbations.size(); ++c) s += "," + fixed(100.0 * m.ratio(r, c), 2);
        s += "\n";
    }
    return s;
}

inline std::vector<std::size_t> identity_order(std::size_t n) {
    std::vector<std::size_t> o(n);
    for (std::size_t i = 0; i < n; ++i) o[i] = i;
    return o;
}

struct Common {
    std::vector<std::string> argv;
    std::ostream* err = &std::cerr;
    bool quiet = false;

    void log(const std::string& msg) const {
        if (!quiet) *err << msg << "\n";
    }
};

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string family;
    std::uint64_t seed = 0;
    std::string out;
    std::string name;
    std::optional<int> num_graphs, nodes, folds;
    std::optional<double> p_in, p_out;
    bool shared_features = false;
};

inline int run_generate(const GenerateArgs& a, const Common& c) {
    auto spec = synth::GenSpec::defaults(synth::parse_family(a.family));
    spec.seed = a.seed;
    if (a.num_graphs) spec.num_graphs = *a.num_graphs;
    if (a.nodes) spec.nodes_per_graph = *a.nodes;
    if (a.folds) spec.num_folds = *a.folds;
    if (a.p_in) spec.sbm_p_in = *a.p_in;
    if (a.p_out) spec.sbm_p_out = *a.p_out;
    if (a.shared_features) spec.synthie_shared_features = true;
    Dataset ds = synth::generate(spec);
    if (!a.name.empty()) ds.name = a.name;
    const fs::path out = a.out;
    write_dataset(ds, out);
    write_text_file(out / "genspec.json", dump_json(spec.to_json()));
    Manifest m;
    m.command = "generate";
    m.argv = c.argv;
    m.config = spec.to_json();
    m.seeds["root"] = a.seed;
    m.add_output("genspec.json", out / "genspec.json");
    m.add_output("meta.json", out / "meta.json");
    m.write(out);
    c.log("generated " + std::to_string(ds.graphs.size()) + " graphs into " + out.string());
    return 0;
}

struct StatsArgs {
    std::string dataset;
    std::string out;
    bool per_class = false;
    std::string eigenvalues;
    std::size_t graph = 0;
    std::string laplacian = "normalized";
};

// Spectrum of one graph as node_index,eigenvalue rows.
inline std::string eigenvalue_csv(const Graph& g, spectral::LaplacianKind kind) {
    const auto dec = spectral::decompose(g, kind);
    std::string csv = "node_index,eigenvalue\n";
    char buf[64];
    for (Eigen::Index i = 0; i < dec.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", dec.eigenvalues[i]);
        csv += std::to_string(i) + "," + buf + "\n";
    }
    return csv;
}

inline int run_stats(const StatsArgs& a, const Common& c) {
    const Dataset ds = read_dataset(a.dataset);
    std::map<std::string, std::vector<stats::GraphStats>> groups;
    for (const auto& g : ds.graphs) {
        std::string key = "all";
        if (a.per_class && ds.task == Task::graph_classification) key = std::to_string(*g.graph_label());
        groups[key].push_back(stats::graph_stats(g));
    }
    std::vector<std::string> keys;
    for (const auto& [k, v] : groups) keys.push_back(k);
    if (keys.size() > 1 || keys.front() != "all")
        std::sort(keys.begin(), keys.end(),
                  [](const std::string& x, const std::string& y) { return std::stoi(x) < std::stoi(y); });
    std::string csv = "class,num_graphs,num_nodes,num_edges,density,diameter,avg_clustering,triangles\n";
    for (const auto& k : keys) {
        const auto& v = groups[k];
        stats::GraphStats s;
        for (const auto& x : v) {
            s.num_nodes += x.num_nodes;
            s.num_edges += x.num_edges;
            s.density += x.density;
            s.diameter += x.diameter;
            s.avg_clustering += x.avg_clustering;
            s.triangles += x.triangles;
        }
        const double n = static_cast<double>(v.size());
        csv += k + "," + std::to_string(v.size()) + "," + fixed(s.num_nodes / n, 4) + "," + fixed(s.num_edges / n, 4) +
               "," + fixed(s.density / n, 6) + "," + fixed(s.diameter / n, 4) + "," +
               fixed(s.avg_clustering / n, 6) + "," + fixed(s.triangles / n, 4) + "\n";
    }
    const fs::path out = a.out;
    write_text_file(out, csv);
    Manifest m;
    m.command = "stats";
    m.argv = c.argv;
    m.config["per_class"] = a.per_class;
    m.add_input(a.dataset);
    m.add_output(out.filename().string(), out);
    if (!a.eigenvalues.empty()) {
        if (a.graph >= ds.graphs.size())
            throw UsageError("--graph " + std::to_string(a.graph) + " out of range (" +
                             std::to_string(ds.graphs.size()) + " graphs)");
        const auto kind = a.laplacian == "combinatorial" ? spectral::LaplacianKind::combinatorial
                                                         : spectral::LaplacianKind::normalized;
        const fs::path ev = a.eigenvalues;
        write_text_file(ev, eigenvalue_csv(ds.graphs[a.graph], kind));
        m.config["eigenvalues_graph"] = a.graph;
        m.config["laplacian"] = a.laplacian;
        m.add_output(ev.filename().string(), ev);
    }
    m.write(out_dir(out));
    return 0;
}

struct PerturbArgs {
    std::string dataset;
    std::string kind;
    int k = 0;
    std::string mode = "auto";
    std::uint64_t seed = 0;
    std::string out;
};

inline int run_perturb(const PerturbArgs& a, const Common& c) {
    const Dataset ds = read_dataset(a.dataset);
    auto p = perturb::parse_perturbation(a.kind, a.k);
    p.mode = perturb::parse_mode(a.mode);
    const perturb::PerturbOptions opt;
    auto pd = perturb::apply(ds, p, a.seed, opt);
    const fs::path out = a.out;
    write_dataset(pd.dataset, out);
    ojson meta;
    meta["perturbation"] = p.name();
    meta["mode"] = perturb::to_string(p.mode);
    meta["seed"] = a.seed;
    meta["source"] = content_hash(a.dataset);
    if (p.kind == perturb::Kind::node_deg) meta["node_deg_width"] = pd.node_deg_width;
    ojson notes = ojson::array();
    for (std::size_t i = 0; i < pd.graph_notes.size(); ++i)
        if (!pd.graph_notes[i].empty()) notes.push_back({{"graph", i}, {"note", pd.graph_notes[i]}});
    meta["notes"] = std::move(notes);
    write_text_file(out / "perturb_meta.json", dump_json(meta));
    Manifest m;
    m.command = "perturb";
    m.argv = c.argv;
    m.config["perturbation"] = p.name();
    m.config["mode"] = perturb::to_string(p.mode);
    m.config["fully_conn_guard"] = opt.fully_conn_guard;
    m.config["dense_limit"] = opt.dense_limit;
    m.config["fiedler_max_iterations"] = opt.fiedler.max_iterations;
    m.config["fiedler_min_component"] = opt.fiedler.min_component;
    m.config["rewire_fraction"] = opt.rewire.fraction;
    m.seeds["root"] = a.seed;
    m.add_input(a.dataset);
    m.add_output("perturb_meta.json", out / "perturb_meta.json");
    m.add_output("meta.json", out / "meta.json");
    m.write(out);
    c.log("applied " + p.name() + " to " + std::to_string(ds.graphs.size()) + " graphs");
    return 0;
}

struct TrainOptions {
    std::string model = "gcn";
    int hidden = 64;
    int layers = 5;
    int epochs = 300;
    double lr = 1e-3;
    int batch_size = 32;
    int plateau_patience = 10;
    int early_stop_patience = 30;
};

inline mpnn::TrainConfig train_config(const TrainOptions& o) {
    mpnn::TrainConfig t;
    t.max_epochs = o.epochs;
    t.lr = o.lr;
    t.batch_size = o.batch_size;
    t.plateau_patience = o.plateau_patience;
    t.early_stop_patience = o.early_stop_patience;
    return t;
}

inline void add_train_options(CLI::App* app, TrainOptions& o) {
    app->add_option("--model", o.model, "gcn or gin")->capture_default_str()->check(CLI::IsMember({"gcn", "gin"}));
    app->add_option("--hidden", o.hidden, "hidden width")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--layers", o.layers, "convolution layers")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--epochs", o.epochs, "maximum epochs")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--lr", o.lr, "base learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--batch-size", o.batch_size, "graphs per batch")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--plateau-patience", o.plateau_patience, "epochs before halving the learning rate")
        ->capture_default_str();
    app->add_option("--early-stop-patience", o.early_stop_patience, "epochs without improvement before stopping")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
}

struct TrainArgs {
    std::string dataset;
    TrainOptions opt;
    std::uint64_t seed = 0;
    int repeat = 0;
    std::string out;
};

inline int run_train(const TrainArgs& a, const Common& c) {
    const Dataset ds = read_dataset(a.dataset);
    auto mcfg = mpnn::model_config_for(ds, mpnn::parse_conv(a.opt.model), a.opt.hidden);
    mcfg.num_layers = a.opt.layers;
    auto tcfg = train_config(a.opt);
    tcfg.seed = a.seed;
    const auto masks = split_masks(ds, a.repeat);
    const auto tm = mpnn::train(ds, masks, mcfg, tcfg);
    const auto val = mpnn::evaluate(tm.model, ds, masks.val);
    const auto test = mpnn::evaluate(tm.model, ds, masks.test);
    ojson j = tm.to_json();
    ojson ev;
    ev["repeat"] = a.repeat;
    ev["val_auroc"] = val.auroc ? ojson(mpnn::exact_decimal(*val.auroc)) : ojson(nullptr);
    ev["test_auroc"] = test.auroc ? ojson(mpnn::exact_decimal(*test.auroc)) : ojson(nullptr);
    j["evaluation"] = std::move(ev);
    const fs::path out = a.out;
    write_text_file(out, dump_json(j));
    Manifest m;
    m.command = "train";
    m.argv = c.argv;
    m.config["model"] = mcfg.to_json();
    m.config["train"] = tcfg.to_json();
    m.config["repeat"] = a.repeat;
    m.seeds["root"] = a.seed;
    m.seeds["init"] = derive_seed(a.seed, {"init"});
    m.add_input(a.dataset);
    m.add_output(out.filename().string(), out);
    m.write(out_dir(out));
    c.log("trained " + mpnn::to_string(mcfg.conv) + " on " + ds.name + ": test AUROC " +
          (test.auroc ? fixed(*test.auroc, 4) : std::string("undefined")));
    return 0;
}

struct ProfileArgs {
    std::vector<std::string> datasets;
    TrainOptions opt;
    int repeats = 10;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::vector<std::string> kinds;
    std::string mode = "auto";
    std::string out;
};

inline int run_profile(const ProfileArgs& a, const Common& c) {
    std::vector<Dataset> dss;
    for (const auto& d : a.datasets) dss.push_back(read_dataset(d));
    profile::ProfileConfig cfg;
    cfg.conv = mpnn::parse_conv(a.opt.model);
    cfg.repeats = a.repeats;
    cfg.hidden_dim = a.opt.hidden;
    cfg.num_layers = a.opt.layers;
    cfg.train = train_config(a.opt);
    cfg.seed = a.seed;
    cfg.jobs = a.jobs > 0 ? a.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (!a.kinds.empty()) {
        cfg.perturbations.clear();
        for (const auto& k : a.kinds) cfg.perturbations.push_back(perturb::parse_perturbation(k));
    }
    const auto mode = perturb::parse_mode(a.mode);
    for (auto& p : cfg.perturbations) p.mode = mode;
    if (!c.quiet) cfg.log = [&c](const std::string& s) { c.log(s); };

    Manifest man;
    man.command = "profile";
    man.argv = c.argv;
    man.config = cfg.to_json();
    man.seeds["root"] = a.seed;
    for (const auto& d : a.datasets) man.add_input(d);

    SensitivityMatrix m = profile::run_grid(dss, cfg);
    m.manifest = man.header();
    const fs::path out = a.out;
    write_text_file(out, dump_json(m.to_json()));
    const fs::path csv = sibling(out, ".csv");
    write_text_file(csv, ratio_csv(m, identity_order(m.datasets.size())));
    man.add_output(out.filename().string(), out);
    man.add_output(csv.filename().string(), csv);
    man.config["jobs"] = cfg.jobs;
    man.write(out_dir(out));
    return 0;
}

struct TaxonomizeArgs {
    std::string matrix;
    int k = 3;
    std::string compare;
    std::string out;
};

inline std::string matrix_csv(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                              const Eigen::MatrixXd& v, const std::string& corner) {
    std::string s = csv_field(corner);
    for (const auto& cn : cols) s += "," + csv_field(cn);
    s += "\n";
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        s += csv_field(rows[static_cast<std::size_t>(r)]);
        for (Eigen::Index cc = 0; cc < v.cols(); ++cc) {
            const double x = v(r, cc);
            s += "," + (std::isfinite(x) ? mpnn::exact_decimal(x) : std::string("NA"));
        }
        s += "\n";
    }
    return s;
}

inline int run_taxonomize(const TaxonomizeArgs& a, const Common& c) {
    const auto m = SensitivityMatrix::from_json(parse_json_file(a.matrix));
    const auto am = analysis_matrix(m);
    if (a.k < 1 || a.k > static_cast<int>(am.rows.size()))
        throw UsageError("--k must lie in [1, " + std::to_string(am.rows.size()) + "]");
    const auto dendro = taxonomy::ward_cluster(am.values, am.rows);
    const auto labels = taxonomy::cut(dendro, a.k);

    ojson j;
    j["model"] = m.model;
    j["rows"] = am.rows;
    j["columns"] = am.columns;
    j["dropped_columns"] = am.dropped;
    j["k"] = a.k;
    j["dendrogram"] = taxonomy::to_json(dendro);
    ojson cl = ojson::array();
    for (std::size_t i = 0; i < am.rows.size(); ++i) cl.push_back({{"dataset", am.rows[i]}, {"cluster", labels[i]}});
    j["clusters"] = std::move(cl);

    const fs::path out = a.out;
    std::vector<std::pair<std::string, fs::path>> side;
    auto write_side = [&](const std::string& suffix, const std::string& text) {
        const fs::path p = sibling(out, suffix);
        write_text_file(p, text);
        side.emplace_back(p.filename().string(), p);
    };
    std::string ccsv = "dataset,cluster\n";
    for (std::size_t i = 0; i < am.rows.size(); ++i)
        ccsv += csv_field(am.rows[i]) + "," + std::to_string(labels[i]) + "\n";
    write_side("_clusters.csv", ccsv);
    write_side("_dendrogram.nwk", taxonomy::newick(dendro) + "\n");

    if (am.rows.size() >= 2 && am.values.cols() > 0) {
        const auto p = taxonomy::pca(am.values);
        std::vector<std::string> pcs;
        for (Eigen::Index k = 0; k < p.loadings.cols(); ++k) pcs.push_back("PC" + std::to_string(k + 1));
        ojson pj;
        pj["components"] = pcs;
        pj["explained_variance"] = std::vector<double>(p.explained_variance.data(),
                                                       p.explained_variance.data() + p.explained_variance.size());
        pj["explained_ratio"] =
            std::vector<double>(p.explained_ratio.data(), p.explained_ratio.data() + p.explained_ratio.size());
        ojson load = ojson::object(), coord = ojson::object();
        for (std::size_t i = 0; i < am.columns.size(); ++i) {
            const Eigen::RowVectorXd r = p.loadings.row(static_cast<Eigen::Index>(i));
            load[am.columns[i]] = std::vector<double>(r.data(), r.data() + r.size());
        }
        for (std::size_t i = 0; i < am.rows.size(); ++i) {
            const Eigen::RowVectorXd r = p.scores.row(static_cast<Eigen::Index>(i));
            coord[am.rows[i]] = std::vector<double>(r.data(), r.data() + r.size());
        }
        pj["loadings"] = std::move(load);
        pj["coordinates"] = std::move(coord);
        j["pca"] = std::move(pj);
        write_side("_pca_coordinates.csv", matrix_csv(am.rows, pcs, p.scores, "dataset"));
        write_side("_pca_loadings.csv", matrix_csv(am.columns, pcs, p.loadings, "perturbation"));
        Eigen::MatrixXd ev(p.explained_variance.size(), 2);
        ev.col(0) = p.explained_variance;
        ev.col(1) = p.explained_ratio;
        write_side("_pca_explained.csv", matrix_csv(pcs, {"variance", "ratio"}, ev, "component"));

        const auto corr = taxonomy::pert_correlation(am.values);
        ojson cj = ojson::array();
        for (Eigen::Index r = 0; r < corr.rows(); ++r) {
            ojson row = ojson::array();
            for (Eigen::Index cc = 0; cc < corr.cols(); ++cc) row.push_back(num(corr(r, cc)));
            cj.push_back(std::move(row));
        }
        j["pert_correlation"] = std::move(cj);
        write_side("_correlation.csv", matrix_csv(am.columns, am.columns, corr, "perturbation"));
    }

    Manifest man;
    man.command = "taxonomize";
    man.argv = c.argv;
    man.config["k"] = a.k;
    man.config["linkage"] = "ward";
    man.config["distance"] = "euclidean on clamped log2 ratios";
    man.add_input(a.matrix);
    if (!a.compare.empty()) {
        const auto other = SensitivityMatrix::from_json(parse_json_file(a.compare));
        const double r = taxonomy::model_correlation(m, other);
        j["model_correlation"] = {{"models", {m.model, other.model}}, {"pearson", num(r)}};
        man.add_input(a.compare);
    }
    j["manifest"] = man.header();
    write_text_file(out, dump_json(j));
    man.add_output(out.filename().string(), out);
    for (const auto& [name, p] : side) man.add_output(name, p);
    man.write(out_dir(out));
    return 0;
}

struct ReportArgs {
    std::string matrix;
    std::string taxonomy;
    std::string out;
};

inline int run_report(const ReportArgs& a, const Common& c) {
    const auto m = SensitivityMatrix::from_json(parse_json_file(a.matrix));
    std::vector<int> clusters(m.datasets.size(), -1);
    ojson tax;
    if (!a.taxonomy.empty()) {
        tax = parse_json_file(a.taxonomy);
        for (const auto& e : tax.at("clusters"))
            clusters[m.row(e.at("dataset").get<std::string>())] = e.at("cluster").get<int>();
    }
    auto order = identity_order(m.datasets.size());
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return clusters[x] < clusters[y]; });

    ojson j;
    j["model"] = m.model;
    j["datasets"] = m.datasets;
    j["perturbations"] = m.perturbations;
    ojson rows = ojson::array();
    for (std::size_t r : order) {
        ojson row;
        row["dataset"] = m.datasets[r];
        row["cluster"] = clusters[r] >= 0 ? ojson(clusters[r]) : ojson(nullptr);
        ojson pct = ojson::object(), auc = ojson::object();
        for (std::size_t cc = 0; cc < m.perturbations.size(); ++cc) {
            pct[m.perturbations[cc]] = num(100.0 * m.ratio(r, cc));
            auc[m.perturbations[cc]] = num(m.mean_auroc(r, cc));
        }
        row["ratio_percent"] = std::move(pct);
        row["mean_auroc"] = std::move(auc);
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    if (!tax.is_null()) {
        j["k"] = tax.at("k");
        j["newick"] = tax.at("dendrogram").at("newick");
        if (tax.contains("pca")) j["pca_explained_ratio"] = tax.at("pca").at("explained_ratio");
        if (tax.contains("model_correlation")) j["model_correlation"] = tax.at("model_correlation");
    }
    const fs::path out = a.out;
    write_text_file(out, dump_json(j));
    const fs::path csv = sibling(out, "_heatmap.csv");
    write_text_file(csv, ratio_csv(m, order, a.taxonomy.empty() ? nullptr : &clusters));
    Manifest man;
    man.command = "report";
    man.argv = c.argv;
    man.add_input(a.matrix);
    if (!a.taxonomy.empty()) man.add_input(a.taxonomy);
    man.add_output(out.filename().string(), out);
    man.add_output(csv.filename().string(), csv);
    man.write(out_dir(out));
    return 0;
}

inline void error_line(std::ostream& err, const std::string& kind, const std::string& msg) {
    ojson e;
    e["error"] = kind;
    e["message"] = msg;
    err << e.dump() << "\n";
}

}  // namespace detail

// Parses and runs one command line (without the program name). Returns the
// process exit code; failures print one JSON object on `err`.
inline int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    using namespace detail;
    CLI::App app{"Graph perturbation sensitivity profiling and dataset taxonomy", "gtaxo"};
    app.set_version_flag("--version", std::string("gtaxo ") + version);
    app.require_subcommand(0, 1);
    std::string replay;
    bool quiet = false;
    app.add_option("--replay", replay, "re-run the command recorded in a manifest");
    app.add_flag("--quiet,-q", quiet, "suppress progress messages");

    GenerateArgs ga;
    auto* gen = app.add_subcommand("generate", "generate a synthetic dataset");
    gen->add_option("--family", ga.family, "small_world, scale_free, sbm_cluster, sbm_pattern, synthie_like, syntheticnew_like")
        ->required();
    gen->add_option("--seed", ga.seed)->capture_default_str();
    gen->add_option("--out", ga.out, "output directory")->required();
    gen->add_option("--name", ga.name, "dataset name (default: the family name)");
    gen->add_option("--num-graphs", ga.num_graphs)->check(CLI::PositiveNumber);
    gen->add_option("--nodes", ga.nodes, "nodes per graph (small_world, scale_free, syntheticnew_like)")
        ->check(CLI::PositiveNumber);
    gen->add_option("--folds", ga.folds, "cross-validation folds");
    gen->add_option("--p-in", ga.p_in, "SBM within-block edge probability");
    gen->add_option("--p-out", ga.p_out, "SBM between-block edge probability");
    gen->add_flag("--shared-features", ga.shared_features, "synthie_like: one feature set for all classes");

    StatsArgs sa;
    auto* st = app.add_subcommand("stats", "classical graph properties as CSV");
    st->add_option("--dataset", sa.dataset)->required();
    st->add_option("--out", sa.out, "CSV path")->required();
    st->add_flag("--per-class", sa.per_class, "one row per graph label");
    st->add_option("--eigenvalues", sa.eigenvalues, "also write one graph's Laplacian spectrum as CSV");
    st->add_option("--graph", sa.graph, "graph index for --eigenvalues")->capture_default_str();
    st->add_option("--laplacian", sa.laplacian, "normalized or combinatorial")
        ->capture_default_str()
        ->check(CLI::IsMember({"normalized", "combinatorial"}));

    PerturbArgs pa;
    auto* pe = app.add_subcommand("perturb", "apply one perturbation to a dataset");
    pe->add_option("--dataset", pa.dataset)->required();
    pe->add_option("--kind", pa.kind, "perturbation name, e.g. LowPass, RandRewire, FragK")->required();
    pe->add_option("--k", pa.k, "hop radius for FragK");
    pe->add_option("--mode", pa.mode, "band-pass implementation: hard, wavelet, auto")->capture_default_str();
    pe->add_option("--seed", pa.seed)->capture_default_str();
    pe->add_option("--out", pa.out, "output directory")->required();

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "train the reference model on one split");
    tr->add_option("--dataset", ta.dataset)->required();
    add_train_options(tr, ta.opt);
    tr->add_option("--seed", ta.seed)->capture_default_str();
    tr->add_option("--repeat", ta.repeat, "split index (fold for cross-validated datasets)")->capture_default_str();
    tr->add_option("--out", ta.out, "model JSON path")->required();

    ProfileArgs pr;
    auto* pf = app.add_subcommand("profile", "sensitivity matrix over datasets and perturbations");
    pf->add_option("--datasets", pr.datasets)->required()->expected(1, -1);
    add_train_options(pf, pr.opt);
    pf->add_option("--repeats", pr.repeats, "seeds or folds per cell")->capture_default_str()->check(CLI::PositiveNumber);
    pf->add_option("--seed", pr.seed)->capture_default_str();
    pf->add_option("--jobs", pr.jobs, "worker threads (0 = available parallelism)")->capture_default_str();
    pf->add_option("--kinds", pr.kinds, "perturbations to run (default: all 13)")->expected(1, -1);
    pf->add_option("--mode", pr.mode, "band-pass implementation: hard, wavelet, auto")->capture_default_str();
    pf->add_option("--out", pr.out, "matrix JSON path")->required();

    TaxonomizeArgs xa;
    auto* tx = app.add_subcommand("taxonomize", "Ward clustering, PCA and correlations of a matrix");
    tx->add_option("--matrix", xa.matrix)->required();
    tx->add_option("--k", xa.k, "number of clusters")->capture_default_str();
    tx->add_option("--compare", xa.compare, "second matrix for model correlation");
    tx->add_option("--out", xa.out, "taxonomy JSON path")->required();

    ReportArgs ra;
    auto* rp = app.add_subcommand("report", "summary JSON and percentage heatmap CSV");
    rp->add_option("--matrix", ra.matrix)->required();
    rp->add_option("--taxonomy", ra.taxonomy);
    rp->add_option("--out", ra.out, "summary JSON path")->required();

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return 0;
        }
        error_line(err, "usage", e.what());
        return 2;
    }

    // progress flags do not affect outputs and stay out of the manifest
    std::vector<std::string> recorded;
    for (const auto& a : args)
        if (a != "--quiet" && a != "-q") recorded.push_back(a);
    Common common{recorded, &err, quiet};
    try {
        if (!replay.empty()) {
            if (app.get_subcommands().size() > 0) throw UsageError("--replay takes no subcommand");
            const auto man = parse_json_file(replay);
            if (!man.contains("argv")) throw InputError(replay + ": not a manifest");
            auto argv = man.at("argv").get<std::vector<std::string>>();
            if (quiet) argv.insert(argv.begin(), "--quiet");
            return dispatch(argv, out, err);
        }
        if (gen->parsed()) return run_generate(ga, common);
        if (st->parsed()) return run_stats(sa, common);
        if (pe->parsed()) return run_perturb(pa, common);
        if (tr->parsed()) return run_train(ta, common);
        if (pf->parsed()) return run_profile(pr, common);
        if (tx->parsed()) return run_taxonomize(xa, common);
        if (rp->parsed()) return run_report(ra, common);
        throw UsageError("no subcommand given (try --help)");
    } catch (const Error& e) {
        const char* kind = e.kind() == ErrorKind::usage ? "usage" : e.kind() == ErrorKind::input ? "input" : "resource";
        error_line(err, kind, e.what());
        return e.exit_code();
    } catch (const nlohmann::json::exception& e) {
        error_line(err, "input", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        error_line(err, "input", e.what());
        return 3;
    } catch (const std::bad_alloc&) {
        error_line(err, "resource", "out of memory");
        return 4;
    } catch (const TrainingDiverged& e) {
        error_line(err, "diverged", e.what());
        return 1;
    }
}

}  // namespace gtaxo::cli
