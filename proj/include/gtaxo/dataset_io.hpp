#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"
#include "gtaxo/graph.hpp"

namespace gtaxo {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

inline std::string read_text_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw InputError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + p.string());
    out << text;
}

inline ojson parse_json_file(const fs::path& p) {
    try {
        return ojson::parse(read_text_file(p));
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(p.string() + ": " + e.what());
    }
}

// Pretty-printed with a trailing newline; key order is insertion order so
// identical inputs give identical bytes.
inline std::string dump_json(const ojson& j) { return j.dump(1) + "\n"; }

namespace detail {

inline ojson split_to_json(int s, bool predefined) {
    if (s < 0) return nullptr;
    if (!predefined) return s;
    switch (s) {
        case split_train: return "train";
        case split_val: return "val";
        case split_test: return "test";
    }
    return nullptr;
}

inline int split_from_json(const ojson& j, bool predefined) {
    if (j.is_null()) return split_none;
    if (predefined) {
        if (!j.is_string()) throw InputError("split must be \"train\", \"val\", \"test\" or null");
        const auto s = j.get<std::string>();
        if (s == "train") return split_train;
        if (s == "val" || s == "valid" || s == "validation") return split_val;
        if (s == "test") return split_test;
        throw InputError("unknown split '" + s + "'");
    }
    if (!j.is_number_integer()) throw InputError("fold assignment must be an integer");
    return j.get<int>();
}

inline ojson features_to_json(const FeatureMatrix& x) {
    ojson rows = ojson::array();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        ojson row = ojson::array();
        for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(x(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline FeatureMatrix features_from_json(const ojson& j, std::int64_t n) {
    if (j.is_null()) return FeatureMatrix(n, 0);
    if (!j.is_array()) throw InputError("x must be a list of rows");
    if (static_cast<std::int64_t>(j.size()) != n) throw InputError("x has wrong number of rows");
    const std::size_t d = j.empty() ? 0 : j[0].size();
    FeatureMatrix x(n, static_cast<Eigen::Index>(d));
    for (std::int64_t i = 0; i < n; ++i) {
        const auto& row = j[i];
        if (!row.is_array() || row.size() != d) throw InputError("x rows have inconsistent width");
        for (std::size_t k = 0; k < d; ++k) x(i, static_cast<Eigen::Index>(k)) = row[k].get<double>();
    }
    return x;
}

}  // namespace detail

inline ojson graph_to_json(const Graph& g, const Dataset& ds, std::size_t index) {
    ojson j;
    j["n"] = g.num_nodes();
    ojson edges = ojson::array();
    for (auto [u, v] : g.edges()) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    j["x"] = detail::features_to_json(g.features());
    const bool predefined = ds.predefined_splits();
    if (is_node_task(ds.task)) {
        ojson y = ojson::array();
        for (int v : g.node_labels()) y.push_back(v < 0 ? ojson(nullptr) : ojson(v));
        j["y_nodes"] = std::move(y);
    }
    if (g.graph_label()) j["y_graph"] = *g.graph_label();
    if (ds.task == Task::transductive_node_classification) {
        ojson s = ojson::array();
        for (int v : ds.split) s.push_back(detail::split_to_json(v, predefined));
        j["split"] = std::move(s);
    } else {
        j["split"] = detail::split_to_json(ds.split.at(index), predefined);
    }
    return j;
}

inline void write_dataset(const Dataset& ds, const fs::path& dir) {
    ds.validate();
    fs::create_directories(dir);
    ojson meta;
    meta["name"] = ds.name;
    meta["task"] = to_string(ds.task);
    meta["num_classes"] = ds.num_classes;
    meta["num_folds"] = ds.num_folds;
    meta["num_graphs"] = ds.graphs.size();
    write_text_file(dir / "meta.json", dump_json(meta));
    for (std::size_t i = 0; i < ds.graphs.size(); ++i)
        write_text_file(dir / ("graph_" + std::to_string(i) + ".json"), graph_to_json(ds.graphs[i], ds, i).dump() + "\n");
}

struct DatasetLoadReport {
    std::size_t self_loops_dropped = 0;
    std::size_t duplicates_merged = 0;
};

inline RawGraph raw_graph_from_json(const ojson& j) {
    RawGraph r;
    if (!j.contains("n")) throw InputError("graph record lacks 'n'");
    r.num_nodes = j.at("n").get<std::int64_t>();
    if (j.contains("edges")) {
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() < 2) throw InputError("edge entries must be [u, v]");
            r.edges.emplace_back(e[0].get<std::int64_t>(), e[1].get<std::int64_t>());
        }
    }
    if (j.contains("node_ids"))
        for (const auto& id : j.at("node_ids")) r.external_ids.push_back(id.get<std::int64_t>());
    r.features = detail::features_from_json(j.contains("x") ? j.at("x") : ojson(nullptr), r.num_nodes);
    if (j.contains("y_nodes"))
        for (const auto& y : j.at("y_nodes")) r.node_labels.push_back(y.is_null() ? -1 : y.get<int>());
    if (j.contains("y_graph") && !j.at("y_graph").is_null()) r.graph_label = j.at("y_graph").get<int>();
    return r;
}

inline Dataset read_dataset(const fs::path& dir, DatasetLoadReport* report = nullptr) {
    if (!fs::is_directory(dir)) throw InputError(dir.string() + " is not a dataset directory");
    const auto meta = parse_json_file(dir / "meta.json");
    Dataset ds;
    try {
        ds.name = meta.value("name", dir.filename().string());
        ds.task = parse_task(meta.at("task").get<std::string>());
        ds.num_classes = meta.at("num_classes").get<int>();
        ds.num_folds = meta.value("num_folds", 0);
        std::size_t count = meta.value("num_graphs", std::size_t{0});
        if (count == 0)
            while (fs::exists(dir / ("graph_" + std::to_string(count) + ".json"))) ++count;
        DatasetLoadReport rep;
        const bool predefined = ds.predefined_splits();
        for (std::size_t i = 0; i < count; ++i) {
            const auto j = parse_json_file(dir / ("graph_" + std::to_string(i) + ".json"));
            PreprocessReport pr;
            ds.graphs.push_back(preprocess(raw_graph_from_json(j), &pr));
            rep.self_loops_dropped += pr.self_loops_dropped;
            rep.duplicates_merged += pr.duplicates_merged;
            const ojson sj = j.contains("split") ? j.at("split") : ojson(nullptr);
            if (ds.task == Task::transductive_node_classification) {
                if (sj.is_array())
                    for (const auto& s : sj) ds.split.push_back(detail::split_from_json(s, predefined));
                else
                    ds.split.assign(static_cast<std::size_t>(ds.graphs.back().num_nodes()), split_none);
            } else {
                ds.split.push_back(detail::split_from_json(sj, predefined));
            }
        }
        if (report) *report = rep;
    } catch (const nlohmann::json::exception& e) {
        throw InputError(dir.string() + ": " + e.what());
    }
    ds.validate();
    return ds;
}

}  // namespace gtaxo
