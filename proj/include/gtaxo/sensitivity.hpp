#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gtaxo/errors.hpp"

namespace gtaxo {

enum class CellStatus { ok, skipped, unsupported, invalid };

inline std::string to_string(CellStatus s) {
    switch (s) {
        case CellStatus::ok: return "ok";
        case CellStatus::skipped: return "skipped";
        case CellStatus::unsupported: return "unsupported";
        case CellStatus::invalid: return "invalid";
    }
    return "?";
}

inline CellStatus parse_cell_status(const std::string& s) {
    if (s == "ok") return CellStatus::ok;
    if (s == "skipped") return CellStatus::skipped;
    if (s == "unsupported") return CellStatus::unsupported;
    if (s == "invalid") return CellStatus::invalid;
    throw InputError("unknown cell status '" + s + "'");
}

// One (dataset, perturbation) entry: per-repeat test AUROCs and their seeds.
struct Cell {
    CellStatus status = CellStatus::ok;
    std::vector<double> aurocs;
    std::vector<std::uint64_t> seeds;
    std::string note;

    double mean() const {
        if (status != CellStatus::ok || aurocs.empty()) return std::numeric_limits<double>::quiet_NaN();
        double s = 0.0;
        for (double a : aurocs) s += a;
        return s / static_cast<double>(aurocs.size());
    }
};

inline constexpr const char* original_column = "Original";

// Rows are datasets, columns perturbations; column "Original" holds the
// baseline.
struct SensitivityMatrix {
    std::string model;
    std::vector<std::string> datasets;
    std::vector<std::string> perturbations;
    std::vector<std::vector<Cell>> cells;
    nlohmann::ordered_json manifest;

    std::size_t column(const std::string& name) const {
        auto it = std::find(perturbations.begin(), perturbations.end(), name);
        if (it == perturbations.end()) throw InputError("matrix has no column '" + name + "'");
        return static_cast<std::size_t>(it - perturbations.begin());
    }

    std::size_t row(const std::string& name) const {
        auto it = std::find(datasets.begin(), datasets.end(), name);
        if (it == datasets.end()) throw InputError("matrix has no row '" + name + "'");
        return static_cast<std::size_t>(it - datasets.begin());
    }

    double mean_auroc(std::size_t r, std::size_t c) const { return cells[r][c].mean(); }

    // Mean perturbed AUROC over mean baseline AUROC; NaN when either is missing.
    double ratio(std::size_t r, std::size_t c) const {
        const double base = mean_auroc(r, column(original_column));
        const double v = mean_auroc(r, c);
        if (std::isnan(base) || std::isnan(v) || base <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        return v / base;
    }

    double log2_ratio(std::size_t r, std::size_t c) const {
        if (perturbations[c] == original_column && !std::isnan(mean_auroc(r, c))) return 0.0;
        const double q = ratio(r, c);
        if (std::isnan(q)) return q;
        return q > 0.0 ? std::log2(q) : -std::numeric_limits<double>::infinity();
    }

    static double clamp_log2(double v) { return std::isnan(v) ? v : std::clamp(v, -1.0, 1.0); }

    nlohmann::ordered_json to_json() const {
        using J = nlohmann::ordered_json;
        auto num = [](double v) { return std::isfinite(v) ? J(v) : J(nullptr); };
        J j;
        j["model"] = model;
        j["datasets"] = datasets;
        j["perturbations"] = perturbations;
        J lr = J::array(), rr = J::array(), mr = J::array();
        for (std::size_t r = 0; r < datasets.size(); ++r) {
            J a = J::array(), b = J::array(), m = J::array();
            for (std::size_t c = 0; c < perturbations.size(); ++c) {
                a.push_back(num(log2_ratio(r, c)));
                b.push_back(num(ratio(r, c)));
                m.push_back(num(mean_auroc(r, c)));
            }
            lr.push_back(std::move(a));
            rr.push_back(std::move(b));
            mr.push_back(std::move(m));
        }
        j["log2_ratio"] = std::move(lr);
        j["ratio"] = std::move(rr);
        j["mean_auroc"] = std::move(mr);
        J cs = J::array();
        for (std::size_t r = 0; r < datasets.size(); ++r)
            for (std::size_t c = 0; c < perturbations.size(); ++c) {
                const Cell& cell = cells[r][c];
                J e;
                e["dataset"] = datasets[r];
                e["perturbation"] = perturbations[c];
                e["status"] = to_string(cell.status);
                e["aurocs"] = cell.aurocs;
                e["seeds"] = cell.seeds;
                e["note"] = cell.note;
                cs.push_back(std::move(e));
            }
        j["cells"] = std::move(cs);
        j["manifest"] = manifest;
        return j;
    }

    static SensitivityMatrix from_json(const nlohmann::ordered_json& j) {
        SensitivityMatrix m;
        try {
            m.model = j.at("model").get<std::string>();
            m.datasets = j.at("datasets").get<std::vector<std::string>>();
            m.perturbations = j.at("perturbations").get<std::vector<std::string>>();
            m.cells.assign(m.datasets.size(), std::vector<Cell>(m.perturbations.size()));
            const auto& cs = j.at("cells");
            if (cs.size() != m.datasets.size() * m.perturbations.size())
                throw InputError("matrix: cell count does not match rows x columns");
            for (const auto& e : cs) {
                const auto r = m.row(e.at("dataset").get<std::string>());
                const auto c = m.column(e.at("perturbation").get<std::string>());
                Cell& cell = m.cells[r][c];
                cell.status = parse_cell_status(e.at("status").get<std::string>());
                cell.aurocs = e.at("aurocs").get<std::vector<double>>();
                cell.seeds = e.at("seeds").get<std::vector<std::uint64_t>>();
                cell.note = e.value("note", "");
            }
            if (j.contains("manifest")) m.manifest = j.at("manifest");
        } catch (const nlohmann::json::exception& ex) {
            throw InputError(std::string("matrix: ") + ex.what());
        }
        m.column(original_column);
        return m;
    }
};

// Clamped log2 entries ready for clustering: the Original column and every
// column skipped or unsupported for some dataset are dropped.
struct AnalysisMatrix {
    std::vector<std::string> rows;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
    std::vector<std::string> dropped;
};

inline AnalysisMatrix analysis_matrix(const SensitivityMatrix& m) {
    AnalysisMatrix a;
    a.rows = m.datasets;
    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < m.perturbations.size(); ++c) {
        if (m.perturbations[c] == original_column) continue;
        bool skip = false;
        for (std::size_t r = 0; r < m.datasets.size(); ++r) {
            const auto s = m.cells[r][c].status;
            skip = skip || s == CellStatus::skipped || s == CellStatus::unsupported;
        }
        if (skip) {
            a.dropped.push_back(m.perturbations[c]);
        } else {
            keep.push_back(c);
            a.columns.push_back(m.perturbations[c]);
        }
    }
    a.values.resize(static_cast<Eigen::Index>(m.datasets.size()), static_cast<Eigen::Index>(keep.size()));
    std::string bad;
    for (std::size_t r = 0; r < m.datasets.size(); ++r)
        for (std::size_t k = 0; k < keep.size(); ++k) {
            const double v = SensitivityMatrix::clamp_log2(m.log2_ratio(r, keep[k]));
            if (std::isnan(v)) bad += (bad.empty() ? "" : ", ") + m.datasets[r] + "/" + m.perturbations[keep[k]];
            a.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
        }
    if (!bad.empty()) throw InputError("matrix has invalid cells: " + bad);
    return a;
}

}  // namespace gtaxo
