#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "gtaxo/dataset_io.hpp"
#include "gtaxo/rng.hpp"
#include "gtaxo/version.hpp"

namespace gtaxo {

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// FNV-1a of a file, or of a directory's sorted relative names and contents.
inline std::string content_hash(const fs::path& p) {
    if (!fs::is_directory(p)) return hex64(fnv1a(read_text_file(p)));
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), p));
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) {
        acc += f.generic_string();
        acc += '\0';
        acc += hex64(fnv1a(read_text_file(p / f)));
        acc += '\n';
    }
    return hex64(fnv1a(acc));
}

// Record of one invocation: argv, effective configuration, seeds, version and
// content hashes. No timestamps, so identical runs give identical manifests.
struct Manifest {
    std::string command;
    std::vector<std::string> argv;
    ojson config = ojson::object();
    ojson seeds = ojson::object();
    ojson inputs = ojson::object();
    ojson outputs = ojson::object();

    void add_input(const fs::path& p) { inputs[p.generic_string()] = content_hash(p); }
    void add_output(const std::string& name, const fs::path& p) { outputs[name] = content_hash(p); }

    // Everything except output hashes, for embedding in primary outputs.
    ojson header() const {
        ojson j;
        j["tool"] = "gtaxo";
        j["version"] = version;
        j["command"] = command;
        j["argv"] = argv;
        j["config"] = config;
        j["seeds"] = seeds;
        j["inputs"] = inputs;
        return j;
    }

    ojson to_json() const {
        ojson j = header();
        j["outputs"] = outputs;
        return j;
    }

    void write(const fs::path& dir) const { write_text_file(dir / "manifest.json", dump_json(to_json())); }
};

}  // namespace gtaxo
