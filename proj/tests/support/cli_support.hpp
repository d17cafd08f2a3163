#pragma once

// Helpers for driving the CLI in-process and comparing its output directories.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "hsmax/cli.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline int run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    return hsmax::cli::run_cli(args, out, err);
}

inline fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("hsmax_test_" + std::to_string(::getpid()) + "_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// JSON text with header.timestamp removed; other files unchanged.
inline std::string strip_timestamp(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.is_object() && j.contains("header")) j["header"].erase("timestamp");
    return j.dump(2);
}

inline std::vector<std::vector<std::string>> determinism_commands(const std::string& data) {
    return {
        {"maximal", "--grid", "1,5,1", "--generator", "sparse", "--weight", "power:1,1", "--seed", "3"},
        {"maximal", "--grid", "1,6,-1", "--generator", "indicator", "--dyadic", "--format", "json"},
        {"maximal", "--input", data + "/point_mass_3.csv", "--format", "bin"},
        {"cover", "--grid", "1,8,1", "--weight", "perturbed:0.3:2@power:1,1", "--p", "2,3", "--seed", "4"},
        {"weaktype", "--grid", "1,5,1", "--weight", "power:1,1", "--p", "1.5,2,3", "--trials", "2", "--generator",
         "point,sparse,dense,indicator"},
        {"eta", "--grid", "1,4,1", "--weight", "power:2,1", "--seed", "5"},
    };
}

/// Runs `args`, reruns from the echoed config.json into a second directory and
/// compares every output file byte for byte (JSON reports without timestamps).
inline bool reproduces_from_echo(const std::vector<std::string>& args, std::string& why) {
    static int counter = 0;
    const std::string tag = "echo_" + std::to_string(::getpid()) + "_" + args.front() + std::to_string(counter++);
    const auto first = scratch_dir(tag + "_a"), second = scratch_dir(tag + "_b");
    auto initial = args;
    initial.insert(initial.end(), {"--out", first.string()});
    if (int rc = run(initial); rc != 0) {
        why = "initial run exited with " + std::to_string(rc);
        return false;
    }
    const std::vector<std::string> rerun{args.front(), "--config", (first / "config.json").string(), "--out",
                                         second.string()};
    if (int rc = run(rerun); rc != 0) {
        why = "rerun exited with " + std::to_string(rc);
        return false;
    }
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(first)) {
        const auto name = entry.path().filename();
        if (!fs::exists(second / name)) {
            why = "rerun did not produce " + name.string();
            return false;
        }
        std::string a = read_file(entry.path()), b = read_file(second / name);
        if (name.extension() == ".json") {
            a = strip_timestamp(a);
            b = strip_timestamp(b);
        }
        if (a != b) {
            why = name.string() + " differs";
            return false;
        }
        ++compared;
    }
    if (compared < 2) {
        why = "too few output files";
        return false;
    }
    fs::remove_all(first);
    fs::remove_all(second);
    return true;
}

} // namespace testsupport
