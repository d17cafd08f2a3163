#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsmax/harness.hpp"

namespace hsmax::cli {

/// Everything a run depends on. The echo written next to the outputs parses
/// back into an equal RunConfig, so a rerun from it reproduces the run.
struct RunConfig {
    std::string command;

    int n = 1;
    std::vector<Interval> extents; ///< empty: cube of side 8
    std::vector<int> factors;
    Coord mu = 1;
    bool dyadic_only = false;
    std::string shift_convention = "standard";
    std::string weight = "constant";
    std::uint64_t seed = 1;
    std::vector<double> p{2.0};
    std::string format = "csv";

    // maximal
    std::string input;
    std::string generator;

    // cover
    std::string rects;
    std::size_t rectangle_count = 200;
    double max_side_fraction = 0.5;
    std::vector<int> cross_section;

    // weaktype
    std::vector<Coord> grid_sizes;
    std::vector<std::string> generators{"sparse_signs"};
    int trials = 1;
    int ladder_rungs = 64;

    // eta
    std::int64_t rectangle_budget = 1000;
    std::int64_t subset_samples = 64;
    double theta = 0.5;

    bool operator==(const RunConfig&) const = default;

    GridSpec grid() const;
    Family family() const { return dyadic_only ? Family::dyadic : Family::full; }
    ShiftConvention shift() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Unknown keys and ill-typed values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Parse "n,extent,mu" where extent is a side length N (axes 0..N-1) or "lo:hi".
void apply_grid_flag(RunConfig& config, const std::string& text);

/// Exit codes: 0 success, 1 I/O failure, 2 usage or config error,
/// 3 invariant violation detected during the run.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hsmax::cli
