#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsmax/heisenberg.hpp"

namespace hsmax {

/// (sum_cells |f|^p w)^{1/p}, p >= 1.
double lp_norm(const ScalarField& f, const WeightField& w, double p);

enum class Generator { point_masses, sparse_signs, dense_uniform, indicator_union };

std::string to_string(Generator g);
Generator parse_generator(std::string_view name);

/// Seeded test input. Sizes scale with the grid so experiments on different
/// grids draw comparable shapes. Never identically zero.
ScalarField make_input(const GridSpec& grid, Generator generator, std::uint64_t seed);

/// Geometric ladder with `rungs` values from the smallest positive value of mf
/// up to its maximum (a single rung when they coincide).
std::vector<double> geometric_ladder(const MaximalField& mf, int rungs = 64);

/// max over the ladder of lambda * vol_w{mf > lambda}^{1/p} / ||f||_{L^p(w)}.
double weak_type_quantity(const MaximalField& mf, const ScalarField& f, const WeightField& w, double p,
                          std::span<const double> ladder);
/// Computes M_w f and its default ladder first.
double weak_type_quantity(const ScalarField& f, const WeightField& w, double p, const MaximalOptions& options = {});

/// ||M_w f||_{L^p(w)} / ||f||_{L^p(w)}.
double strong_ratio(const MaximalField& mf, const ScalarField& f, const WeightField& w, double p);
double strong_ratio(const ScalarField& f, const WeightField& w, double p, const MaximalOptions& options = {});

struct ExperimentConfig {
    int n = 1;
    Coord mu = 1;
    std::vector<int> factors;        ///< empty: all ones
    std::vector<Coord> grid_sizes{8};
    std::string weight = "power:1,1";
    std::vector<double> p{2.0};
    std::vector<Generator> generators{Generator::sparse_signs};
    int trials = 1;
    std::uint64_t seed = 1;
    Family family = Family::full;
    ShiftConvention shift = ShiftConvention::standard;
    int ladder_rungs = 64;
    int workers = 1;
};

struct TrialRow {
    int trial = 0;
    std::uint64_t seed = 0;
    Generator generator = Generator::sparse_signs;
    Coord grid_size = 0;
    double p = 2.0;
    double weak_quantity = 0.0;
    double strong_ratio = 0.0;
    double ladder_ratio = 1.0; ///< ratio between consecutive rungs
};

struct ScalingRow {
    Generator generator = Generator::sparse_signs;
    Coord grid_size = 0;
    double p = 2.0;
    double max_weak = 0.0;
    double median_weak = 0.0;
    double max_strong = 0.0;
    double median_strong = 0.0;
};

struct BoundReport {
    ExperimentConfig config;
    std::vector<TrialRow> rows;
    std::vector<ScalingRow> scaling;
    std::size_t chebyshev_violations = 0;
};

/// Seed of trial `trial` for `generator`, derived from the experiment seed.
std::uint64_t trial_seed(std::uint64_t seed, Generator generator, int trial);

BoundReport run_experiment(const ExperimentConfig& config);

/// Per (generator, p): largest over grid sizes of max_weak, divided by the smallest.
double weak_spread(const BoundReport& report, Generator generator, double p);
double strong_spread(const BoundReport& report, Generator generator, double p);

} // namespace hsmax
