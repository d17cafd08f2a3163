#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hsmax/lattice.hpp"

namespace hsmax {

/// w(cell) = prod_a max(|x_a + 0.5 - center_a|, 1/2)^{exponent_a} over the spatial axes,
/// constant in t. Every exponent must exceed -1.
WeightField make_power_weight(const GridSpec& grid, std::span<const double> exponents,
                              std::span<const double> centers);

/// Power weight centred at the midpoint of each spatial extent.
WeightField make_power_weight(const GridSpec& grid, std::span<const double> exponents);

WeightField make_constant_weight(const GridSpec& grid);

/// base * (1 + amplitude * r(cell)), r uniform in [-1, 1] drawn from `seed`.
/// Keeps the base's t-dependence.
WeightField make_perturbed_weight(const GridSpec& grid, const WeightField& base, double amplitude,
                                  std::uint64_t seed);

/// Build a weight from its textual descriptor:
///   constant
///   power:a1,...,a2n[@c1,...,c2n]
///   perturbed:AMPLITUDE:SEED@<base descriptor>
WeightField make_weight(const GridSpec& grid, std::string_view descriptor);

/// Infimum of vol_w(E)/vol_w(R) over E in R with vol(E) > theta*vol(R).
/// The minimiser takes the floor(theta*V)+1 lightest cells.
double exact_eta(const WeightField& w, const Rectangle& r, double theta = 0.5);

struct EtaRow {
    Rectangle rectangle;
    double exact = 0.0;
    double monte_carlo = 0.0; ///< min ratio over the sampled subsets
    std::int64_t samples = 0;
};

struct ComparabilityReport {
    std::string descriptor;
    double theta = 0.5;
    double global_eta = 1.0;
    double global_monte_carlo = 1.0;
    bool exhaustive = false;
    std::int64_t rectangle_count = 0;
    std::int64_t subset_samples = 0;
    std::uint64_t seed = 0;
    std::vector<EtaRow> rows;
};

struct SurveyOptions {
    Family family = Family::full;
    std::int64_t rectangle_budget = 1000;
    std::int64_t subset_samples = 64;
    std::uint64_t seed = 1;
    double theta = 0.5;
};

/// exact_eta over a deterministic rectangle sample (or the whole family when it
/// fits the budget) with Monte Carlo subsets confirming each exact value.
ComparabilityReport eta_survey(const WeightField& w, const SurveyOptions& options);

/// Same survey over an explicit rectangle list.
ComparabilityReport eta_survey(const WeightField& w, std::span<const Rectangle> rectangles,
                               const SurveyOptions& options);

} // namespace hsmax
