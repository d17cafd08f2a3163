#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsmax/lattice.hpp"

namespace hsmax {

/// Axes forming the designated "last factor" whose cross-section drives the
/// ordering and the tripling. Defaults to the t-axis.
struct CrossSection {
    std::vector<int> axes;

    static CrossSection t_axis(const GridSpec& grid) { return {{grid.t_axis()}}; }
    static CrossSection factor(const GridSpec& grid, int i);

    /// Product of side lengths over the designated axes.
    Index volume(const Rectangle& r) const;
};

/// Stable sort by decreasing cross-section volume; ties keep input order.
std::vector<Rectangle> order_for_selection(std::vector<Rectangle> rects, const CrossSection& cs);

/// Designated sides [lo, hi] of length L become [lo - L, hi + L]: same centre,
/// three times the length. Other sides unchanged; no clipping.
Rectangle triple_cross_section(const Rectangle& r, const CrossSection& cs);

struct SelectionDecision {
    std::size_t index = 0;
    bool chosen = false;
    /// For rejected rectangles: the smallest M such that the first M chosen
    /// companions already cover at least half of the rectangle. 0 when chosen.
    std::size_t witness = 0;
    /// Cells of the rectangle covered by the companions chosen before it.
    Index overlap = 0;
    Index volume = 0;

    double overlap_fraction() const { return static_cast<double>(overlap) / static_cast<double>(volume); }
};

struct Selection {
    std::vector<Rectangle> input;         ///< already ordered
    std::vector<std::size_t> chosen;      ///< indices into input, increasing
    std::vector<Rectangle> companions;    ///< tripled chosen rectangles, unclipped
    std::vector<SelectionDecision> decisions; ///< one per input rectangle

    std::vector<Rectangle> selected() const;
};

/// Greedy selection over an ordered list: keep R iff fewer than half of its
/// cells lie in the union of earlier companions (Lebesgue cell counts).
Selection covering_select(const GridSpec& grid, std::vector<Rectangle> ordered, const CrossSection& cs);

/// Independent replay of a selection's audit trail. Recomputes every overlap
/// from the companion list cell by cell and returns one message per violation.
std::vector<std::string> replay_audit(const GridSpec& grid, const Selection& selection, const CrossSection& cs);

/// vol_w of the union, by rasterising a coverage mask. Parts outside the grid are ignored.
double union_volume(std::span<const Rectangle> rects, const WeightField& w);

/// (sum_cells count(cell)^p w(cell))^{1/p}, count = number of rectangles containing the cell.
double indicator_sum_norm(std::span<const Rectangle> rects, const WeightField& w, double p);
/// The same quantity raised to the p-th power, without the root.
double indicator_sum_power(std::span<const Rectangle> rects, const WeightField& w, double p);

bool pairwise_disjoint(std::span<const Rectangle> rects);

/// Per t-slice comparison of the unions of all rectangles and of the chosen
/// companions; returns the largest ratio over slices met by the input.
double max_slice_ratio(const GridSpec& grid, const Selection& selection, const WeightField& w);

struct CoveringReport {
    std::string descriptor;
    double p = 2.0;
    std::uint64_t seed = 0;
    std::size_t rectangle_count = 0;
    std::size_t selected_count = 0;
    double union_all = 0.0;
    double union_selected = 0.0;
    double comparability_ratio = 1.0;
    double indicator_norm_p = 0.0; ///< ||sum chi||_p^p
    double indicator_ratio = 1.0;  ///< indicator_norm_p / union_selected
    bool disjoint_selection = false;
    double max_slice_ratio = 1.0;
    std::size_t audit_violations = 0;
    Selection selection;
};

struct CoveringConfig {
    std::size_t rectangle_count = 200;
    std::uint64_t seed = 1;
    Family family = Family::full;
    double max_side_fraction = 0.5;
    std::vector<int> cross_section; ///< empty: t-axis
};

CrossSection resolve_cross_section(const GridSpec& grid, const std::vector<int>& axes);

std::vector<Rectangle> random_rectangles(const GridSpec& grid, const CoveringConfig& config);

/// Order, select, audit and measure both covering conclusions for a given list.
CoveringReport covering_run(const GridSpec& grid, std::vector<Rectangle> rects, const WeightField& w, double p,
                            const CrossSection& cs);

/// covering_run over seeded random rectangles.
CoveringReport covering_experiment(const CoveringConfig& config, const WeightField& w, double p);

} // namespace hsmax
