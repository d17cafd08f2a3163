#include "hsmax/covering.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hsmax {

namespace {

// Row-major cell indices of r ∩ grid.
template <class Fn>
void for_each_grid_cell(const GridSpec& grid, const Rectangle& r, Fn&& fn) {
    auto clipped = r.clipped(grid);
    if (!clipped) return;
    for_each_cell(*clipped, [&](const Point& p) { fn(grid.flat_index(p)); });
}

std::vector<std::uint8_t> coverage_mask(const GridSpec& grid, std::span<const Rectangle> rects) {
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(grid.cell_count()), 0);
    for (const auto& r : rects) for_each_grid_cell(grid, r, [&](Index i) { mask[i] = 1; });
    return mask;
}

} // namespace

CrossSection CrossSection::factor(const GridSpec& grid, int i) {
    if (i < 0 || i >= grid.factor_count()) throw DomainError("CrossSection: factor index out of range");
    CrossSection cs;
    for (int k = 0; k < grid.factors()[i]; ++k) cs.axes.push_back(grid.factor_offset(i) + k);
    return cs;
}

Index CrossSection::volume(const Rectangle& r) const {
    Index v = 1;
    for (int a : axes) v *= r.side(a).length();
    return v;
}

CrossSection resolve_cross_section(const GridSpec& grid, const std::vector<int>& axes) {
    if (axes.empty()) return CrossSection::t_axis(grid);
    for (int a : axes)
        if (a < 0 || a >= grid.dim()) throw DomainError("cross-section axis out of range");
    return {axes};
}

std::vector<Rectangle> order_for_selection(std::vector<Rectangle> rects, const CrossSection& cs) {
    std::stable_sort(rects.begin(), rects.end(),
                     [&](const Rectangle& a, const Rectangle& b) { return cs.volume(a) > cs.volume(b); });
    return rects;
}

Rectangle triple_cross_section(const Rectangle& r, const CrossSection& cs) {
    Rectangle out = r;
    for (int a : cs.axes) {
        const Coord len = r.side(a).length();
        out.side(a) = {r.side(a).lo - len, r.side(a).hi + len};
    }
    return out;
}

std::vector<Rectangle> Selection::selected() const {
    std::vector<Rectangle> out;
    out.reserve(chosen.size());
    for (auto i : chosen) out.push_back(input[i]);
    return out;
}

Selection covering_select(const GridSpec& grid, std::vector<Rectangle> ordered, const CrossSection& cs) {
    Selection sel;
    sel.input = std::move(ordered);
    // Ordinal (1-based) of the earliest companion covering each cell; 0 = uncovered.
    std::vector<std::uint32_t> first_cover(static_cast<std::size_t>(grid.cell_count()), 0);
    std::vector<std::uint32_t> hits;

    for (std::size_t i = 0; i < sel.input.size(); ++i) {
        const Rectangle& r = sel.input[i];
        if (!r.within(grid)) throw DomainError("covering_select: rectangle exceeds grid extents");
        hits.clear();
        for_each_grid_cell(grid, r, [&](Index c) {
            if (first_cover[c]) hits.push_back(first_cover[c]);
        });
        SelectionDecision d{i, false, 0, static_cast<Index>(hits.size()), r.volume()};
        if (2 * d.overlap < d.volume) {
            d.chosen = true;
            sel.chosen.push_back(i);
            sel.companions.push_back(triple_cross_section(r, cs));
            const auto ordinal = static_cast<std::uint32_t>(sel.chosen.size());
            for_each_grid_cell(grid, sel.companions.back(), [&](Index c) {
                if (!first_cover[c]) first_cover[c] = ordinal;
            });
        } else {
            // The ceil(V/2)-th earliest covering ordinal is the shortest sufficient prefix.
            const auto need = static_cast<std::size_t>((d.volume + 1) / 2);
            std::nth_element(hits.begin(), hits.begin() + (need - 1), hits.end());
            d.witness = hits[need - 1];
        }
        sel.decisions.push_back(d);
    }
    return sel;
}

std::vector<std::string> replay_audit(const GridSpec& grid, const Selection& selection, const CrossSection& cs) {
    std::vector<std::string> issues;
    auto report = [&](std::size_t i, const std::string& what) {
        std::ostringstream os;
        os << "rectangle " << i << ": " << what;
        issues.push_back(os.str());
    };
    if (selection.decisions.size() != selection.input.size()) {
        issues.push_back("decision count does not match input count");
        return issues;
    }
    if (selection.companions.size() != selection.chosen.size()) {
        issues.push_back("companion count does not match chosen count");
        return issues;
    }
    for (std::size_t k = 0; k < selection.chosen.size(); ++k) {
        if (k && selection.chosen[k] <= selection.chosen[k - 1]) issues.push_back("chosen indices not increasing");
        if (selection.chosen[k] >= selection.input.size()) {
            issues.push_back("chosen index out of range");
            return issues;
        }
        if (!(selection.companions[k] == triple_cross_section(selection.input[selection.chosen[k]], cs)))
            report(selection.chosen[k], "companion is not the tripled rectangle");
    }

    // Cells of r covered by the first `prefix` companions, via a local mask.
    auto covered = [&](const Rectangle& r, std::size_t prefix) {
        std::vector<std::uint8_t> local(static_cast<std::size_t>(r.volume()), 0);
        std::vector<Index> stride(r.dim(), 1);
        for (int a = r.dim() - 2; a >= 0; --a) stride[a] = stride[a + 1] * r.side(a + 1).length();
        for (std::size_t k = 0; k < prefix; ++k) {
            auto overlap = r.intersection(selection.companions[k]);
            if (!overlap) continue;
            for_each_cell(*overlap, [&](const Point& p) {
                Index idx = 0;
                for (int a = 0; a < r.dim(); ++a) idx += (p[a] - r.side(a).lo) * stride[a];
                local[idx] = 1;
            });
        }
        return static_cast<Index>(std::count(local.begin(), local.end(), std::uint8_t{1}));
    };

    std::size_t chosen_so_far = 0;
    for (std::size_t i = 0; i < selection.input.size(); ++i) {
        const Rectangle& r = selection.input[i];
        const auto& d = selection.decisions[i];
        const bool is_chosen = chosen_so_far < selection.chosen.size() && selection.chosen[chosen_so_far] == i;
        if (d.chosen != is_chosen) report(i, "decision flag disagrees with chosen list");
        if (!r.within(grid)) report(i, "rectangle exceeds grid");
        const Index vol = r.volume();
        const Index overlap = covered(r, chosen_so_far);
        if (overlap != d.overlap) report(i, "recorded overlap differs from replay");
        if (is_chosen) {
            if (!(2 * overlap < vol)) report(i, "chosen but overlap >= half its volume");
            ++chosen_so_far;
        } else {
            if (d.witness < 1 || d.witness > chosen_so_far) {
                report(i, "witness M does not precede the rectangle");
            } else if (!(2 * covered(r, d.witness) >= vol)) {
                report(i, "witness prefix covers less than half");
            }
        }
    }
    return issues;
}

double union_volume(std::span<const Rectangle> rects, const WeightField& w) {
    const auto mask = coverage_mask(w.grid(), rects);
    double total = 0.0;
    for (Index c = 0; c < w.grid().cell_count(); ++c)
        if (mask[c]) total += w.at_cell(c);
    return total;
}

double indicator_sum_power(std::span<const Rectangle> rects, const WeightField& w, double p) {
    if (!(p > 1.0)) throw RangeError("indicator_sum_norm: p must exceed 1");
    std::vector<std::uint32_t> count(static_cast<std::size_t>(w.grid().cell_count()), 0);
    for (const auto& r : rects) for_each_grid_cell(w.grid(), r, [&](Index c) { ++count[c]; });
    double total = 0.0;
    for (Index c = 0; c < w.grid().cell_count(); ++c)
        if (count[c]) total += std::pow(static_cast<double>(count[c]), p) * w.at_cell(c);
    return total;
}

double indicator_sum_norm(std::span<const Rectangle> rects, const WeightField& w, double p) {
    return std::pow(indicator_sum_power(rects, w, p), 1.0 / p);
}

bool pairwise_disjoint(std::span<const Rectangle> rects) {
    for (std::size_t i = 0; i < rects.size(); ++i)
        for (std::size_t j = i + 1; j < rects.size(); ++j)
            if (rects[i].intersects(rects[j])) return false;
    return true;
}

double max_slice_ratio(const GridSpec& grid, const Selection& selection, const WeightField& w) {
    const auto all = coverage_mask(grid, selection.input);
    const auto comp = coverage_mask(grid, selection.companions);
    const Index lt = grid.t_length();
    double worst = 0.0;
    for (Index k = 0; k < lt; ++k) {
        double a = 0.0, c = 0.0;
        for (Index s = 0; s < grid.spatial_cell_count(); ++s) {
            const Index cell = s * lt + k;
            if (all[cell]) a += w.at_cell(cell);
            if (comp[cell]) c += w.at_cell(cell);
        }
        if (a > 0.0) worst = std::max(worst, a / c);
    }
    return worst;
}

std::vector<Rectangle> random_rectangles(const GridSpec& grid, const CoveringConfig& config) {
    auto rng = make_rng(config.seed, 2);
    std::vector<Rectangle> out;
    out.reserve(config.rectangle_count);
    for (std::size_t i = 0; i < config.rectangle_count; ++i)
        out.push_back(random_rectangle(grid, config.family, rng, config.max_side_fraction));
    return out;
}

CoveringReport covering_run(const GridSpec& grid, std::vector<Rectangle> rects, const WeightField& w, double p,
                            const CrossSection& cs) {
    if (!(w.grid() == grid)) throw DomainError("covering_run: weight lives on another grid");
    CoveringReport rep;
    rep.descriptor = w.descriptor();
    rep.p = p;
    rep.rectangle_count = rects.size();
    rep.selection = covering_select(grid, order_for_selection(std::move(rects), cs), cs);
    rep.audit_violations = replay_audit(grid, rep.selection, cs).size();

    const auto selected = rep.selection.selected();
    rep.selected_count = selected.size();
    if (selected.empty()) return rep;
    rep.union_all = union_volume(rep.selection.input, w);
    rep.union_selected = union_volume(selected, w);
    rep.comparability_ratio = rep.union_all / rep.union_selected;
    rep.indicator_norm_p = indicator_sum_power(selected, w, p);
    rep.disjoint_selection = pairwise_disjoint(selected);
    rep.indicator_ratio = rep.indicator_norm_p / rep.union_selected;
    rep.max_slice_ratio = max_slice_ratio(grid, rep.selection, w);
    return rep;
}

CoveringReport covering_experiment(const CoveringConfig& config, const WeightField& w, double p) {
    const GridSpec& grid = w.grid();
    auto rep = covering_run(grid, random_rectangles(grid, config), w, p,
                            resolve_cross_section(grid, config.cross_section));
    rep.seed = config.seed;
    return rep;
}

} // namespace hsmax
