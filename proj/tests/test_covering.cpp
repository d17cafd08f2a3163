#include <gtest/gtest.h>

#include "hsmax/covering.hpp"
#include "hsmax/weights.hpp"
#include "support/oracles.hpp"

using namespace hsmax;

namespace {

Rectangle box(Coord u0, Coord u1, Coord v0, Coord v1, Coord t0, Coord t1) {
    return Rectangle({{u0, u1}, {v0, v1}, {t0, t1}});
}

} // namespace

TEST(Ordering, DecreasingTLengthStable) {
    const auto g = GridSpec::cube(1, 10);
    const auto cs = CrossSection::t_axis(g);
    const std::vector<Rectangle> in{box(0, 0, 0, 0, 0, 1), box(1, 1, 0, 0, 0, 7), box(2, 2, 0, 0, 0, 3)};
    const auto out = order_for_selection(in, cs);
    EXPECT_EQ(out[0], in[1]);
    EXPECT_EQ(out[1], in[2]);
    EXPECT_EQ(out[2], in[0]);
    EXPECT_EQ(order_for_selection(out, cs), out);

    const std::vector<Rectangle> ties{box(3, 3, 0, 0, 0, 1), box(0, 0, 0, 0, 2, 3), box(1, 1, 0, 0, 5, 6)};
    EXPECT_EQ(order_for_selection(ties, cs), ties);
}

TEST(Tripling, HandDilation) {
    const auto g = GridSpec::cube(1, 10);
    const auto cs = CrossSection::t_axis(g);
    const auto r = box(1, 2, 3, 3, 4, 5);
    const auto t = triple_cross_section(r, cs);
    EXPECT_EQ(t.t_interval(), (Interval{2, 7}));
    EXPECT_EQ(t.side(0), r.side(0));
    EXPECT_EQ(t.side(1), r.side(1));
    EXPECT_EQ(t.volume(), 3 * r.volume());
    EXPECT_TRUE(t.contains(r));
    const auto edge = triple_cross_section(box(0, 0, 0, 0, 0, 2), cs);
    EXPECT_EQ(edge.t_interval(), (Interval{-3, 5}));

    const auto su = triple_cross_section(r, resolve_cross_section(g, {0}));
    EXPECT_EQ(su.side(0), (Interval{-1, 4}));
    EXPECT_EQ(su.t_interval(), r.t_interval());
}

TEST(Selection, DisjointCompanionsKeepEverything) {
    const auto g = GridSpec::cube(1, 12);
    const std::vector<Rectangle> in{box(0, 1, 0, 1, 4, 5), box(3, 4, 0, 1, 4, 5), box(6, 7, 6, 7, 0, 1)};
    const auto sel = covering_select(g, order_for_selection(in, CrossSection::t_axis(g)), CrossSection::t_axis(g));
    EXPECT_EQ(sel.chosen, (std::vector<std::size_t>{0, 1, 2}));
    for (const auto& d : sel.decisions) {
        EXPECT_TRUE(d.chosen);
        EXPECT_EQ(d.witness, 0u);
        EXPECT_EQ(d.overlap, 0);
    }
}

TEST(Selection, DuplicateIsRejected) {
    const auto g = GridSpec::cube(1, 8);
    const auto cs = CrossSection::t_axis(g);
    const auto r = box(1, 3, 2, 2, 3, 4);
    const auto sel = covering_select(g, {r, r, r}, cs);
    EXPECT_EQ(sel.chosen, (std::vector<std::size_t>{0}));
    EXPECT_FALSE(sel.decisions[1].chosen);
    EXPECT_EQ(sel.decisions[1].witness, 1u);
    EXPECT_EQ(sel.decisions[1].overlap_fraction(), 1.0);
    EXPECT_TRUE(replay_audit(g, sel, cs).empty());
}

TEST(Selection, AdjacentUnitSlabRejected) {
    const auto g = GridSpec::cube(1, 8);
    const auto cs = CrossSection::t_axis(g);
    const auto sel = covering_select(g, {box(2, 3, 2, 3, 4, 4), box(2, 3, 2, 3, 5, 5)}, cs);
    EXPECT_EQ(sel.chosen.size(), 1u);
    EXPECT_EQ(sel.companions[0].t_interval(), (Interval{3, 5}));
    EXPECT_FALSE(sel.decisions[1].chosen);
}

TEST(Selection, WitnessIsShortestCoveringPrefix) {
    const auto g = GridSpec::cube(1, 12);
    const auto cs = CrossSection::t_axis(g);
    // Two chosen slabs each cover a third of the last rectangle; together they pass the half mark.
    const std::vector<Rectangle> in{box(0, 1, 0, 0, 4, 4), box(4, 5, 0, 0, 4, 4), box(0, 5, 0, 0, 5, 5)};
    const auto sel = covering_select(g, in, cs);
    EXPECT_EQ(sel.chosen, (std::vector<std::size_t>{0, 1}));
    EXPECT_FALSE(sel.decisions[2].chosen);
    EXPECT_EQ(sel.decisions[2].overlap, 4);
    EXPECT_EQ(sel.decisions[2].witness, 2u);
}

TEST(Selection, MatchesNaiveGreedyAndAudits) {
    const auto g = GridSpec::cube(1, 10);
    const auto cs = CrossSection::t_axis(g);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CoveringConfig cfg;
        cfg.rectangle_count = 60;
        cfg.seed = seed;
        const auto ordered = order_for_selection(random_rectangles(g, cfg), cs);
        const auto sel = covering_select(g, ordered, cs);
        EXPECT_EQ(sel.chosen, oracle::naive_selection(ordered));
        EXPECT_TRUE(replay_audit(g, sel, cs).empty());
        EXPECT_TRUE(std::is_sorted(sel.chosen.begin(), sel.chosen.end()));

        // Feeding the chosen rectangles back in keeps all of them.
        const auto again = covering_select(g, sel.selected(), cs);
        EXPECT_EQ(again.chosen.size(), sel.chosen.size());
    }
}

TEST(Selection, AuditDetectsTampering) {
    const auto g = GridSpec::cube(1, 8);
    const auto cs = CrossSection::t_axis(g);
    const auto r = box(1, 3, 2, 2, 3, 4);
    auto sel = covering_select(g, {r, r}, cs);
    sel.decisions[1].chosen = true;
    sel.decisions[1].witness = 0;
    sel.chosen.push_back(1);
    sel.companions.push_back(triple_cross_section(r, cs));
    EXPECT_FALSE(replay_audit(g, sel, cs).empty());

    auto wrong_witness = covering_select(g, {r, r}, cs);
    wrong_witness.decisions[1].witness = 5;
    EXPECT_FALSE(replay_audit(g, wrong_witness, cs).empty());
}

TEST(Measures, UnionVolume) {
    const auto g = GridSpec::cube(1, 4);
    const auto w = make_constant_weight(g);
    const auto a = box(0, 1, 0, 1, 0, 0), b = box(2, 3, 0, 1, 0, 0);
    EXPECT_EQ(union_volume(std::vector{a}, w), weighted_volume(w, a));
    EXPECT_EQ(union_volume(std::vector{a, b}, w), 8.0);

    Eigen::ArrayXd values = Eigen::ArrayXd::Ones(16);
    values[g.spatial_index(Point{1, 1, 0})] = 2.5;
    const auto hand = WeightField::spatial(g, values, "hand");
    const auto c = box(1, 2, 1, 2, 0, 0);
    EXPECT_EQ(union_volume(std::vector{a, c}, hand), weighted_volume(hand, a) + weighted_volume(hand, c) - 2.5);
    EXPECT_EQ(union_volume(std::vector{box(-3, 0, 0, 0, 0, 0)}, w), 1.0);
}

TEST(Measures, IndicatorSum) {
    const auto g = GridSpec::cube(1, 4);
    const auto w = make_constant_weight(g);
    const auto a = box(0, 1, 0, 1, 0, 0), b = box(1, 2, 1, 2, 0, 0);
    EXPECT_EQ(indicator_sum_power(std::vector{a, b}, w, 2.0), 10.0);
    EXPECT_DOUBLE_EQ(indicator_sum_norm(std::vector{a, b}, w, 2.0), std::sqrt(10.0));
    EXPECT_EQ(indicator_sum_power(std::vector{a, b}, w, 2.0) / union_volume(std::vector{a, b}, w), 10.0 / 7.0);
    EXPECT_EQ(indicator_sum_power(std::vector{a}, w, 3.0), 4.0);
    EXPECT_THROW(indicator_sum_norm(std::vector{a}, w, 1.0), RangeError);
    EXPECT_TRUE(pairwise_disjoint(std::vector{a, box(2, 3, 0, 0, 0, 0)}));
    EXPECT_FALSE(pairwise_disjoint(std::vector{a, b}));
}

TEST(Report, SingleAndDuplicatedRectangle) {
    const auto g = GridSpec::cube(1, 6);
    const auto w = make_power_weight(g, std::vector<double>{1.0, 1.0});
    const auto cs = CrossSection::t_axis(g);
    const auto r = box(1, 3, 0, 2, 2, 4);
    const auto one = covering_run(g, {r}, w, 2.0, cs);
    EXPECT_EQ(one.comparability_ratio, 1.0);
    EXPECT_EQ(one.indicator_ratio, 1.0);
    const auto many = covering_run(g, {r, r, r, r}, w, 3.0, cs);
    EXPECT_EQ(many.selected_count, 1u);
    EXPECT_EQ(many.comparability_ratio, 1.0);
    EXPECT_EQ(many.audit_violations, 0u);
}

TEST(Report, RandomRunsFiniteAndReproducible) {
    const auto g = GridSpec::cube(1, 16);
    const auto w = make_constant_weight(g);
    CoveringConfig cfg;
    cfg.seed = 4;
    const auto a = covering_experiment(cfg, w, 2.0), b = covering_experiment(cfg, w, 2.0);
    EXPECT_EQ(a.rectangle_count, 200u);
    EXPECT_TRUE(std::isfinite(a.comparability_ratio));
    EXPECT_GE(a.comparability_ratio, 1.0);
    EXPECT_GE(a.indicator_ratio, 1.0);
    EXPECT_EQ(a.audit_violations, 0u);
    EXPECT_EQ(a.comparability_ratio, b.comparability_ratio);
    EXPECT_EQ(a.indicator_norm_p, b.indicator_norm_p);
    EXPECT_EQ(a.selection.chosen, b.selection.chosen);
    EXPECT_GE(a.max_slice_ratio, 1.0);
    if (a.disjoint_selection) EXPECT_EQ(a.indicator_ratio, 1.0);
}

TEST(Report, RejectsOutsideRectangles) {
    const auto g = GridSpec::cube(1, 4);
    EXPECT_THROW(covering_select(g, {box(0, 4, 0, 0, 0, 0)}, CrossSection::t_axis(g)), DomainError);
    EXPECT_THROW(resolve_cross_section(g, {3}), DomainError);
}
