// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "hsmax/covering.hpp"
#include "hsmax/harness.hpp"
#include "hsmax/weights.hpp"
#include "support/cli_support.hpp"
#include "support/oracles.hpp"

using namespace hsmax;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "first failure: " << what << "; ";
        pass = pass && ok;
    }
};

ScalarField integer_field(const GridSpec& g, std::uint64_t seed, int lo, int hi) {
    auto rng = make_rng(seed, 40);
    std::uniform_int_distribution<int> value(lo, hi);
    ScalarField f(g);
    for (Index i = 0; i < g.cell_count(); ++i) f.values()[i] = value(rng);
    return f;
}

WeightField integer_weight(const GridSpec& g, std::uint64_t seed) {
    auto rng = make_rng(seed, 41);
    std::uniform_int_distribution<int> value(1, 6);
    Eigen::ArrayXd values(g.spatial_cell_count());
    for (Index i = 0; i < values.size(); ++i) values[i] = value(rng);
    return WeightField::spatial(g, values, "integer:" + std::to_string(seed));
}

double relative_gap(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Outcome definition_equivalence() {
    Outcome out;
    const auto g = GridSpec::cube(1, 7, 1);
    const auto w = make_constant_weight(g);
    std::size_t points = 0;
    for (std::uint64_t seed : {1u, 2u}) {
        const auto f = integer_field(g, seed, -4, 6);
        const auto field = maximal_field(f, w);
        for (Index i = 0; i < g.cell_count(); ++i) {
            const auto x = GroupPoint::from_coords(g.point_at(i));
            const double group = maximal_group_form(f, x);
            const double twisted = maximal_twisted_form(f, w, x).value;
            out.require(group == twisted, "group and twisted forms differ at cell " + std::to_string(i));
            out.require(field.values[i] == twisted, "maximal_field differs from the twisted form at cell " +
                                                 std::to_string(i));
            ++points;
        }
    }
    out.detail << points << " points on 7^3, two integer fields, exact agreement";
    return out;
}

Outcome oracle_equivalence() {
    Outcome out;
    const auto g = GridSpec::cube(1, 5, 1);
    double worst_power = 0.0;
    std::size_t exact_points = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto f = integer_field(g, seed, -5, 9);
        const WeightField weights[] = {make_constant_weight(g), integer_weight(g, seed),
                                       make_power_weight(g, std::vector<double>{1.0, 1.0})};
        for (int k = 0; k < 3; ++k) {
            const auto fast = maximal_field(f, weights[k]);
            const auto slow = oracle::naive_maximal_field(f, weights[k]);
            for (Index i = 0; i < g.cell_count(); ++i) {
                if (k < 2) {
                    out.require(fast.values[i] == slow[i], "integer input mismatch");
                    ++exact_points;
                } else {
                    worst_power = std::max(worst_power, relative_gap(fast.values[i], slow[i]));
                }
            }
        }
    }
    out.require(worst_power <= 1e-12, "power weight relative error above 1e-12");
    out.detail << exact_points << " integer-weight points exact; power weight max rel err " << worst_power;
    return out;
}

Outcome eta_oracle() {
    Outcome out;
    const GridSpec g(1, {{0, 15}, {0, 0}, {0, 0}}, {}, 1);
    double worst = 0.0;
    std::size_t rects = 0, mc_rows = 0;
    for (double a : {-0.5, 0.0, 1.0, 2.0}) {
        const auto w = make_power_weight(g, std::vector<double>{a, 0.0});
        std::vector<Rectangle> intervals;
        for (Coord len = 1; len <= 12; ++len)
            for (Coord lo = 0; lo + len <= 16; ++lo) intervals.push_back(Rectangle({{lo, lo + len - 1}, {0, 0}, {0, 0}}));
        for (const auto& r : intervals) {
            std::vector<double> cells;
            for_each_cell(r, [&](const Point& p) { cells.push_back(w.at(p)); });
            worst = std::max(worst, std::abs(exact_eta(w, r) - oracle::exhaustive_eta(cells)));
            ++rects;
        }
        SurveyOptions options;
        options.subset_samples = 256;
        options.seed = 7;
        for (const auto& row : eta_survey(w, intervals, options).rows) {
            out.require(row.monte_carlo >= row.exact, "Monte Carlo undercut the exact value");
            ++mc_rows;
        }
    }
    out.require(worst <= 1e-14, "exact and exhaustive values differ");
    out.detail << rects << " intervals, max |exact - exhaustive| " << worst << ", " << mc_rows
               << " Monte Carlo rows dominate";
    return out;
}

Outcome selection_audit() {
    Outcome out;
    const auto g = GridSpec::cube(1, 16);
    const auto cs = CrossSection::t_axis(g);
    std::size_t violations = 0, chosen = 0, rejected = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        CoveringConfig cfg;
        cfg.seed = seed;
        const auto ordered = order_for_selection(random_rectangles(g, cfg), cs);
        const auto sel = covering_select(g, ordered, cs);
        violations += replay_audit(g, sel, cs).size();
        out.require(sel.chosen == oracle::naive_selection(ordered), "selector disagrees with the cell-set greedy");
        chosen += sel.chosen.size();
        rejected += ordered.size() - sel.chosen.size();
    }
    out.require(violations == 0, "audit replay found violations");
    out.detail << "20 seeds x 200 rectangles: " << chosen << " chosen, " << rejected << " rejected, " << violations
               << " violations";
    return out;
}

Outcome covering_conclusions() {
    Outcome out;
    const std::vector<std::string> weights{"constant", "power:1,1", "perturbed:0.5:11@power:1,1"};
    const std::vector<Coord> sizes{8, 16, 24};
    std::size_t disjoint = 0, runs = 0;
    for (const auto& desc : weights) {
        std::map<Coord, std::pair<double, double>> worst; // size -> (comparability, indicator)
        for (Coord size : sizes) {
            const auto g = GridSpec::cube(1, size);
            const auto w = make_weight(g, desc);
            for (std::uint64_t seed = 1; seed <= 20; ++seed) {
                CoveringConfig cfg;
                cfg.seed = seed;
                const auto rep = covering_experiment(cfg, w, 2.0);
                ++runs;
                out.require(std::isfinite(rep.comparability_ratio) && rep.comparability_ratio >= 1.0,
                            "comparability ratio not finite");
                out.require(std::isfinite(rep.indicator_ratio) && rep.indicator_ratio >= 1.0,
                            "indicator ratio not finite");
                out.require(rep.audit_violations == 0, "audit violation");
                auto& [c, i] = worst[size];
                c = std::max(c, rep.comparability_ratio);
                i = std::max(i, rep.indicator_ratio);

                // A thin family whose selection is often pairwise disjoint.
                CoveringConfig thin = cfg;
                thin.rectangle_count = 4;
                thin.max_side_fraction = 0.2;
                const auto sparse = covering_experiment(thin, w, 2.0);
                if (sparse.disjoint_selection) {
                    ++disjoint;
                    out.require(sparse.indicator_ratio == 1.0, "disjoint selection with indicator ratio != 1");
                }
                if (rep.disjoint_selection) {
                    ++disjoint;
                    out.require(rep.indicator_ratio == 1.0, "disjoint selection with indicator ratio != 1");
                }
            }
        }
        double clo = INFINITY, chi = 0, ilo = INFINITY, ihi = 0;
        for (const auto& [size, pair] : worst) {
            clo = std::min(clo, pair.first);
            chi = std::max(chi, pair.first);
            ilo = std::min(ilo, pair.second);
            ihi = std::max(ihi, pair.second);
        }
        out.require(chi / clo < 2.0, desc + ": comparability max varies by 2x or more across sizes");
        out.require(ihi / ilo < 2.0, desc + ": indicator max varies by 2x or more across sizes");
        out.detail << desc << " comparability spread " << chi / clo << " indicator spread " << ihi / ilo << "; ";
    }
    out.require(disjoint > 0, "no disjoint selection observed");
    out.detail << runs << " runs, " << disjoint << " disjoint selections with ratio exactly 1";
    return out;
}

Outcome weak_type_stability() {
    Outcome out;
    ExperimentConfig cfg;
    cfg.grid_sizes = {8, 16, 24};
    cfg.weight = "power:1,1";
    cfg.p = {1.5, 2.0, 3.0};
    cfg.generators = {Generator::point_masses, Generator::sparse_signs, Generator::dense_uniform,
                      Generator::indicator_union};
    cfg.trials = 50;
    cfg.seed = 2024;
    const auto rep = run_experiment(cfg);
    out.require(rep.chebyshev_violations == 0, "Chebyshev violation");
    double worst_spread = 0.0;
    std::string worst_case;
    for (auto gen : cfg.generators)
        for (double p : cfg.p) {
            const double s = weak_spread(rep, gen, p);
            if (s > worst_spread) {
                worst_spread = s;
                worst_case = to_string(gen) + " p=" + std::to_string(p);
            }
            out.require(s < 2.0, "weak quantity spread >= 2 for " + to_string(gen) + " p=" + std::to_string(p));
        }

    // Homogeneity and weight-scale invariance on a subset of the same inputs.
    double worst_invariance = 0.0;
    for (Coord size : {8, 16}) {
        const auto g = GridSpec::cube(1, size);
        const auto w = make_weight(g, cfg.weight);
        for (auto gen : cfg.generators)
            for (int trial = 0; trial < 3; ++trial) {
                const auto f = make_input(g, gen, trial_seed(cfg.seed, gen, trial));
                for (double p : cfg.p) {
                    const double weak = weak_type_quantity(f, w, p), strong = strong_ratio(f, w, p);
                    for (double c : {-2.0, 0.25, 3.0}) {
                        const ScalarField cf(g, c * f.values());
                        worst_invariance = std::max({worst_invariance, relative_gap(weak_type_quantity(cf, w, p), weak),
                                                     relative_gap(strong_ratio(cf, w, p), strong)});
                    }
                    for (double c : {8.0, 0.1}) {
                        const auto cw = w.scaled(c);
                        worst_invariance = std::max({worst_invariance, relative_gap(weak_type_quantity(f, cw, p), weak),
                                                     relative_gap(strong_ratio(f, cw, p), strong)});
                    }
                }
            }
    }
    out.require(worst_invariance <= 1e-12, "homogeneity or weight-scale invariance off by more than 1e-12");
    out.detail << rep.rows.size() << " rows, " << rep.chebyshev_violations << " Chebyshev violations, worst weak spread "
               << worst_spread << " (" << worst_case << "), invariance rel err " << worst_invariance;
    return out;
}

Outcome untwisted_reduction() {
    Outcome out;
    const auto g = GridSpec::cube(1, 5, 0);
    std::size_t points = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto f = integer_field(g, 100 + seed, -3, 7);
        for (const auto& w : {make_constant_weight(g), integer_weight(g, seed)}) {
            const auto field = maximal_field(f, w);
            for (Index i = 0; i < g.cell_count(); ++i) {
                const Point x = g.point_at(i);
                const double plain = oracle::plain_strong_maximal(f, w, x);
                out.require(field.values[i] == plain, "maximal_field differs from the untwisted implementation");
                if (i % 5 == 0)
                    out.require(maximal_twisted_form(f, w, GroupPoint::from_coords(x)).value == plain,
                                "twisted point form differs from the untwisted implementation");
                ++points;
            }
        }
    }
    out.detail << points << " points on 5^3, exact agreement";
    return out;
}

Outcome determinism() {
    Outcome out;
    std::size_t count = 0;
    for (const auto& cmd : testsupport::determinism_commands(HSMAX_TEST_DATA)) {
        std::string why;
        out.require(testsupport::reproduces_from_echo(cmd, why), cmd.front() + ": " + why);
        ++count;
    }
    out.detail << count << " command lines rerun from their echoed configs";
    return out;
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds; // 0: no limit
    std::function<Outcome()> check;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "definition equivalence", 60, definition_equivalence},
        {2, "brute-force oracle equivalence", 60, oracle_equivalence},
        {3, "comparability constant vs exhaustive subsets", 120, eta_oracle},
        {4, "selection dichotomy audit", 0, selection_audit},
        {5, "covering conclusions", 0, covering_conclusions},
        {6, "weak-type stability", 0, weak_type_stability},
        {7, "zero-twist reduction", 0, untwisted_reduction},
        {8, "CLI determinism", 0, determinism},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
            o.pass = false;
            o.detail << "; exceeded " << c.limit_seconds << " s";
        }
        if (!o.pass) ++failures;
        std::printf("[%s] %d %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, seconds,
                    o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures ? 1 : 0;
}
