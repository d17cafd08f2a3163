#include "hsmax/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hsmax/weights.hpp"

namespace hsmax {

namespace {

double median(std::vector<double> xs) {
    if (xs.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    return xs.size() % 2 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

double spread(const BoundReport& report, Generator generator, double p, bool weak) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& s : report.scaling) {
        if (s.generator != generator || s.p != p) continue;
        const double v = weak ? s.max_weak : s.max_strong;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi / lo;
}

} // namespace

double lp_norm(const ScalarField& f, const WeightField& w, double p) {
    if (!(p >= 1.0)) throw RangeError("lp_norm: p must be at least 1");
    if (!(f.grid() == w.grid())) throw DomainError("lp_norm: field and weight live on different grids");
    const Eigen::ArrayXd weights = w.as_field().values();
    return std::pow((f.values().abs().pow(p) * weights).sum(), 1.0 / p);
}

std::string to_string(Generator g) {
    switch (g) {
    case Generator::point_masses: return "point_masses";
    case Generator::sparse_signs: return "sparse_signs";
    case Generator::dense_uniform: return "dense_uniform";
    case Generator::indicator_union: return "indicator_union";
    }
    return "unknown";
}

Generator parse_generator(std::string_view name) {
    for (auto g : {Generator::point_masses, Generator::sparse_signs, Generator::dense_uniform,
                   Generator::indicator_union})
        if (name == to_string(g)) return g;
    if (name == "point") return Generator::point_masses;
    if (name == "sparse") return Generator::sparse_signs;
    if (name == "dense") return Generator::dense_uniform;
    if (name == "indicator") return Generator::indicator_union;
    throw ConfigError("unknown generator '" + std::string(name) + "'");
}

ScalarField make_input(const GridSpec& grid, Generator generator, std::uint64_t seed) {
    auto rng = make_rng(seed, 3);
    ScalarField f(grid);
    auto& values = f.values();
    std::uniform_int_distribution<Index> any_cell(0, grid.cell_count() - 1);
    switch (generator) {
    case Generator::point_masses:
        for (int k = 0; k < 3; ++k) values[any_cell(rng)] = 1.0;
        break;
    case Generator::sparse_signs: {
        std::bernoulli_distribution present(0.05), positive(0.5);
        for (Index i = 0; i < values.size(); ++i)
            if (present(rng)) values[i] = positive(rng) ? 1.0 : -1.0;
        if ((values == 0.0).all()) values[any_cell(rng)] = 1.0;
        break;
    }
    case Generator::dense_uniform: {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (Index i = 0; i < values.size(); ++i) values[i] = unit(rng);
        if ((values == 0.0).all()) values[0] = 1.0;
        break;
    }
    case Generator::indicator_union:
        for (int k = 0; k < 3; ++k)
            for_each_cell(random_rectangle(grid, Family::full, rng, 0.5),
                          [&](const Point& p) { values[grid.flat_index(p)] = 1.0; });
        break;
    }
    return f;
}

std::vector<double> geometric_ladder(const MaximalField& mf, int rungs) {
    if (rungs < 1) throw RangeError("geometric_ladder: need at least one rung");
    const auto& v = mf.values.values();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Index i = 0; i < v.size(); ++i) {
        if (v[i] > 0.0) lo = std::min(lo, v[i]);
        hi = std::max(hi, v[i]);
    }
    if (!(hi > 0.0)) throw DomainError("geometric_ladder: maximal function vanishes");
    if (rungs == 1 || lo == hi) return {hi};
    std::vector<double> ladder(rungs);
    const double ratio = hi / lo;
    for (int k = 0; k < rungs; ++k)
        ladder[k] = k == rungs - 1 ? hi : lo * std::pow(ratio, static_cast<double>(k) / (rungs - 1));
    return ladder;
}

double weak_type_quantity(const MaximalField& mf, const ScalarField& f, const WeightField& w, double p,
                          std::span<const double> ladder) {
    const double norm = lp_norm(f, w, p);
    if (!(norm > 0.0)) throw DomainError("weak_type_quantity: f vanishes identically");
    const auto& m = mf.values.values();
    double best = 0.0;
    for (double lambda : ladder) {
        if (!(lambda > 0.0)) throw RangeError("weak_type_quantity: lambda must be positive");
        double volume = 0.0;
        for (Index i = 0; i < m.size(); ++i)
            if (m[i] > lambda) volume += w.at_cell(i);
        best = std::max(best, lambda * std::pow(volume, 1.0 / p) / norm);
    }
    return best;
}

double weak_type_quantity(const ScalarField& f, const WeightField& w, double p, const MaximalOptions& options) {
    if ((f.values() == 0.0).all()) throw DomainError("weak_type_quantity: f vanishes identically");
    const auto mf = maximal_field(f, w, options);
    return weak_type_quantity(mf, f, w, p, geometric_ladder(mf));
}

double strong_ratio(const MaximalField& mf, const ScalarField& f, const WeightField& w, double p) {
    const double norm = lp_norm(f, w, p);
    if (!(norm > 0.0)) throw DomainError("strong_ratio: f vanishes identically");
    return lp_norm(mf.values, w, p) / norm;
}

double strong_ratio(const ScalarField& f, const WeightField& w, double p, const MaximalOptions& options) {
    if ((f.values() == 0.0).all()) throw DomainError("strong_ratio: f vanishes identically");
    return strong_ratio(maximal_field(f, w, options), f, w, p);
}

std::uint64_t trial_seed(std::uint64_t seed, Generator generator, int trial) {
    auto rng = make_rng(seed, (static_cast<std::uint64_t>(generator) << 32) | static_cast<std::uint32_t>(trial));
    return rng();
}

BoundReport run_experiment(const ExperimentConfig& config) {
    for (double p : config.p)
        if (!(p > 1.0)) throw RangeError("run_experiment: every p must exceed 1");
    if (config.trials < 1) throw RangeError("run_experiment: trials must be >= 1");

    BoundReport report;
    report.config = config;
    const MaximalOptions options{config.family, config.shift, config.workers};

    for (Coord size : config.grid_sizes) {
        GridSpec grid(config.n, std::vector<Interval>(2 * config.n + 1, Interval{0, size - 1}), config.factors,
                      config.mu);
        const WeightField w = make_weight(grid, config.weight);
        for (Generator gen : config.generators) {
            std::map<double, std::pair<std::vector<double>, std::vector<double>>> per_p;
            for (int trial = 0; trial < config.trials; ++trial) {
                const std::uint64_t seed = trial_seed(config.seed, gen, trial);
                const ScalarField f = make_input(grid, gen, seed);
                const MaximalField mf = maximal_field(f, w, options);
                const auto ladder = geometric_ladder(mf, config.ladder_rungs);
                const double rung_ratio = ladder.size() > 1 ? ladder[1] / ladder[0] : 1.0;
                for (double p : config.p) {
                    TrialRow row{trial, seed, gen, size, p, weak_type_quantity(mf, f, w, p, ladder),
                                 strong_ratio(mf, f, w, p), rung_ratio};
                    if (row.weak_quantity > row.strong_ratio) ++report.chebyshev_violations;
                    per_p[p].first.push_back(row.weak_quantity);
                    per_p[p].second.push_back(row.strong_ratio);
                    report.rows.push_back(row);
                }
            }
            for (double p : config.p) {
                const auto& [weak, strong] = per_p[p];
                report.scaling.push_back({gen, size, p, *std::max_element(weak.begin(), weak.end()), median(weak),
                                          *std::max_element(strong.begin(), strong.end()), median(strong)});
            }
        }
    }
    return report;
}

double weak_spread(const BoundReport& report, Generator generator, double p) {
    return spread(report, generator, p, true);
}

double strong_spread(const BoundReport& report, Generator generator, double p) {
    return spread(report, generator, p, false);
}

} // namespace hsmax
