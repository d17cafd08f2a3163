#include "hsmax/weights.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace hsmax {

namespace {

double parse_double(std::string_view text) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError("weight descriptor: bad number '" + std::string(text) + "'");
    return value;
}

std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.push_back(parse_double(text.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

std::string format_list(std::span<const double> xs) {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? "," : "") << xs[i];
    return os.str();
}

std::vector<double> gather_weights(const WeightField& w, const Rectangle& r) {
    std::vector<double> cells;
    cells.reserve(static_cast<std::size_t>(r.volume()));
    for_each_cell(r, [&](const Point& p) { cells.push_back(w.at(p)); });
    return cells;
}

double ordered_sum(const std::vector<double>& xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

} // namespace

WeightField make_power_weight(const GridSpec& grid, std::span<const double> exponents,
                              std::span<const double> centers) {
    const int s = grid.spatial_dim();
    if (static_cast<int>(exponents.size()) != s || static_cast<int>(centers.size()) != s)
        throw DomainError("make_power_weight: need one exponent and one center per spatial axis");
    for (double a : exponents)
        if (!(a > -1.0)) throw RangeError("make_power_weight: exponents must exceed -1");

    Eigen::ArrayXd values(grid.spatial_cell_count());
    for (Index i = 0; i < values.size(); ++i) {
        Index rem = i;
        double w = 1.0;
        for (int a = s - 1; a >= 0; --a) {
            const double x = static_cast<double>(grid.extent(a).lo + rem % grid.length(a));
            rem /= grid.length(a);
            // Distance from the cell centre, floored at half a cell so the weight stays positive.
            const double r = std::max(std::abs(x + 0.5 - centers[a]), 0.5);
            if (exponents[a] != 0.0) w *= std::pow(r, exponents[a]);
        }
        values[i] = w;
    }
    return WeightField::spatial(grid, std::move(values),
                                "power:" + format_list(exponents) + "@" + format_list(centers));
}

WeightField make_power_weight(const GridSpec& grid, std::span<const double> exponents) {
    std::vector<double> centers(grid.spatial_dim());
    for (int a = 0; a < grid.spatial_dim(); ++a)
        centers[a] = 0.5 * static_cast<double>(grid.extent(a).lo + grid.extent(a).hi + 1);
    return make_power_weight(grid, exponents, centers);
}

WeightField make_constant_weight(const GridSpec& grid) {
    return WeightField::spatial(grid, Eigen::ArrayXd::Ones(grid.spatial_cell_count()), "constant");
}

WeightField make_perturbed_weight(const GridSpec& grid, const WeightField& base, double amplitude,
                                  std::uint64_t seed) {
    if (!(amplitude >= 0.0 && amplitude < 1.0))
        throw RangeError("make_perturbed_weight: amplitude must lie in [0, 1)");
    if (!(base.grid() == grid)) throw DomainError("make_perturbed_weight: base lives on another grid");
    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::ArrayXd values = base.values();
    for (Index i = 0; i < values.size(); ++i) values[i] *= 1.0 + amplitude * unit(rng);

    std::ostringstream desc;
    desc.precision(17);
    desc << "perturbed:" << amplitude << ':' << seed << '@' << base.descriptor();
    return base.t_independent() ? WeightField::spatial(grid, std::move(values), desc.str())
                                : WeightField::full(grid, std::move(values), desc.str());
}

WeightField make_weight(const GridSpec& grid, std::string_view descriptor) {
    if (descriptor == "constant") return make_constant_weight(grid);
    if (descriptor.starts_with("power:")) {
        auto body = descriptor.substr(6);
        const auto at = body.find('@');
        const auto exponents = parse_list(body.substr(0, at));
        if (static_cast<int>(exponents.size()) != grid.spatial_dim())
            throw ConfigError("power weight: expected " + std::to_string(grid.spatial_dim()) + " exponents");
        if (at == std::string_view::npos) return make_power_weight(grid, exponents);
        const auto centers = parse_list(body.substr(at + 1));
        if (centers.size() != exponents.size()) throw ConfigError("power weight: center count mismatch");
        return make_power_weight(grid, exponents, centers);
    }
    if (descriptor.starts_with("perturbed:")) {
        auto body = descriptor.substr(10);
        const auto at = body.find('@');
        if (at == std::string_view::npos) throw ConfigError("perturbed weight: missing '@base'");
        auto params = body.substr(0, at);
        const auto colon = params.find(':');
        if (colon == std::string_view::npos) throw ConfigError("perturbed weight: expected AMPLITUDE:SEED");
        const double amplitude = parse_double(params.substr(0, colon));
        const auto seed_text = params.substr(colon + 1);
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
        if (ec != std::errc() || ptr != seed_text.data() + seed_text.size())
            throw ConfigError("perturbed weight: bad seed");
        return make_perturbed_weight(grid, make_weight(grid, body.substr(at + 1)), amplitude, seed);
    }
    throw ConfigError("unknown weight descriptor '" + std::string(descriptor) + "'");
}

double exact_eta(const WeightField& w, const Rectangle& r, double theta) {
    if (!(theta > 0.0 && theta < 1.0)) throw RangeError("exact_eta: theta must lie in (0, 1)");
    if (!r.within(w.grid())) throw DomainError("exact_eta: rectangle exceeds grid extents");
    auto cells = gather_weights(w, r);
    const auto volume = static_cast<std::size_t>(cells.size());
    const auto k = static_cast<std::size_t>(std::floor(theta * static_cast<double>(volume))) + 1;
    const double total = ordered_sum(cells);
    std::sort(cells.begin(), cells.end());
    const double lightest = std::accumulate(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    // Summation order differs between numerator and total; keep the ratio in (0, 1].
    return std::min(1.0, lightest / total);
}

ComparabilityReport eta_survey(const WeightField& w, std::span<const Rectangle> rectangles,
                               const SurveyOptions& options) {
    if (options.subset_samples < 1) throw RangeError("eta_survey: subset_samples must be >= 1");
    ComparabilityReport report;
    report.descriptor = w.descriptor();
    report.theta = options.theta;
    report.subset_samples = options.subset_samples;
    report.seed = options.seed;
    report.rectangle_count = static_cast<std::int64_t>(rectangles.size());

    auto rng = make_rng(options.seed, 1);
    for (const auto& r : rectangles) {
        EtaRow row{r, exact_eta(w, r, options.theta), 1.0, options.subset_samples};
        const auto cells = gather_weights(w, r);
        const std::size_t volume = cells.size();
        const double total = ordered_sum(cells);
        const auto k = static_cast<std::size_t>(std::floor(options.theta * static_cast<double>(volume))) + 1;
        std::vector<std::size_t> order(volume);
        std::vector<double> chosen;
        double best = std::numeric_limits<double>::infinity();
        for (std::int64_t s = 0; s < options.subset_samples; ++s) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            const std::size_t size = std::uniform_int_distribution<std::size_t>(k, volume)(rng);
            chosen.clear();
            for (std::size_t j = 0; j < size; ++j) {
                const std::size_t pick = std::uniform_int_distribution<std::size_t>(j, volume - 1)(rng);
                std::swap(order[j], order[pick]);
                chosen.push_back(cells[order[j]]);
            }
            // Ascending summation, as in exact_eta, so rounding cannot undercut the minimiser.
            std::sort(chosen.begin(), chosen.end());
            best = std::min(best, ordered_sum(chosen) / total);
        }
        row.monte_carlo = best;
        report.global_eta = std::min(report.global_eta, row.exact);
        report.global_monte_carlo = std::min(report.global_monte_carlo, row.monte_carlo);
        report.rows.push_back(std::move(row));
    }
    return report;
}

ComparabilityReport eta_survey(const WeightField& w, const SurveyOptions& options) {
    if (options.rectangle_budget < 1) throw RangeError("eta_survey: rectangle_budget must be >= 1");
    const GridSpec& grid = w.grid();
    std::vector<Rectangle> rects;
    const bool exhaustive = family_size(grid, options.family) <= static_cast<std::uint64_t>(options.rectangle_budget);
    if (exhaustive) {
        rects = enumerate_rectangles(grid, options.family);
    } else {
        auto rng = make_rng(options.seed, 0);
        rects.reserve(static_cast<std::size_t>(options.rectangle_budget));
        for (std::int64_t i = 0; i < options.rectangle_budget; ++i)
            rects.push_back(random_rectangle(grid, options.family, rng));
    }
    auto report = eta_survey(w, rects, options);
    report.exhaustive = exhaustive;
    return report;
}

} // namespace hsmax
