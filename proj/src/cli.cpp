#include "hsmax/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "hsmax/io.hpp"

namespace hsmax::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

int worker_count() {
    const char* env = std::getenv("HSMAX_WORKERS");
    if (!env || !*env) return 1;
    try {
        return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
        throw ConfigError("HSMAX_WORKERS must be a positive integer");
    }
}

std::string timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::ofstream open_out(const fs::path& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw IoError("cannot write " + path.string());
    return os;
}

void finish(std::ofstream& os, const fs::path& path) {
    os.flush();
    if (!os) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) {
    auto os = open_out(path);
    os << j.dump(2) << '\n';
    finish(os, path);
}

/// Report document: the timestamp lives only in "header" so payloads diff cleanly.
json document(const RunConfig& config, json report) {
    return {{"header", {{"tool", "hsmax"}, {"timestamp", timestamp()}}},
            {"config", to_json(config)},
            {"report", std::move(report)}};
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(text);
    while (std::getline(is, item, ',')) out.push_back(item);
    return out;
}

Coord parse_coord(const std::string& text) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &used);
    } catch (const std::exception&) {
        throw ConfigError("not an integer: '" + text + "'");
    }
    if (used != text.size()) throw ConfigError("not an integer: '" + text + "'");
    return v;
}

bool report_csv(const RunConfig& config) {
    if (config.format == "bin") throw ConfigError("format 'bin' applies to the maximal subcommand only");
    return config.format == "csv";
}

int cmd_maximal(const RunConfig& given, const fs::path& out_dir, std::ostream& out) {
    RunConfig config = given;
    if (config.input.empty() && config.generator.empty())
        throw UsageError("maximal: give --input PATH or --generator NAME");
    if (config.format != "csv" && config.format != "bin" && config.format != "json")
        throw ConfigError("unknown format '" + config.format + "'");

    ScalarField f(GridSpec::cube(config.n, 1, config.mu));
    if (!config.input.empty()) {
        if (!fs::exists(config.input)) throw UsageError("maximal: input file not found: " + config.input);
        const bool binary = fs::path(config.input).extension() == ".bin";
        std::ifstream is(config.input, binary ? std::ios::binary : std::ios::in);
        if (!is) throw IoError("cannot read " + config.input);
        if (binary) {
            f = io::read_field_binary(is, config.mu);
        } else {
            std::optional<GridSpec> grid;
            if (!config.extents.empty()) grid = config.grid();
            f = io::read_field_csv(is, grid, config.mu);
        }
        if (f.grid().n() != config.n) throw ConfigError("maximal: input dimension does not match n");
        config.extents = f.grid().extents();
        f = ScalarField(config.grid(), f.values());
    } else {
        f = make_input(config.grid(), parse_generator(config.generator), config.seed);
    }

    const GridSpec& grid = f.grid();
    const WeightField w = make_weight(grid, config.weight);
    const MaximalOptions options{config.family(), config.shift(), worker_count()};
    const MaximalField mf = maximal_field(f, w, options);

    const auto& v = mf.values.values();
    if (!v.isFinite().all() || (v < 0.0).any()) throw InvariantViolation("maximal: non-finite or negative value");
    Index best = 0;
    v.maxCoeff(&best);
    const GroupPoint x = GroupPoint::from_coords(grid.point_at(best));
    const PointMaximum check = maximal_twisted_form(f, w, x, options);
    if (std::abs(check.value - v[best]) > 1e-12 * std::max(1.0, std::abs(v[best])))
        throw InvariantViolation("maximal: field value disagrees with direct enumeration at the maximum");

    fs::create_directories(out_dir);
    if (config.format == "bin") {
        const auto path = out_dir / "maximal.bin";
        auto os = open_out(path, true);
        io::write_field_binary(os, mf.values);
        finish(os, path);
    } else if (config.format == "csv") {
        const auto path = out_dir / "maximal.csv";
        auto os = open_out(path);
        io::write_field_csv(os, mf.values);
        finish(os, path);
    } else {
        json values = json::array();
        for (Index i = 0; i < v.size(); ++i) values.push_back(v[i]);
        write_json(out_dir / "maximal.json", document(config, {{"values", values}}));
    }
    json diag{{"argmax_point", grid.point_at(best)},
              {"max_value", v[best]},
              {"argmax_rectangle", io::to_json(check.argmax)},
              {"min_value", v.minCoeff()},
              {"sum", v.sum()},
              {"weight", w.descriptor()},
              {"family", config.dyadic_only ? "dyadic" : "full"}};
    write_json(out_dir / "diagnostics.json", document(config, diag));
    write_json(out_dir / "config.json", to_json(config));
    out << "maximal: " << grid.cell_count() << " cells, max " << io::format_double(v[best]) << '\n';
    return 0;
}

int cmd_cover(const RunConfig& config, const fs::path& out_dir, std::ostream& out) {
    const bool csv = report_csv(config);
    const GridSpec grid = config.grid();
    const WeightField w = make_weight(grid, config.weight);
    const CrossSection cs = resolve_cross_section(grid, config.cross_section);

    std::vector<Rectangle> rects;
    if (!config.rects.empty()) {
        if (!fs::exists(config.rects)) throw UsageError("cover: rectangle file not found: " + config.rects);
        std::ifstream is(config.rects);
        if (!is) throw IoError("cannot read " + config.rects);
        rects = io::read_rectangles_csv(is);
        for (const auto& r : rects)
            if (r.dim() != grid.dim()) throw ConfigError("cover: rectangle dimension does not match the grid");
    } else {
        CoveringConfig cc;
        cc.rectangle_count = config.rectangle_count;
        cc.seed = config.seed;
        cc.family = config.family();
        cc.max_side_fraction = config.max_side_fraction;
        cc.cross_section = config.cross_section;
        rects = random_rectangles(grid, cc);
    }

    json reports = json::array();
    std::size_t violations = 0;
    std::optional<CoveringReport> first;
    for (double p : config.p) {
        CoveringReport rep = covering_run(grid, rects, w, p, cs);
        rep.seed = config.seed;
        violations += rep.audit_violations;
        if (!std::isfinite(rep.comparability_ratio) || !std::isfinite(rep.indicator_ratio))
            throw InvariantViolation("cover: non-finite covering ratio");
        reports.push_back(io::to_json(rep));
        if (!first) first = std::move(rep);
    }

    fs::create_directories(out_dir);
    write_json(out_dir / "covering_report.json", document(config, reports));
    if (csv && first) {
        auto path = out_dir / "selection.csv";
        auto os = open_out(path);
        io::write_selection_csv(os, first->selection);
        finish(os, path);
        path = out_dir / "rectangles.csv";
        auto rs = open_out(path);
        io::write_rectangles_csv(rs, grid.n(), first->selection.input);
        finish(rs, path);
    }
    write_json(out_dir / "config.json", to_json(config));
    if (first)
        out << "cover: " << first->rectangle_count << " rectangles, " << first->selected_count << " selected\n";
    if (violations) throw InvariantViolation("cover: audit replay found " + std::to_string(violations) + " violations");
    return 0;
}

int cmd_weaktype(const RunConfig& config, const fs::path& out_dir, std::ostream& out) {
    const bool csv = report_csv(config);
    ExperimentConfig ec;
    ec.n = config.n;
    ec.mu = config.mu;
    ec.factors = config.factors;
    ec.grid_sizes = config.grid_sizes;
    if (ec.grid_sizes.empty()) ec.grid_sizes = {config.grid().length(0)};
    ec.weight = config.weight;
    ec.p = config.p;
    ec.generators.clear();
    for (const auto& g : config.generators) ec.generators.push_back(parse_generator(g));
    ec.trials = config.trials;
    ec.seed = config.seed;
    ec.family = config.family();
    ec.shift = config.shift();
    ec.ladder_rungs = config.ladder_rungs;
    ec.workers = worker_count();

    const BoundReport rep = run_experiment(ec);
    fs::create_directories(out_dir);
    write_json(out_dir / "bound_report.json", document(config, io::to_json(rep)));
    if (csv) {
        const auto path = out_dir / "bound_report.csv";
        auto os = open_out(path);
        io::write_bound_csv(os, rep);
        finish(os, path);
    }
    write_json(out_dir / "config.json", to_json(config));
    out << "weaktype: " << rep.rows.size() << " rows, " << rep.chebyshev_violations << " Chebyshev violations\n";
    if (rep.chebyshev_violations) throw InvariantViolation("weaktype: weak quantity exceeded strong ratio");
    return 0;
}

int cmd_eta(const RunConfig& config, const fs::path& out_dir, std::ostream& out) {
    const bool csv = report_csv(config);
    const GridSpec grid = config.grid();
    const WeightField w = make_weight(grid, config.weight);
    SurveyOptions so;
    so.family = config.family();
    so.rectangle_budget = config.rectangle_budget;
    so.subset_samples = config.subset_samples;
    so.seed = config.seed;
    so.theta = config.theta;

    const ComparabilityReport rep = eta_survey(w, so);
    fs::create_directories(out_dir);
    write_json(out_dir / "comparability.json", document(config, io::to_json(rep)));
    if (csv) {
        const auto path = out_dir / "comparability.csv";
        auto os = open_out(path);
        io::write_comparability_csv(os, grid.n(), rep);
        finish(os, path);
    }
    write_json(out_dir / "config.json", to_json(config));
    out << "eta: " << rep.rows.size() << " rectangles, eta " << io::format_double(rep.global_eta) << '\n';
    for (const auto& row : rep.rows)
        if (!(row.exact > 0.0 && row.exact <= 1.0) || row.monte_carlo < row.exact)
            throw InvariantViolation("eta: exact value out of range or undercut by a sampled subset on " +
                                     row.rectangle.to_string());
    return 0;
}

} // namespace

GridSpec RunConfig::grid() const {
    if (n < 1) throw ConfigError("n must be at least 1");
    auto ext = extents;
    if (ext.empty()) ext.assign(2 * n + 1, Interval{0, 7});
    if (static_cast<int>(ext.size()) != 2 * n + 1) throw ConfigError("extents must list 2n+1 intervals");
    return GridSpec(n, std::move(ext), factors, mu);
}

ShiftConvention RunConfig::shift() const {
    if (shift_convention == "standard") return ShiftConvention::standard;
    if (shift_convention == "alternate") return ShiftConvention::alternate;
    throw ConfigError("shift_convention must be 'standard' or 'alternate'");
}

json to_json(const RunConfig& c) {
    json extents = json::array();
    for (const auto& e : c.extents) extents.push_back({e.lo, e.hi});
    return {{"command", c.command},
            {"n", c.n},
            {"extents", extents},
            {"factors", c.factors},
            {"mu", c.mu},
            {"dyadic_only", c.dyadic_only},
            {"shift_convention", c.shift_convention},
            {"weight", c.weight},
            {"seed", c.seed},
            {"p", c.p},
            {"format", c.format},
            {"input", c.input},
            {"generator", c.generator},
            {"rects", c.rects},
            {"rectangle_count", c.rectangle_count},
            {"max_side_fraction", c.max_side_fraction},
            {"cross_section", c.cross_section},
            {"grid_sizes", c.grid_sizes},
            {"generators", c.generators},
            {"trials", c.trials},
            {"ladder_rungs", c.ladder_rungs},
            {"rectangle_budget", c.rectangle_budget},
            {"subset_samples", c.subset_samples},
            {"theta", c.theta}};
}

RunConfig config_from_json(const json& j, RunConfig c) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = [] {
        std::set<std::string> keys;
        const json defaults = to_json(RunConfig{});
        for (const auto& [k, v] : defaults.items()) keys.insert(k);
        return keys;
    }();
    for (const auto& [k, v] : j.items())
        if (!known.contains(k)) throw ConfigError("unknown config key '" + k + "'");

    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) field = get<std::decay_t<decltype(field)>>(j, key);
    };
    take("command", c.command);
    take("n", c.n);
    if (j.contains("extents")) {
        c.extents.clear();
        for (const auto& e : get<std::vector<std::vector<Coord>>>(j, "extents")) {
            if (e.size() != 2 || e[0] > e[1]) throw ConfigError("each extent must be [lo, hi] with lo <= hi");
            c.extents.push_back({e[0], e[1]});
        }
    }
    take("factors", c.factors);
    take("mu", c.mu);
    take("dyadic_only", c.dyadic_only);
    take("shift_convention", c.shift_convention);
    take("weight", c.weight);
    take("seed", c.seed);
    take("p", c.p);
    take("format", c.format);
    take("input", c.input);
    take("generator", c.generator);
    take("rects", c.rects);
    take("rectangle_count", c.rectangle_count);
    take("max_side_fraction", c.max_side_fraction);
    take("cross_section", c.cross_section);
    take("grid_sizes", c.grid_sizes);
    take("generators", c.generators);
    take("trials", c.trials);
    take("ladder_rungs", c.ladder_rungs);
    take("rectangle_budget", c.rectangle_budget);
    take("subset_samples", c.subset_samples);
    take("theta", c.theta);
    return c;
}

void apply_grid_flag(RunConfig& config, const std::string& text) {
    const auto parts = split_list(text);
    if (parts.size() != 3) throw ConfigError("--grid expects \"n,extent,mu\"");
    const Coord n = parse_coord(parts[0]);
    if (n < 1 || n > 16) throw ConfigError("--grid: n out of range");
    Interval e;
    if (const auto colon = parts[1].find(':'); colon != std::string::npos) {
        e = {parse_coord(parts[1].substr(0, colon)), parse_coord(parts[1].substr(colon + 1))};
    } else {
        const Coord size = parse_coord(parts[1]);
        if (size < 1) throw ConfigError("--grid: extent must be positive");
        e = {0, size - 1};
    }
    if (e.lo > e.hi) throw ConfigError("--grid: empty extent");
    config.n = static_cast<int>(n);
    config.extents.assign(2 * config.n + 1, e);
    config.mu = parse_coord(parts[2]);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete weighted strong maximal operator on the Heisenberg group", "hsmax"};
    app.require_subcommand(1);

    std::string config_path, grid_text, weight, p_text, out_dir = ".", format, input, generator, rects;
    std::uint64_t seed = 0;
    int trials = 0;
    bool dyadic = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run config (an echoed config.json works)");
        sub->add_option("--seed", seed, "Random seed");
        sub->add_option("--grid", grid_text, "Grid as \"n,extent,mu\"; extent is N or lo:hi");
        sub->add_option("--weight", weight, "Weight descriptor, e.g. power:1,1 or constant");
        sub->add_option("--p", p_text, "Comma separated exponents");
        sub->add_flag("--dyadic", dyadic, "Restrict to dyadic rectangles");
        sub->add_option("--out", out_dir, "Output directory");
        sub->add_option("--format", format, "csv, json or bin");
    };
    auto* maximal = app.add_subcommand("maximal", "Evaluate M_w f on the grid");
    auto* cover = app.add_subcommand("cover", "Run the covering selection and measure its conclusions");
    auto* weaktype = app.add_subcommand("weaktype", "Weak-type and strong ratio experiment");
    auto* eta = app.add_subcommand("eta", "Survey the comparability constant of a weight");
    for (auto* sub : {maximal, cover, weaktype, eta}) add_common(sub);
    maximal->add_option("--input", input, "Field file (.csv or .bin)");
    maximal->add_option("--generator", generator, "Input generator: point, sparse, dense, indicator");
    cover->add_option("--rects", rects, "Rectangle CSV instead of random rectangles");
    weaktype->add_option("--trials", trials, "Trials per generator");
    weaktype->add_option("--generator", generator, "Comma separated generators");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "hsmax: " << e.what() << '\n' << app.help();
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        RunConfig config;
        if (!config_path.empty()) {
            std::ifstream is(config_path);
            if (!is) throw UsageError("cannot read config " + config_path);
            json j;
            try {
                j = json::parse(is);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("config is not valid JSON: ") + e.what());
            }
            config = config_from_json(j);
        }
        config.command = sub->get_name();
        if (sub->count("--seed")) config.seed = seed;
        if (!grid_text.empty()) apply_grid_flag(config, grid_text);
        if (!weight.empty()) config.weight = weight;
        if (!p_text.empty()) {
            config.p.clear();
            for (const auto& s : split_list(p_text)) {
                try {
                    config.p.push_back(std::stod(s));
                } catch (const std::exception&) {
                    throw ConfigError("--p: not a number '" + s + "'");
                }
            }
        }
        if (dyadic) config.dyadic_only = true;
        if (!format.empty()) config.format = format;
        if (!input.empty()) config.input = input;
        if (!rects.empty()) config.rects = rects;
        if (trials) config.trials = trials;
        if (!generator.empty()) {
            if (config.command == "weaktype") config.generators = split_list(generator);
            else config.generator = generator;
        }
        if (config.format != "csv" && config.format != "json" && config.format != "bin")
            throw ConfigError("unknown format '" + config.format + "'");

        if (config.command == "maximal") return cmd_maximal(config, out_dir, out);
        if (config.command == "cover") return cmd_cover(config, out_dir, out);
        if (config.command == "weaktype") return cmd_weaktype(config, out_dir, out);
        return cmd_eta(config, out_dir, out);
    } catch (const UsageError& e) {
        err << "hsmax: " << e.what() << '\n';
        return 2;
    } catch (const ConfigError& e) {
        err << "hsmax: config error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "hsmax: " << e.what() << '\n';
        return 2;
    } catch (const RangeError& e) {
        err << "hsmax: " << e.what() << '\n';
        return 2;
    } catch (const InvariantViolation& e) {
        err << "hsmax: invariant violation: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        err << "hsmax: " << e.what() << '\n';
        return 1;
    }
}

} // namespace hsmax::cli
