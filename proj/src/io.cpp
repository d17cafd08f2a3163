#include "hsmax/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace hsmax::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, sep)) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
        out.push_back(cell);
    }
    return out;
}

template <class T>
T parse(const std::string& text, const char* what) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ConfigError(std::string("CSV: bad ") + what + " '" + text + "'");
    return value;
}

void put_u64(std::ostream& os, std::uint64_t v) {
    std::array<char, 8> bytes;
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    os.write(bytes.data(), 8);
}

std::uint64_t get_u64(std::istream& is) {
    std::array<unsigned char, 8> bytes;
    if (!is.read(reinterpret_cast<char*>(bytes.data()), 8)) throw ConfigError("binary field: truncated input");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

} // namespace

std::string format_double(double x) {
    std::array<char, 64> buf;
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), ptr);
}

std::vector<std::string> axis_names(int n) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("u" + std::to_string(i));
    for (int i = 1; i <= n; ++i) names.push_back("v" + std::to_string(i));
    names.push_back("t");
    return names;
}

void write_field_csv(std::ostream& os, const ScalarField& f) {
    const GridSpec& g = f.grid();
    for (const auto& name : axis_names(g.n())) os << name << ',';
    os << "value\n";
    for (Index i = 0; i < g.cell_count(); ++i) {
        for (Coord c : g.point_at(i)) os << c << ',';
        os << format_double(f[i]) << '\n';
    }
}

ScalarField read_field_csv(std::istream& is, const std::optional<GridSpec>& grid, Coord mu) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("field CSV: empty input");
    const auto header = split(line);
    if (header.size() < 4 || header.size() % 2 != 0 || header.back() != "value")
        throw ConfigError("field CSV: header must be u1..un,v1..vn,t,value");
    const int d = static_cast<int>(header.size()) - 1;
    const int n = (d - 1) / 2;

    std::vector<std::pair<Point, double>> rows;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (static_cast<int>(cells.size()) != d + 1) throw ConfigError("field CSV: wrong column count");
        Point p(d);
        for (int a = 0; a < d; ++a) p[a] = parse<Coord>(cells[a], "coordinate");
        rows.emplace_back(std::move(p), parse<double>(cells[d], "value"));
    }

    GridSpec g = grid.value_or(GridSpec::cube(n, 1, mu));
    if (!grid) {
        if (rows.empty()) throw ConfigError("field CSV: no rows and no grid");
        std::vector<Interval> ext(d, Interval{std::numeric_limits<Coord>::max(), std::numeric_limits<Coord>::min()});
        for (const auto& [p, v] : rows)
            for (int a = 0; a < d; ++a) ext[a] = {std::min(ext[a].lo, p[a]), std::max(ext[a].hi, p[a])};
        g = GridSpec(n, std::move(ext), {}, mu);
    } else if (g.dim() != d) {
        throw ConfigError("field CSV: dimension does not match the grid");
    }
    ScalarField f(g);
    for (const auto& [p, v] : rows) {
        if (!g.contains(p)) throw ConfigError("field CSV: row outside grid extents");
        f.set(p, v);
    }
    return f;
}

void write_field_binary(std::ostream& os, const ScalarField& f) {
    const GridSpec& g = f.grid();
    put_u64(os, static_cast<std::uint64_t>(g.dim()));
    for (const auto& e : g.extents()) {
        put_u64(os, static_cast<std::uint64_t>(e.lo));
        put_u64(os, static_cast<std::uint64_t>(e.hi));
    }
    for (Index i = 0; i < g.cell_count(); ++i) put_u64(os, std::bit_cast<std::uint64_t>(f[i]));
}

ScalarField read_field_binary(std::istream& is, Coord mu) {
    const auto d = static_cast<std::int64_t>(get_u64(is));
    if (d < 3 || d % 2 == 0 || d > 63) throw ConfigError("binary field: bad dimension");
    std::vector<Interval> ext(static_cast<std::size_t>(d));
    for (auto& e : ext) {
        e.lo = static_cast<Coord>(get_u64(is));
        e.hi = static_cast<Coord>(get_u64(is));
    }
    GridSpec g(static_cast<int>(d / 2), std::move(ext), {}, mu);
    ScalarField f(g);
    for (Index i = 0; i < g.cell_count(); ++i) f[i] = std::bit_cast<double>(get_u64(is));
    return f;
}

void write_rectangles_csv(std::ostream& os, int n, std::span<const Rectangle> rects) {
    const auto names = axis_names(n);
    for (std::size_t a = 0; a < names.size(); ++a)
        os << (a ? "," : "") << names[a] << "_lo," << names[a] << "_hi";
    os << '\n';
    for (const auto& r : rects) {
        for (int a = 0; a < r.dim(); ++a) os << (a ? "," : "") << r.side(a).lo << ',' << r.side(a).hi;
        os << '\n';
    }
}

std::vector<Rectangle> read_rectangles_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("rectangle CSV: empty input");
    const auto header = split(line);
    if (header.size() < 6 || header.size() % 4 != 2) throw ConfigError("rectangle CSV: expected lo/hi per axis");
    const std::size_t d = header.size() / 2;
    std::vector<Rectangle> out;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split(line);
        if (cells.size() != 2 * d) throw ConfigError("rectangle CSV: wrong column count");
        std::vector<Interval> sides(d);
        for (std::size_t a = 0; a < d; ++a) {
            sides[a] = {parse<Coord>(cells[2 * a], "lo"), parse<Coord>(cells[2 * a + 1], "hi")};
            if (sides[a].lo > sides[a].hi) throw ConfigError("rectangle CSV: lo > hi");
        }
        out.emplace_back(std::move(sides));
    }
    return out;
}

void write_selection_csv(std::ostream& os, const Selection& selection) {
    os << "index,chosen,witness_M,overlap_fraction\n";
    for (const auto& d : selection.decisions)
        os << d.index << ',' << (d.chosen ? 1 : 0) << ',' << d.witness << ',' << format_double(d.overlap_fraction())
           << '\n';
}

nlohmann::json to_json(const Rectangle& r) {
    auto sides = nlohmann::json::array();
    for (const auto& s : r.sides()) sides.push_back({s.lo, s.hi});
    return sides;
}

nlohmann::json to_json(const CoveringReport& rep) {
    nlohmann::json j;
    j["descriptor"] = rep.descriptor;
    j["p"] = rep.p;
    j["seed"] = rep.seed;
    j["rectangle_count"] = rep.rectangle_count;
    j["selected_count"] = rep.selected_count;
    j["union_all"] = rep.union_all;
    j["union_selected"] = rep.union_selected;
    j["comparability_ratio"] = rep.comparability_ratio;
    j["indicator_norm_p"] = rep.indicator_norm_p;
    j["indicator_ratio"] = rep.indicator_ratio;
    j["disjoint_selection"] = rep.disjoint_selection;
    j["max_slice_ratio"] = rep.max_slice_ratio;
    j["audit_violations"] = rep.audit_violations;
    auto chosen = nlohmann::json::array();
    for (auto i : rep.selection.chosen) chosen.push_back(i);
    j["chosen"] = chosen;
    return j;
}

nlohmann::json to_json(const ComparabilityReport& rep) {
    nlohmann::json j;
    j["descriptor"] = rep.descriptor;
    j["theta"] = rep.theta;
    j["global_eta"] = rep.global_eta;
    j["global_monte_carlo"] = rep.global_monte_carlo;
    j["exhaustive"] = rep.exhaustive;
    j["rectangle_count"] = rep.rectangle_count;
    j["subset_samples"] = rep.subset_samples;
    j["seed"] = rep.seed;
    auto rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"rectangle", to_json(r.rectangle)},
                        {"exact_eta", r.exact},
                        {"monte_carlo", r.monte_carlo},
                        {"samples", r.samples}});
    j["rows"] = rows;
    return j;
}

nlohmann::json to_json(const BoundReport& rep) {
    nlohmann::json j;
    auto rows = nlohmann::json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"trial", r.trial},
                        {"seed", r.seed},
                        {"generator", to_string(r.generator)},
                        {"grid_size", r.grid_size},
                        {"p", r.p},
                        {"weak_quantity", r.weak_quantity},
                        {"strong_ratio", r.strong_ratio},
                        {"ladder_ratio", r.ladder_ratio}});
    auto scaling = nlohmann::json::array();
    for (const auto& s : rep.scaling)
        scaling.push_back({{"generator", to_string(s.generator)},
                           {"grid_size", s.grid_size},
                           {"p", s.p},
                           {"max_weak", s.max_weak},
                           {"median_weak", s.median_weak},
                           {"max_strong", s.max_strong},
                           {"median_strong", s.median_strong}});
    j["rows"] = rows;
    j["scaling"] = scaling;
    j["chebyshev_violations"] = rep.chebyshev_violations;
    return j;
}

void write_comparability_csv(std::ostream& os, int n, const ComparabilityReport& rep) {
    for (const auto& name : axis_names(n)) os << name << "_lo," << name << "_hi,";
    os << "exact_eta,monte_carlo,samples\n";
    for (const auto& r : rep.rows) {
        for (const auto& s : r.rectangle.sides()) os << s.lo << ',' << s.hi << ',';
        os << format_double(r.exact) << ',' << format_double(r.monte_carlo) << ',' << r.samples << '\n';
    }
}

void write_bound_csv(std::ostream& os, const BoundReport& rep) {
    os << "trial,seed,p,weak_quantity,strong_ratio,grid_size,generator\n";
    for (const auto& r : rep.rows)
        os << r.trial << ',' << r.seed << ',' << format_double(r.p) << ',' << format_double(r.weak_quantity) << ','
           << format_double(r.strong_ratio) << ',' << r.grid_size << ',' << to_string(r.generator) << '\n';
}

} // namespace hsmax::io
