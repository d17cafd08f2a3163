#include "hsmax/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

namespace hsmax {

GridSpec::GridSpec(int n, std::vector<Interval> extents, std::vector<int> factors, Coord mu)
    : n_(n), extents_(std::move(extents)), factors_(std::move(factors)), mu_(mu) {
    if (n_ < 1) throw DomainError("GridSpec: n must be positive");
    if (static_cast<int>(extents_.size()) != dim())
        throw DomainError("GridSpec: expected " + std::to_string(dim()) + " extents");
    for (const auto& e : extents_)
        if (e.lo > e.hi) throw DomainError("GridSpec: extent with lo > hi");
    if (factors_.empty()) factors_.assign(spatial_dim(), 1);
    int sum = 0;
    for (int f : factors_) {
        if (f < 1) throw DomainError("GridSpec: factor sizes must be positive");
        factor_offsets_.push_back(sum);
        sum += f;
    }
    if (sum != spatial_dim()) throw DomainError("GridSpec: factor sizes must sum to 2n");
    for (const auto& e : extents_) cell_count_ *= e.length();
}

GridSpec GridSpec::cube(int n, Coord size, Coord mu) {
    if (size < 1) throw DomainError("GridSpec::cube: size must be positive");
    return GridSpec(n, std::vector<Interval>(2 * n + 1, Interval{0, size - 1}), {}, mu);
}

bool GridSpec::contains(std::span<const Coord> point) const {
    if (static_cast<int>(point.size()) != dim()) return false;
    for (int a = 0; a < dim(); ++a)
        if (!extents_[a].contains(point[a])) return false;
    return true;
}

Index GridSpec::flat_index(std::span<const Coord> point) const {
    Index idx = 0;
    for (int a = 0; a < dim(); ++a) idx = idx * length(a) + (point[a] - extents_[a].lo);
    return idx;
}

Point GridSpec::point_at(Index flat) const {
    Point p(dim());
    for (int a = dim() - 1; a >= 0; --a) {
        p[a] = extents_[a].lo + flat % length(a);
        flat /= length(a);
    }
    return p;
}

Index GridSpec::spatial_index(std::span<const Coord> point) const {
    Index idx = 0;
    for (int a = 0; a < spatial_dim(); ++a) idx = idx * length(a) + (point[a] - extents_[a].lo);
    return idx;
}

GridSpec GridSpec::with_mu(Coord mu) const {
    GridSpec g = *this;
    g.mu_ = mu;
    return g;
}

Rectangle::Rectangle(std::vector<Interval> sides) : sides_(std::move(sides)) {
    for (const auto& s : sides_)
        if (s.lo > s.hi) throw DomainError("Rectangle: empty side");
}

Rectangle Rectangle::from_cubes(const GridSpec& grid, std::span<const Cube> cubes, Interval t) {
    if (static_cast<int>(cubes.size()) != grid.factor_count())
        throw DomainError("Rectangle::from_cubes: one cube per factor required");
    std::vector<Interval> sides(grid.dim());
    for (int i = 0; i < grid.factor_count(); ++i) {
        const auto& q = cubes[i];
        if (static_cast<int>(q.corner.size()) != grid.factors()[i] || q.side < 1)
            throw DomainError("Rectangle::from_cubes: malformed cube");
        for (int k = 0; k < grid.factors()[i]; ++k)
            sides[grid.factor_offset(i) + k] = {q.corner[k], q.corner[k] + q.side - 1};
    }
    sides[grid.t_axis()] = t;
    return Rectangle(std::move(sides));
}

Index Rectangle::volume() const {
    Index v = 1;
    for (const auto& s : sides_) v *= s.length();
    return v;
}

bool Rectangle::contains(std::span<const Coord> point) const {
    if (point.size() != sides_.size()) return false;
    for (std::size_t a = 0; a < sides_.size(); ++a)
        if (!sides_[a].contains(point[a])) return false;
    return true;
}

bool Rectangle::contains(const Rectangle& other) const {
    for (std::size_t a = 0; a < sides_.size(); ++a)
        if (other.sides_[a].lo < sides_[a].lo || other.sides_[a].hi > sides_[a].hi) return false;
    return true;
}

bool Rectangle::intersects(const Rectangle& other) const {
    for (std::size_t a = 0; a < sides_.size(); ++a)
        if (other.sides_[a].hi < sides_[a].lo || sides_[a].hi < other.sides_[a].lo) return false;
    return true;
}

std::optional<Rectangle> Rectangle::intersection(const Rectangle& other) const {
    if (!intersects(other)) return std::nullopt;
    std::vector<Interval> s(sides_.size());
    for (std::size_t a = 0; a < sides_.size(); ++a)
        s[a] = {std::max(sides_[a].lo, other.sides_[a].lo), std::min(sides_[a].hi, other.sides_[a].hi)};
    return Rectangle(std::move(s));
}

bool Rectangle::within(const GridSpec& grid) const {
    if (dim() != grid.dim()) return false;
    for (int a = 0; a < dim(); ++a)
        if (sides_[a].lo < grid.extent(a).lo || sides_[a].hi > grid.extent(a).hi) return false;
    return true;
}

std::optional<Rectangle> Rectangle::clipped(const GridSpec& grid) const {
    return intersection(Rectangle(grid.extents()));
}

bool Rectangle::satisfies_cube_condition(const GridSpec& grid) const {
    for (int i = 0; i < grid.factor_count(); ++i) {
        const int off = grid.factor_offset(i);
        for (int k = 1; k < grid.factors()[i]; ++k)
            if (sides_[off + k].length() != sides_[off].length()) return false;
    }
    return true;
}

std::string Rectangle::to_string() const {
    std::ostringstream os;
    for (std::size_t a = 0; a < sides_.size(); ++a)
        os << (a ? "x" : "") << '[' << sides_[a].lo << ',' << sides_[a].hi << ']';
    return os.str();
}

std::strong_ordering Rectangle::operator<=>(const Rectangle& other) const {
    const std::size_t d = std::min(sides_.size(), other.sides_.size());
    for (std::size_t a = 0; a < d; ++a)
        if (auto c = sides_[a].lo <=> other.sides_[a].lo; c != 0) return c;
    for (std::size_t a = 0; a < d; ++a)
        if (auto c = sides_[a].length() <=> other.sides_[a].length(); c != 0) return c;
    return sides_.size() <=> other.sides_.size();
}

std::vector<Coord> admissible_sides(Coord max_side, Family family) {
    std::vector<Coord> out;
    if (family == Family::full) {
        for (Coord s = 1; s <= max_side; ++s) out.push_back(s);
    } else {
        for (Coord s = 1; s <= max_side; s *= 2) out.push_back(s);
    }
    return out;
}

void for_each_rectangle(const GridSpec& grid, Family family, const std::optional<Point>& containing,
                        const std::function<void(const Rectangle&)>& fn) {
    if (containing && !grid.contains(*containing))
        throw DomainError("enumerate_rectangles: point outside grid extents");
    const int d = grid.dim();
    const int m = grid.factor_count();
    const Point* x = containing ? &*containing : nullptr;

    // Corner range per axis.
    std::vector<Interval> corner_range(d);
    for (int a = 0; a < d; ++a)
        corner_range[a] = {grid.extent(a).lo, x ? (*x)[a] : grid.extent(a).hi};

    Point corner(d);
    for (int a = 0; a < d; ++a) corner[a] = corner_range[a].lo;

    // Side choices per slot (factor 0..m-1, then t).
    std::vector<std::vector<Coord>> choices(m + 1);
    std::vector<std::size_t> pick(m + 1);
    std::vector<Interval> sides(d);

    auto slot_bounds = [&](int first_axis, int count) {
        Coord need = 1, room = std::numeric_limits<Coord>::max();
        for (int k = 0; k < count; ++k) {
            const int a = first_axis + k;
            if (x) need = std::max(need, (*x)[a] - corner[a] + 1);
            room = std::min(room, grid.extent(a).hi - corner[a] + 1);
        }
        return std::pair{need, room};
    };

    while (true) {
        bool any_empty = false;
        for (int i = 0; i <= m; ++i) {
            const int first = i < m ? grid.factor_offset(i) : grid.t_axis();
            const int count = i < m ? grid.factors()[i] : 1;
            auto [need, room] = slot_bounds(first, count);
            choices[i].clear();
            for (Coord s : admissible_sides(room, family))
                if (s >= need) choices[i].push_back(s);
            if (choices[i].empty()) any_empty = true;
            pick[i] = 0;
        }
        if (!any_empty) {
            while (true) {
                for (int i = 0; i <= m; ++i) {
                    const int first = i < m ? grid.factor_offset(i) : grid.t_axis();
                    const int count = i < m ? grid.factors()[i] : 1;
                    for (int k = 0; k < count; ++k)
                        sides[first + k] = {corner[first + k], corner[first + k] + choices[i][pick[i]] - 1};
                }
                fn(Rectangle(sides));
                int i = m;
                while (i >= 0) {
                    if (++pick[i] < choices[i].size()) break;
                    pick[i] = 0;
                    --i;
                }
                if (i < 0) break;
            }
        }
        int a = d - 1;
        while (a >= 0) {
            if (++corner[a] <= corner_range[a].hi) break;
            corner[a] = corner_range[a].lo;
            --a;
        }
        if (a < 0) return;
    }
}

std::vector<Rectangle> enumerate_rectangles(const GridSpec& grid, Family family,
                                            const std::optional<Point>& containing) {
    std::vector<Rectangle> out;
    for_each_rectangle(grid, family, containing, [&](const Rectangle& r) { out.push_back(r); });
    return out;
}

std::uint64_t family_size(const GridSpec& grid, Family family) {
    std::uint64_t total = 1;
    for (int i = 0; i <= grid.factor_count(); ++i) {
        const int first = i < grid.factor_count() ? grid.factor_offset(i) : grid.t_axis();
        const int count = i < grid.factor_count() ? grid.factors()[i] : 1;
        Coord longest = 0;
        for (int k = 0; k < count; ++k) longest = std::max(longest, grid.length(first + k));
        std::uint64_t slot = 0;
        for (Coord s : admissible_sides(longest, family)) {
            std::uint64_t placements = 1;
            for (int k = 0; k < count; ++k)
                placements *= static_cast<std::uint64_t>(std::max<Coord>(0, grid.length(first + k) - s + 1));
            slot += placements;
        }
        total *= slot;
    }
    return total;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

Rectangle random_rectangle(const GridSpec& grid, Family family, std::mt19937_64& rng,
                           double max_side_fraction) {
    std::vector<Interval> sides(grid.dim());
    for (int i = 0; i <= grid.factor_count(); ++i) {
        const int first = i < grid.factor_count() ? grid.factor_offset(i) : grid.t_axis();
        const int count = i < grid.factor_count() ? grid.factors()[i] : 1;
        Coord shortest = std::numeric_limits<Coord>::max();
        for (int k = 0; k < count; ++k) shortest = std::min(shortest, grid.length(first + k));
        const Coord cap = std::clamp<Coord>(
            static_cast<Coord>(std::ceil(max_side_fraction * static_cast<double>(shortest))), 1, shortest);
        const auto options = admissible_sides(cap, family);
        const Coord s = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
        for (int k = 0; k < count; ++k) {
            const Interval& e = grid.extent(first + k);
            const Coord lo = std::uniform_int_distribution<Coord>(e.lo, e.hi - s + 1)(rng);
            sides[first + k] = {lo, lo + s - 1};
        }
    }
    return Rectangle(std::move(sides));
}

template <class Scalar>
PrefixTable<Scalar>::PrefixTable(const Field<Scalar>& field) : grid_(field.grid()) {
    const int d = grid_.dim();
    strides_.assign(d, 1);
    for (int a = d - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * (grid_.length(a + 1) + 1);
    const Index padded = strides_[0] * (grid_.length(0) + 1);
    cumulative_ = Values::Zero(padded);

    for (Index i = 0; i < grid_.cell_count(); ++i) {
        Index rem = i, idx = 0;
        for (int a = d - 1; a >= 0; --a) {
            idx += (rem % grid_.length(a) + 1) * strides_[a];
            rem /= grid_.length(a);
        }
        cumulative_[idx] = field[i];
    }
    for (int a = 0; a < d; ++a) {
        const Index period = strides_[a] * (grid_.length(a) + 1);
        for (Index idx = 0; idx < padded; ++idx)
            if ((idx % period) >= strides_[a]) cumulative_[idx] += cumulative_[idx - strides_[a]];
    }

    const Index lt = grid_.t_length();
    const Index columns = grid_.spatial_cell_count();
    columns_ = Values::Zero(columns * (lt + 1));
    for (Index c = 0; c < columns; ++c)
        for (Index k = 0; k < lt; ++k)
            columns_[c * (lt + 1) + k + 1] = columns_[c * (lt + 1) + k] + field[c * lt + k];
}

template <class Scalar>
Scalar PrefixTable<Scalar>::box_sum(const Rectangle& r) const {
    if (!r.within(grid_)) throw DomainError("box_sum: rectangle exceeds grid extents");
    const int d = grid_.dim();
    Scalar total = 0;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        Index idx = 0;
        for (int a = 0; a < d; ++a) {
            const Coord off = (mask >> a) & 1u ? r.side(a).hi - grid_.extent(a).lo + 1
                                                : r.side(a).lo - grid_.extent(a).lo;
            idx += off * strides_[a];
        }
        const bool negative = (d - std::popcount(mask)) % 2 != 0;
        total += negative ? -cumulative_[idx] : cumulative_[idx];
    }
    return total;
}

template <class Scalar>
Scalar PrefixTable<Scalar>::column_sum(Index spatial, Coord t_lo, Coord t_hi) const {
    const Interval& e = grid_.extent(grid_.t_axis());
    t_lo = std::max(t_lo, e.lo);
    t_hi = std::min(t_hi, e.hi);
    if (t_lo > t_hi) return Scalar(0);
    const Index base = spatial * (grid_.t_length() + 1);
    return columns_[base + (t_hi - e.lo + 1)] - columns_[base + (t_lo - e.lo)];
}

template class PrefixTable<double>;
template class PrefixTable<std::int64_t>;

WeightField::WeightField(GridSpec grid, bool t_independent, Eigen::ArrayXd values, std::string descriptor)
    : grid_(std::move(grid)), t_independent_(t_independent), values_(std::move(values)),
      descriptor_(std::move(descriptor)) {
    const Index expected = t_independent_ ? grid_.spatial_cell_count() : grid_.cell_count();
    if (values_.size() != expected) throw DomainError("WeightField: value count does not match grid");
    for (Index i = 0; i < values_.size(); ++i)
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i]))
            throw InvariantViolation("WeightField: weight must be finite and strictly positive");
}

WeightField WeightField::spatial(GridSpec grid, Eigen::ArrayXd values, std::string descriptor) {
    return WeightField(std::move(grid), true, std::move(values), std::move(descriptor));
}

WeightField WeightField::full(GridSpec grid, Eigen::ArrayXd values, std::string descriptor) {
    return WeightField(std::move(grid), false, std::move(values), std::move(descriptor));
}

double WeightField::spatial_at(Index spatial) const {
    if (!t_independent_) throw DomainError("WeightField: spatial_at on a t-dependent weight");
    return values_[spatial];
}

ScalarField WeightField::as_field() const {
    if (!t_independent_) return ScalarField(grid_, values_);
    return ScalarField(grid_, values_.replicate(1, grid_.t_length()).transpose().reshaped());
}

WeightField WeightField::scaled(double c) const {
    return WeightField(grid_, t_independent_, values_ * c, descriptor_ + "*" + std::to_string(c));
}

Index lebesgue_volume(const Rectangle& r) { return r.volume(); }

double weighted_volume(const WeightField& w, const Rectangle& r) {
    if (!r.within(w.grid())) throw DomainError("weighted_volume: rectangle exceeds grid extents");
    double total = 0.0;
    for_each_cell(r, [&](const Point& p) {
        const double v = w.at(p);
        if (!(v > 0.0)) throw InvariantViolation("weighted_volume: non-positive weight");
        total += v;
    });
    return total;
}

} // namespace hsmax
