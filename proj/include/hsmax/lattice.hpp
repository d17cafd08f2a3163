#pragma once

#include <compare>
#include <functional>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hsmax/errors.hpp"

namespace hsmax {

using Coord = std::int64_t;
using Index = Eigen::Index;
using Point = std::vector<Coord>;

/// Closed integer interval [lo, hi].
struct Interval {
    Coord lo = 0;
    Coord hi = 0;

    Coord length() const { return hi - lo + 1; }
    bool contains(Coord x) const { return lo <= x && x <= hi; }
    auto operator<=>(const Interval&) const = default;
};

/// Which side lengths a rectangle family admits.
enum class Family { full, dyadic };

/// Lattice geometry of R^n x R^n x R: axes 0..n-1 are u, n..2n-1 are v, 2n is t.
/// The 2n spatial axes are split into consecutive factors of sizes N_1..N_m;
/// rectangles are cubes within each factor times an arbitrary t-interval.
class GridSpec {
public:
    GridSpec(int n, std::vector<Interval> extents, std::vector<int> factors, Coord mu);

    /// [0, size-1] on every axis, one factor per spatial axis.
    static GridSpec cube(int n, Coord size, Coord mu = 1);

    int n() const { return n_; }
    int dim() const { return 2 * n_ + 1; }
    int spatial_dim() const { return 2 * n_; }
    int t_axis() const { return 2 * n_; }
    Coord mu() const { return mu_; }

    const std::vector<Interval>& extents() const { return extents_; }
    const Interval& extent(int axis) const { return extents_[axis]; }
    Coord length(int axis) const { return extents_[axis].length(); }
    Coord t_length() const { return length(t_axis()); }

    const std::vector<int>& factors() const { return factors_; }
    int factor_count() const { return static_cast<int>(factors_.size()); }
    /// First spatial axis of factor i.
    int factor_offset(int i) const { return factor_offsets_[i]; }

    Index cell_count() const { return cell_count_; }
    Index spatial_cell_count() const { return cell_count_ / t_length(); }

    bool contains(std::span<const Coord> point) const;
    /// Row-major index, t fastest. Point must be inside the extents.
    Index flat_index(std::span<const Coord> point) const;
    Point point_at(Index flat) const;
    /// Spatial row-major index of the first 2n coordinates.
    Index spatial_index(std::span<const Coord> point) const;

    GridSpec with_mu(Coord mu) const;

    bool operator==(const GridSpec&) const = default;

private:
    int n_;
    std::vector<Interval> extents_;
    std::vector<int> factors_;
    std::vector<int> factor_offsets_;
    Coord mu_;
    Index cell_count_ = 1;
};

/// Axis-parallel box with integer corners; sides are inclusive per-axis intervals.
class Rectangle {
public:
    Rectangle() = default;
    explicit Rectangle(std::vector<Interval> sides);

    /// Spatial cube for one factor: base corner and common side length.
    struct Cube {
        std::vector<Coord> corner;
        Coord side = 1;
    };
    static Rectangle from_cubes(const GridSpec& grid, std::span<const Cube> cubes, Interval t);

    int dim() const { return static_cast<int>(sides_.size()); }
    const std::vector<Interval>& sides() const { return sides_; }
    const Interval& side(int axis) const { return sides_[axis]; }
    Interval& side(int axis) { return sides_[axis]; }
    const Interval& t_interval() const { return sides_.back(); }

    Index volume() const;
    bool contains(std::span<const Coord> point) const;
    bool contains(const Rectangle& other) const;
    bool intersects(const Rectangle& other) const;
    std::optional<Rectangle> intersection(const Rectangle& other) const;
    bool within(const GridSpec& grid) const;
    /// Clip to the grid extents; nullopt when disjoint from the grid.
    std::optional<Rectangle> clipped(const GridSpec& grid) const;
    bool satisfies_cube_condition(const GridSpec& grid) const;

    std::string to_string() const;

    /// Lexicographic by (base corner, side lengths).
    std::strong_ordering operator<=>(const Rectangle& other) const;
    bool operator==(const Rectangle& other) const = default;

private:
    std::vector<Interval> sides_;
};

/// Visit every lattice point of r in row-major order (last axis fastest).
template <class Fn>
void for_each_cell(const Rectangle& r, Fn&& fn) {
    const int d = r.dim();
    Point p(d);
    for (int a = 0; a < d; ++a) p[a] = r.side(a).lo;
    while (true) {
        fn(std::as_const(p));
        int a = d - 1;
        while (a >= 0) {
            if (++p[a] <= r.side(a).hi) break;
            p[a] = r.side(a).lo;
            --a;
        }
        if (a < 0) return;
    }
}

/// Admissible side lengths s with 1 <= s <= max_side.
std::vector<Coord> admissible_sides(Coord max_side, Family family);

/// Stream every rectangle of the family inside the grid, optionally only those
/// containing a point. Order: lexicographic by (base corner, side lengths).
void for_each_rectangle(const GridSpec& grid, Family family, const std::optional<Point>& containing,
                        const std::function<void(const Rectangle&)>& fn);

std::vector<Rectangle> enumerate_rectangles(const GridSpec& grid, Family family = Family::full,
                                            const std::optional<Point>& containing = std::nullopt);

/// Number of rectangles in the family, without enumerating them.
std::uint64_t family_size(const GridSpec& grid, Family family);

/// Seeded engine for an independent stream; (seed, stream) pairs never collide.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Random family member inside the grid. Each slot draws its side uniformly from
/// the admissible sides not exceeding max(1, ceil(max_side_fraction * length)),
/// then its position uniformly.
Rectangle random_rectangle(const GridSpec& grid, Family family, std::mt19937_64& rng,
                           double max_side_fraction = 1.0);

/// Real values on lattice cells, zero outside the extents.
template <class Scalar>
class Field {
public:
    using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    explicit Field(GridSpec grid) : grid_(std::move(grid)), values_(Values::Zero(grid_.cell_count())) {}
    Field(GridSpec grid, Values values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.size() != grid_.cell_count())
            throw DomainError("Field: value count does not match grid");
    }

    const GridSpec& grid() const { return grid_; }
    const Values& values() const { return values_; }
    Values& values() { return values_; }

    Scalar operator[](Index i) const { return values_[i]; }
    Scalar& operator[](Index i) { return values_[i]; }

    /// Zero-extended sampling.
    Scalar at(std::span<const Coord> point) const {
        return grid_.contains(point) ? values_[grid_.flat_index(point)] : Scalar(0);
    }
    void set(std::span<const Coord> point, Scalar value) { values_[grid_.flat_index(point)] = value; }

private:
    GridSpec grid_;
    Values values_;
};

using ScalarField = Field<double>;

/// Cumulative sums of a field over the d-dimensional lattice plus per-column
/// cumulative sums along t. Both tables carry one leading zero per axis.
template <class Scalar>
class PrefixTable {
public:
    using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    explicit PrefixTable(const Field<Scalar>& field);

    const GridSpec& grid() const { return grid_; }

    /// Sum over the cells of r by 2^d-corner inclusion-exclusion.
    Scalar box_sum(const Rectangle& r) const;

    /// Sum of column `spatial` over t in [t_lo, t_hi]; cells outside the
    /// t-extent contribute zero.
    Scalar column_sum(Index spatial, Coord t_lo, Coord t_hi) const;

private:
    GridSpec grid_;
    std::vector<Index> strides_;
    Values cumulative_;
    Values columns_;
};

/// Strictly positive weight on the lattice, either t-independent (one value per
/// spatial cell) or general (one value per cell).
class WeightField {
public:
    static WeightField spatial(GridSpec grid, Eigen::ArrayXd values, std::string descriptor);
    static WeightField full(GridSpec grid, Eigen::ArrayXd values, std::string descriptor);

    const GridSpec& grid() const { return grid_; }
    bool t_independent() const { return t_independent_; }
    const std::string& descriptor() const { return descriptor_; }
    const Eigen::ArrayXd& values() const { return values_; }

    double at_cell(Index flat) const {
        return t_independent_ ? values_[flat / grid_.t_length()] : values_[flat];
    }
    double at(std::span<const Coord> point) const { return at_cell(grid_.flat_index(point)); }
    /// Only for t-independent weights.
    double spatial_at(Index spatial) const;

    /// Expanded to one value per lattice cell.
    ScalarField as_field() const;
    WeightField scaled(double c) const;

private:
    WeightField(GridSpec grid, bool t_independent, Eigen::ArrayXd values, std::string descriptor);

    GridSpec grid_;
    bool t_independent_;
    Eigen::ArrayXd values_;
    std::string descriptor_;
};

template <class Scalar>
Scalar box_sum(const PrefixTable<Scalar>& table, const Rectangle& r) {
    return table.box_sum(r);
}

Index lebesgue_volume(const Rectangle& r);
double weighted_volume(const WeightField& w, const Rectangle& r);

extern template class PrefixTable<double>;
extern template class PrefixTable<std::int64_t>;

} // namespace hsmax
