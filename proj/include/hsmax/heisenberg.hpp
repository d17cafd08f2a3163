#pragma once

#include <string>
#include <vector>

#include "hsmax/lattice.hpp"

namespace hsmax {

/// Lattice point (u, v, t) of the Heisenberg group.
struct GroupPoint {
    std::vector<Coord> u;
    std::vector<Coord> v;
    Coord t = 0;

    static GroupPoint identity(int n) { return {std::vector<Coord>(n, 0), std::vector<Coord>(n, 0), 0}; }
    /// Split a (u, v, t) coordinate vector of length 2n+1.
    static GroupPoint from_coords(std::span<const Coord> coords);

    int n() const { return static_cast<int>(u.size()); }
    GroupPoint inverse() const;
    Point coords() const;

    bool operator==(const GroupPoint&) const = default;
};

/// (u, v, t) * (xi, eta, tau) = (u + xi, v + eta, t + tau + mu (u.eta - v.xi)).
/// Throws std::overflow_error if any coordinate leaves the 64-bit range.
GroupPoint group_multiply(const GroupPoint& p, const GroupPoint& q, Coord mu);

/// Sign convention of the t-shift applied when sampling f.
enum class ShiftConvention {
    standard,  ///< mu (u.eta - v.xi)
    alternate, ///< mu (u.xi - v.eta)
};

/// mu (u.eta - v.xi).
Coord twisted_shift(std::span<const Coord> u, std::span<const Coord> v, std::span<const Coord> xi,
                    std::span<const Coord> eta, Coord mu);
Coord twisted_shift(std::span<const Coord> u, std::span<const Coord> v, std::span<const Coord> xi,
                    std::span<const Coord> eta, Coord mu, ShiftConvention convention);

struct MaximalOptions {
    Family family = Family::full;
    ShiftConvention shift = ShiftConvention::standard;
    /// Threads for maximal_field; results do not depend on it.
    int workers = 1;
};

/// sup over rectangles R containing the origin of vol(R)^{-1} sum_{y in R} |f(x * y^{-1})|.
/// The family is the reflection x - R' of the grid family at x, i.e. R ranges
/// over family rectangles containing the origin that lie inside x - extents.
double maximal_group_form(const ScalarField& f, const GroupPoint& x, Family family = Family::full);

/// Twisted, weighted average over one rectangle containing x:
/// vol_w(R)^{-1} sum_{(xi,eta,tau) in R} |f(xi, eta, tau + shift)| w(xi, eta).
double twisted_average(const ScalarField& f, const WeightField& w, const GroupPoint& x, const Rectangle& r,
                       ShiftConvention shift = ShiftConvention::standard);

struct PointMaximum {
    double value = 0.0;
    Rectangle argmax; ///< first maximiser in enumeration order
};

/// Weighted twisted maximal function at one point, by enumerating the family of
/// rectangles containing x. Inner t-sums use per-column prefix tables.
PointMaximum maximal_twisted_form(const ScalarField& f, const WeightField& w, const GroupPoint& x,
                                  const MaximalOptions& options = {});

struct MaximalField {
    ScalarField values;
    Family family = Family::full;
    std::string weight;

    const GridSpec& grid() const { return values.grid(); }
};

/// M_w f at every lattice point. Per spatial point the shifted, weighted field is
/// tabulated once; t-intervals are then resolved by a superset-maximum sweep.
MaximalField maximal_field(const ScalarField& f, const WeightField& w, const MaximalOptions& options = {});

/// Flat indices of { x : mf(x) > lambda }, ascending.
std::vector<Index> level_set(const MaximalField& mf, double lambda);

} // namespace hsmax
