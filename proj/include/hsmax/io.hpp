#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hsmax/covering.hpp"
#include "hsmax/harness.hpp"
#include "hsmax/weights.hpp"

namespace hsmax::io {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// CSV columns u1..un, v1..vn, t, value; one row per cell in row-major order.
void write_field_csv(std::ostream& os, const ScalarField& f);
/// Rows may appear in any order; absent cells are zero. With no grid given the
/// grid is the bounding box of the rows, with the supplied mu.
ScalarField read_field_csv(std::istream& is, const std::optional<GridSpec>& grid, Coord mu = 1);

/// Little-endian int64 d, d pairs of int64 (lo, hi), then row-major float64 values.
void write_field_binary(std::ostream& os, const ScalarField& f);
ScalarField read_field_binary(std::istream& is, Coord mu = 1);

/// Columns <axis>_lo, <axis>_hi per axis (u1..un, v1..vn, t).
void write_rectangles_csv(std::ostream& os, int n, std::span<const Rectangle> rects);
std::vector<Rectangle> read_rectangles_csv(std::istream& is);

std::vector<std::string> axis_names(int n);

/// Columns index, chosen, witness_M, overlap_fraction.
void write_selection_csv(std::ostream& os, const Selection& selection);

nlohmann::json to_json(const Rectangle& r);
nlohmann::json to_json(const CoveringReport& report);
nlohmann::json to_json(const ComparabilityReport& report);
nlohmann::json to_json(const BoundReport& report);

void write_comparability_csv(std::ostream& os, int n, const ComparabilityReport& report);
/// Columns trial, seed, p, weak_quantity, strong_ratio, grid_size, generator.
void write_bound_csv(std::ostream& os, const BoundReport& report);

} // namespace hsmax::io
