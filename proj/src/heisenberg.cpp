#include "hsmax/heisenberg.hpp"

#include <algorithm>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

namespace hsmax {

namespace {

Coord checked_add(Coord a, Coord b) {
    Coord r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Heisenberg coordinate overflow");
    return r;
}

Coord checked_mul(Coord a, Coord b) {
    Coord r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Heisenberg coordinate overflow");
    return r;
}

Coord checked_dot(std::span<const Coord> a, std::span<const Coord> b) {
    Coord s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s = checked_add(s, checked_mul(a[i], b[i]));
    return s;
}

void require_compatible(const ScalarField& f, const WeightField& w) {
    if (!(f.grid() == w.grid())) throw DomainError("field and weight live on different grids");
    if (!w.t_independent()) throw DomainError("the maximal operator needs a t-independent weight");
}

// Sum of |f(xi, eta, tau + shift)| w(xi, eta) over r, and vol_w(r).
std::pair<double, double> twisted_sums(const PrefixTable<double>& abs_table, const WeightField& w,
                                       const GroupPoint& x, const Rectangle& r, ShiftConvention shift) {
    const GridSpec& g = w.grid();
    const int n = g.n();
    // Visit each spatial column once: collapse t to a single cell.
    std::vector<Interval> spatial(r.sides().begin(), r.sides().end() - 1);
    const Coord t0 = g.extent(g.t_axis()).lo;
    spatial.push_back({t0, t0});
    const Rectangle columns(std::move(spatial));
    const Interval ti = r.t_interval();

    double num = 0.0, den = 0.0;
    for_each_cell(columns, [&](const Point& p) {
        std::span<const Coord> xi(p.data(), n), eta(p.data() + n, n);
        const Coord s = twisted_shift(x.u, x.v, xi, eta, g.mu(), shift);
        const Index col = g.spatial_index(p);
        const double wv = w.spatial_at(col);
        num += abs_table.column_sum(col, checked_add(ti.lo, s), checked_add(ti.hi, s)) * wv;
        den += wv;
    });
    return {num, den * static_cast<double>(ti.length())};
}

PrefixTable<double> abs_prefix(const ScalarField& f) {
    return PrefixTable<double>(ScalarField(f.grid(), f.values().abs()));
}

} // namespace

GroupPoint GroupPoint::from_coords(std::span<const Coord> coords) {
    if (coords.size() % 2 != 1 || coords.size() < 3) throw DomainError("GroupPoint: need 2n+1 coordinates");
    const std::size_t n = coords.size() / 2;
    return {{coords.begin(), coords.begin() + n}, {coords.begin() + n, coords.begin() + 2 * n}, coords.back()};
}

GroupPoint GroupPoint::inverse() const {
    GroupPoint r = *this;
    for (auto& c : r.u) c = -c;
    for (auto& c : r.v) c = -c;
    r.t = -r.t;
    return r;
}

Point GroupPoint::coords() const {
    Point p(u);
    p.insert(p.end(), v.begin(), v.end());
    p.push_back(t);
    return p;
}

GroupPoint group_multiply(const GroupPoint& p, const GroupPoint& q, Coord mu) {
    if (p.n() != q.n() || p.v.size() != q.v.size()) throw DomainError("group_multiply: dimension mismatch");
    GroupPoint r;
    r.u.resize(p.u.size());
    r.v.resize(p.v.size());
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        r.u[i] = checked_add(p.u[i], q.u[i]);
        r.v[i] = checked_add(p.v[i], q.v[i]);
    }
    const Coord cross = checked_add(checked_dot(p.u, q.v), -checked_dot(p.v, q.u));
    r.t = checked_add(checked_add(p.t, q.t), checked_mul(mu, cross));
    return r;
}

Coord twisted_shift(std::span<const Coord> u, std::span<const Coord> v, std::span<const Coord> xi,
                    std::span<const Coord> eta, Coord mu) {
    return twisted_shift(u, v, xi, eta, mu, ShiftConvention::standard);
}

Coord twisted_shift(std::span<const Coord> u, std::span<const Coord> v, std::span<const Coord> xi,
                    std::span<const Coord> eta, Coord mu, ShiftConvention convention) {
    if (mu == 0) return 0;
    const Coord cross = convention == ShiftConvention::standard
                            ? checked_add(checked_dot(u, eta), -checked_dot(v, xi))
                            : checked_add(checked_dot(u, xi), -checked_dot(v, eta));
    return checked_mul(mu, cross);
}

double maximal_group_form(const ScalarField& f, const GroupPoint& x, Family family) {
    const GridSpec& g = f.grid();
    const Point xc = x.coords();
    if (!g.contains(xc)) throw DomainError("maximal_group_form: point outside grid extents");

    // R contains the origin and x - R fits the grid, i.e. R lies in x - extents.
    std::vector<Interval> reflected(g.dim());
    for (int a = 0; a < g.dim(); ++a) reflected[a] = {xc[a] - g.extent(a).hi, xc[a] - g.extent(a).lo};
    const GridSpec pulled(g.n(), std::move(reflected), g.factors(), g.mu());

    bool any = false;
    double best = 0.0;
    for_each_rectangle(pulled, family, Point(g.dim(), 0), [&](const Rectangle& r) {
        double sum = 0.0;
        for_each_cell(r, [&](const Point& y) {
            const GroupPoint sample = group_multiply(x, GroupPoint::from_coords(y).inverse(), g.mu());
            sum += std::abs(f.at(sample.coords()));
        });
        const double avg = sum / static_cast<double>(r.volume());
        if (!any || avg > best) best = avg;
        any = true;
    });
    if (!any) throw DomainError("maximal_group_form: empty rectangle family");
    return best;
}

double twisted_average(const ScalarField& f, const WeightField& w, const GroupPoint& x, const Rectangle& r,
                       ShiftConvention shift) {
    require_compatible(f, w);
    if (!r.within(f.grid())) throw DomainError("twisted_average: rectangle exceeds grid extents");
    if (!r.contains(x.coords())) throw DomainError("twisted_average: rectangle does not contain the point");
    auto [num, den] = twisted_sums(abs_prefix(f), w, x, r, shift);
    return num / den;
}

PointMaximum maximal_twisted_form(const ScalarField& f, const WeightField& w, const GroupPoint& x,
                                  const MaximalOptions& options) {
    require_compatible(f, w);
    const Point xc = x.coords();
    const auto table = abs_prefix(f);
    PointMaximum best;
    bool any = false;
    for_each_rectangle(f.grid(), options.family, xc, [&](const Rectangle& r) {
        auto [num, den] = twisted_sums(table, w, x, r, options.shift);
        const double avg = num / den;
        if (!any || avg > best.value) best = {avg, r};
        any = true;
    });
    if (!any) throw DomainError("maximal_twisted_form: empty rectangle family");
    return best;
}

namespace {

struct CubeChoice {
    std::vector<Coord> lo; // relative to extent lo, one per factor axis
    Coord side;
};

// Cubes of factor i that contain the spatial point (relative coordinates).
std::vector<CubeChoice> cubes_containing(const GridSpec& g, int i, std::span<const Coord> rel, Family family) {
    const int off = g.factor_offset(i);
    const int count = g.factors()[i];
    Coord shortest = std::numeric_limits<Coord>::max();
    for (int k = 0; k < count; ++k) shortest = std::min(shortest, g.length(off + k));
    std::vector<CubeChoice> out;
    for (Coord s : admissible_sides(shortest, family)) {
        // Corner ranges per axis: lo in [max(0, x - s + 1), min(x, L - s)].
        std::vector<Coord> first(count), last(count);
        bool empty = false;
        for (int k = 0; k < count; ++k) {
            first[k] = std::max<Coord>(0, rel[off + k] - s + 1);
            last[k] = std::min<Coord>(rel[off + k], g.length(off + k) - s);
            if (first[k] > last[k]) empty = true;
        }
        if (empty) continue;
        std::vector<Coord> lo = first;
        while (true) {
            out.push_back({lo, s});
            int k = count - 1;
            while (k >= 0) {
                if (++lo[k] <= last[k]) break;
                lo[k] = first[k];
                --k;
            }
            if (k < 0) break;
        }
    }
    return out;
}

class FieldEvaluator {
public:
    FieldEvaluator(const ScalarField& f, const WeightField& w, const MaximalOptions& options)
        : g_(f.grid()), w_(w), options_(options), abs_(f.values().abs()) {
        const int s = g_.spatial_dim();
        lt_ = g_.t_length();
        stride_.assign(s, 1);
        for (int a = s - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * (g_.length(a + 1) + 1);
        padded_ = stride_[0] * (g_.length(0) + 1);

        cell_padded_.resize(g_.spatial_cell_count());
        for (Index c = 0; c < g_.spatial_cell_count(); ++c) {
            Index rem = c, idx = 0;
            for (int a = s - 1; a >= 0; --a) {
                idx += (rem % g_.length(a) + 1) * stride_[a];
                rem /= g_.length(a);
            }
            cell_padded_[c] = idx;
        }
        weight_prefix_ = Eigen::ArrayXd::Zero(padded_);
        for (Index c = 0; c < g_.spatial_cell_count(); ++c) weight_prefix_[cell_padded_[c]] = w.spatial_at(c);
        accumulate(weight_prefix_.data(), 1);

        if (options_.family == Family::dyadic)
            for (Coord len : admissible_sides(lt_, Family::dyadic)) dyadic_lengths_.push_back(len);
    }

    void run(Index spatial_begin, Index spatial_end, double* out) const {
        const int s = g_.spatial_dim();
        const int n = g_.n();
        Eigen::ArrayXd table(padded_ * lt_);
        Eigen::ArrayXd column(lt_), cumulative(lt_ + 1), best(lt_);
        Eigen::ArrayXd superset(options_.family == Family::full ? 2 * lt_ : 0);
        Point x(g_.dim()), rel(s), xi_eta(s);
        std::vector<std::vector<CubeChoice>> cubes(g_.factor_count());
        std::vector<std::size_t> pick(g_.factor_count());
        std::vector<Coord> lo(s), hi(s);
        std::vector<Index> steps;

        for (Index sp = spatial_begin; sp < spatial_end; ++sp) {
            const Point p = g_.point_at(sp * lt_);
            for (int a = 0; a < s; ++a) rel[a] = p[a] - g_.extent(a).lo;
            std::span<const Coord> u(p.data(), n), v(p.data() + n, n);

            fill_shifted(u, v, table, xi_eta);
            accumulate(table.data(), lt_);

            for (int i = 0; i < g_.factor_count(); ++i) {
                cubes[i] = cubes_containing(g_, i, rel, options_.family);
                pick[i] = 0;
            }
            best.setZero();
            while (true) {
                for (int i = 0; i < g_.factor_count(); ++i) {
                    const auto& q = cubes[i][pick[i]];
                    for (int k = 0; k < g_.factors()[i]; ++k) {
                        lo[g_.factor_offset(i) + k] = q.lo[k];
                        hi[g_.factor_offset(i) + k] = q.lo[k] + q.side - 1;
                    }
                }
                resolve_box(table, lo, hi, column, cumulative, superset, best, steps);
                int i = g_.factor_count() - 1;
                while (i >= 0) {
                    if (++pick[i] < cubes[i].size()) break;
                    pick[i] = 0;
                    --i;
                }
                if (i < 0) break;
            }
            std::copy(best.data(), best.data() + lt_, out + sp * lt_);
        }
    }

private:
    // table[(padded spatial cell) * lt + k] = w(xi, eta) |f(xi, eta, t_k + shift)|.
    void fill_shifted(std::span<const Coord> u, std::span<const Coord> v, Eigen::ArrayXd& table,
                      Point& xi_eta) const {
        const int s = g_.spatial_dim();
        const int n = g_.n();
        table.setZero();
        for (Index c = 0; c < g_.spatial_cell_count(); ++c) {
            Index rem = c;
            for (int a = s - 1; a >= 0; --a) {
                xi_eta[a] = g_.extent(a).lo + rem % g_.length(a);
                rem /= g_.length(a);
            }
            const Coord shift = twisted_shift(u, v, std::span<const Coord>(xi_eta.data(), n),
                                              std::span<const Coord>(xi_eta.data() + n, n), g_.mu(),
                                              options_.shift);
            const double wv = w_.spatial_at(c);
            double* dst = table.data() + cell_padded_[c] * lt_;
            const double* src = abs_.data() + c * lt_;
            const Index k0 = std::clamp<Index>(-shift, 0, lt_);
            const Index k1 = std::clamp<Index>(lt_ - shift, 0, lt_);
            for (Index k = k0; k < k1; ++k) dst[k] = wv * src[k + shift];
        }
    }

    // In-place cumulative sums over the padded spatial axes; each entry is a block of `block` values.
    void accumulate(double* data, Index block) const {
        for (int a = 0; a < g_.spatial_dim(); ++a) {
            const Index period = stride_[a] * (g_.length(a) + 1);
            for (Index idx = 0; idx < padded_; ++idx) {
                if (idx % period < stride_[a]) continue;
                double* dst = data + idx * block;
                const double* src = data + (idx - stride_[a]) * block;
                for (Index k = 0; k < block; ++k) dst[k] += src[k];
            }
        }
    }

    void resolve_box(const Eigen::ArrayXd& table, const std::vector<Coord>& lo, const std::vector<Coord>& hi,
                     Eigen::ArrayXd& column, Eigen::ArrayXd& cumulative, Eigen::ArrayXd& superset,
                     Eigen::ArrayXd& best, std::vector<Index>& steps) const {
        const int s = g_.spatial_dim();
        column.setZero();
        double weight = 0.0;
        for (unsigned mask = 0; mask < (1u << s); ++mask) {
            Index idx = 0;
            int lows = 0;
            for (int a = 0; a < s; ++a) {
                if ((mask >> a) & 1u) {
                    idx += (hi[a] + 1) * stride_[a];
                } else {
                    idx += lo[a] * stride_[a];
                    ++lows;
                }
            }
            const double* src = table.data() + idx * lt_;
            if (lows % 2) {
                for (Index k = 0; k < lt_; ++k) column[k] -= src[k];
                weight -= weight_prefix_[idx];
            } else {
                for (Index k = 0; k < lt_; ++k) column[k] += src[k];
                weight += weight_prefix_[idx];
            }
        }
        cumulative[0] = 0.0;
        for (Index k = 0; k < lt_; ++k) cumulative[k + 1] = cumulative[k] + column[k];

        if (options_.family == Family::full) {
            // No interval average exceeds the largest column entry over W; skip the box
            // unless that bound beats the current maximum somewhere. The margin covers
            // rounding in the cumulative differences.
            const double bound = column.maxCoeff() / weight * (1.0 + 1e-12);
            Index t_first = lt_, t_last = -1;
            for (Index t = 0; t < lt_; ++t)
                if (best[t] < bound) {
                    t_first = std::min(t_first, t);
                    t_last = t;
                }
            if (t_last < 0) return;

            // Trimming an end cell whose cumulative step is zero leaves the numerator bit-identical
            // and shrinks the denominator, so optimal ends lie on steps or at t itself.
            steps.clear();
            for (Index k = 0; k < lt_; ++k)
                if (cumulative[k + 1] != cumulative[k]) steps.push_back(k);
            const Index kk = static_cast<Index>(steps.size()) + 1;
            if (kk * kk <= lt_) {
                const auto average = [&](Index a, Index b) {
                    return (cumulative[b + 1] - cumulative[a]) / (weight * static_cast<double>(b - a + 1));
                };
                for (Index t = t_first; t <= t_last; ++t) {
                    double v = average(t, t);
                    for (Index a : steps) {
                        if (a > t) break;
                        v = std::max(v, average(a, t));
                        for (auto it = steps.rbegin(); it != steps.rend() && *it >= t; ++it)
                            v = std::max(v, average(a, *it));
                    }
                    for (auto it = steps.rbegin(); it != steps.rend() && *it >= t; ++it)
                        v = std::max(v, average(t, *it));
                    best[t] = std::max(best[t], v);
                }
                return;
            }

            // run[b] = max over a' <= a and b' >= b of the average over [a', b'].
            double* run = superset.data();
            double* row = superset.data() + lt_;
            std::fill(run, run + lt_, 0.0);
            for (Index a = 0; a <= t_last; ++a) {
                const Index b0 = std::max(a, t_first);
                const double base = cumulative[a];
                for (Index b = b0; b < lt_; ++b)
                    row[b] = (cumulative[b + 1] - base) / (weight * static_cast<double>(b - a + 1));
                for (Index b = lt_ - 2; b >= b0; --b) row[b] = std::max(row[b], row[b + 1]);
                for (Index b = b0; b < lt_; ++b) run[b] = std::max(run[b], row[b]);
                if (a >= t_first) best[a] = std::max(best[a], run[a]);
            }
        } else {
            for (Coord len : dyadic_lengths_) {
                const double den = weight * static_cast<double>(len);
                for (Index a = 0; a + len <= lt_; ++a) {
                    const double val = (cumulative[a + len] - cumulative[a]) / den;
                    for (Index t = a; t < a + len; ++t) best[t] = std::max(best[t], val);
                }
            }
        }
    }

    const GridSpec& g_;
    const WeightField& w_;
    MaximalOptions options_;
    Eigen::ArrayXd abs_;
    Index lt_ = 0;
    std::vector<Index> stride_;
    Index padded_ = 0;
    std::vector<Index> cell_padded_;
    Eigen::ArrayXd weight_prefix_;
    std::vector<Coord> dyadic_lengths_;
};

} // namespace

MaximalField maximal_field(const ScalarField& f, const WeightField& w, const MaximalOptions& options) {
    require_compatible(f, w);
    const GridSpec& g = f.grid();
    FieldEvaluator evaluator(f, w, options);
    Eigen::ArrayXd out(g.cell_count());

    const Index columns = g.spatial_cell_count();
    const int workers = std::clamp<int>(options.workers, 1, static_cast<int>(columns));
    if (workers == 1) {
        evaluator.run(0, columns, out.data());
    } else {
        std::vector<std::exception_ptr> errors(workers);
        {
            std::vector<std::jthread> pool;
            for (int i = 0; i < workers; ++i) {
                const Index begin = columns * i / workers, end = columns * (i + 1) / workers;
                pool.emplace_back([&, i, begin, end] {
                    try {
                        evaluator.run(begin, end, out.data());
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return {ScalarField(g, std::move(out)), options.family, w.descriptor()};
}

std::vector<Index> level_set(const MaximalField& mf, double lambda) {
    if (!(lambda > 0.0)) throw RangeError("level_set: lambda must be positive");
    std::vector<Index> out;
    const auto& values = mf.values.values();
    for (Index i = 0; i < values.size(); ++i)
        if (values[i] > lambda) out.push_back(i);
    return out;
}

} // namespace hsmax
