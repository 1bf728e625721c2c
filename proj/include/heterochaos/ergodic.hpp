#pragma once

// Orbit statistics: Lyapunov numbers, Birkhoff averages, leaf contraction
// and finite-depth covers of the index and heteroclinic sets.
//
// Branch choice, hence every slope, is decided exactly. The expanding factor
// axis (X for the hc maps) is iterated as an exact fraction n/q in 128-bit
// integers; other coordinates, where needed, are doubles.

#include "heterochaos/maps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace heterochaos {

/// Denominator of sampled initial coordinates: coprime to 2 and 3, so
/// sampled orbits never land on a branch endpoint.
inline constexpr std::int64_t sample_denominator = (std::int64_t{1} << 31) * 1162261467LL + 1; // 2^31 3^19 + 1

/// Uniform n in [1, D-1] via rejection sampling on mt19937_64, so draws are
/// identical on every platform.
inline std::int64_t sample_numerator(std::mt19937_64& rng, std::int64_t d = sample_denominator) {
    const std::uint64_t range = static_cast<std::uint64_t>(d - 1);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t r;
    do r = rng(); while (r >= limit);
    return static_cast<std::int64_t>(r % range) + 1;
}

/// The map acting on one axis alone, with integer offsets and slopes, whose
/// pieces also fix every branch slope. For hc3d this is tau on X.
class ExactFactor {
public:
    struct Piece {
        Rational lo;
        std::int64_t offset;
        std::int64_t slope;
        /// |slope| of every axis for branches over this piece.
        std::vector<Rational> slopes;
        /// Branches whose factor-axis domain is this piece.
        std::vector<std::size_t> branches;
    };

    explicit ExactFactor(const MapSystem& m) : axis_(find_axis(m)) {
        const auto f = IntervalMap::from_axis(m, axis_);
        for (const auto& p : f.pieces()) {
            Piece piece;
            piece.lo = p.domain.lo();
            piece.offset = p.action.offset.numerator().get_si();
            piece.slope = p.action.slope.numerator().get_si();
            for (std::size_t b = 0; b < m.size(); ++b) {
                if (!(m.branch(b).domain[axis_] == p.domain)) continue;
                piece.branches.push_back(b);
                std::vector<Rational> s;
                for (const auto& a : m.branch(b).action) s.push_back(a.slope.abs());
                if (piece.slopes.empty()) piece.slopes = s;
                else if (piece.slopes != s)
                    throw ValidationError("branch slopes are not determined by the factor axis of " + m.name());
            }
            pieces_.push_back(std::move(piece));
        }
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            lo_num_.push_back(pieces_[i].lo.numerator().get_si());
            lo_den_.push_back(pieces_[i].lo.denominator().get_si());
        }
    }

    std::size_t axis() const { return axis_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    /// Piece index of n/q.
    std::size_t locate(std::int64_t n, std::int64_t q) const {
        std::size_t i = pieces_.size() - 1;
        while (i > 0 && static_cast<__int128>(n) * lo_den_[i] < static_cast<__int128>(lo_num_[i]) * q) --i;
        return i;
    }
    bool at_endpoint(std::int64_t n, std::int64_t q) const {
        if (n == 0 || n == q) return true;
        for (std::size_t i = 1; i < pieces_.size(); ++i)
            if (static_cast<__int128>(n) * lo_den_[i] == static_cast<__int128>(lo_num_[i]) * q) return true;
        return false;
    }
    std::int64_t step(std::int64_t n, std::int64_t q, std::size_t piece) const {
        const auto& p = pieces_[piece];
        return static_cast<std::int64_t>(static_cast<__int128>(p.slope) * n + static_cast<__int128>(p.offset) * q);
    }

private:
    static std::size_t find_axis(const MapSystem& m) {
        for (std::size_t a = 0; a < m.dim(); ++a) {
            try {
                const auto f = IntervalMap::from_axis(m, a);
                bool integral = true;
                for (const auto& p : f.pieces()) {
                    integral = integral && p.action.offset.is_integer() && p.action.slope.is_integer() &&
                               p.domain.lo().denominator() < BigInt(1) << 20;
                }
                if (integral && f.size() > 1) return a;
            } catch (const ValidationError&) {
            }
        }
        throw ValidationError("map " + m.name() + " has no exact one-axis factor with integer branches");
    }

    std::size_t axis_;
    std::vector<Piece> pieces_;
    std::vector<std::int64_t> lo_num_, lo_den_;
};

namespace detail {

/// Runs f(i) for i in [0,n) on up to `threads` workers; results are written
/// by index so the output does not depend on scheduling.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    const unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += t) f(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

} // namespace detail

struct LyapunovEstimate {
    std::size_t orbits = 0;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    /// Geometric mean of |d| per axis over all orbits and steps.
    std::vector<double> lambda;
    /// Exact value on axes where every visited branch has the same |d|.
    std::vector<std::optional<Rational>> exact;
    /// Smallest and largest per-orbit estimate per axis.
    std::vector<double> orbit_min, orbit_max;
};

/// Lebesgue-average prediction: exp of the volume-weighted mean of log|d|.
/// Needs a volume-preserving system (Lebesgue measure invariant).
inline std::optional<std::vector<double>> predicted_lyapunov(const MapSystem& m) {
    for (const auto& b : m.branches())
        if (b.jacobian() != Rational(1)) return std::nullopt;
    std::vector<double> logs(m.dim(), 0.0);
    for (const auto& b : m.branches()) {
        const double vol = b.domain.volume().to_double();
        for (std::size_t a = 0; a < m.dim(); ++a) logs[a] += vol * std::log(b.action[a].slope.abs().to_double());
    }
    for (auto& l : logs) l = std::exp(l);
    return logs;
}

namespace detail {

inline std::vector<std::uint64_t> visit_counts(const ExactFactor& f, std::int64_t n, std::int64_t q, std::size_t steps) {
    std::vector<std::uint64_t> counts(f.pieces().size(), 0);
    for (std::size_t s = 0; s < steps; ++s) {
        const std::size_t i = f.locate(n, q);
        ++counts[i];
        n = f.step(n, q, i);
    }
    return counts;
}

inline LyapunovEstimate summarize(const ExactFactor& f, const std::vector<std::vector<std::uint64_t>>& counts,
                                  std::size_t dim, std::size_t steps) {
    LyapunovEstimate est;
    est.orbits = counts.size();
    est.steps = steps;
    est.lambda.assign(dim, 0.0);
    est.orbit_min.assign(dim, std::numeric_limits<double>::infinity());
    est.orbit_max.assign(dim, -std::numeric_limits<double>::infinity());
    est.exact.assign(dim, std::nullopt);
    for (std::size_t a = 0; a < dim; ++a) {
        std::optional<Rational> common;
        bool uniform = true;
        double total = 0.0;
        for (const auto& c : counts) {
            double s = 0.0;
            for (std::size_t p = 0; p < c.size(); ++p) {
                if (!c[p]) continue;
                const Rational& d = f.pieces()[p].slopes[a];
                if (!common) common = d;
                else if (*common != d) uniform = false;
                s += static_cast<double>(c[p]) * std::log(d.to_double());
            }
            const double mean = s / static_cast<double>(steps);
            total += mean;
            est.orbit_min[a] = std::min(est.orbit_min[a], std::exp(mean));
            est.orbit_max[a] = std::max(est.orbit_max[a], std::exp(mean));
        }
        est.lambda[a] = std::exp(total / static_cast<double>(counts.size()));
        if (uniform && common) est.exact[a] = *common;
    }
    return est;
}

} // namespace detail

inline LyapunovEstimate lyapunov(const MapSystem& m, std::size_t orbits, std::size_t steps, std::uint64_t seed,
                                 unsigned threads = 1) {
    if (orbits < 1 || steps < 1) throw ValidationError("lyapunov needs orbits >= 1 and steps >= 1");
    const ExactFactor f(m);
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> starts;
    while (starts.size() < orbits) {
        const auto n = sample_numerator(rng);
        if (!f.at_endpoint(n, sample_denominator)) starts.push_back(n);
    }
    std::vector<std::vector<std::uint64_t>> counts(orbits);
    detail::parallel_for(orbits, threads,
                         [&](std::size_t i) { counts[i] = detail::visit_counts(f, starts[i], sample_denominator, steps); });
    auto est = detail::summarize(f, counts, m.dim(), steps);
    est.seed = seed;
    return est;
}

struct SingleOrbitLyapunov {
    LyapunovEstimate estimate;
    /// prod |d| along the orbit per axis, exactly (the estimate is its
    /// steps-th root).
    std::vector<Rational> product;
};

/// Deterministic estimate from one factor coordinate, e.g. x0 = 1/7.
inline SingleOrbitLyapunov lyapunov_from(const MapSystem& m, const Rational& x0, std::size_t steps) {
    if (steps < 1) throw ValidationError("steps must be positive");
    const ExactFactor f(m);
    if (x0 < Rational(0) || x0 > Rational(1)) throw ValidationError("start outside [0,1]");
    if (x0.denominator() > BigInt(1) << 60) throw ValidationError("start denominator too large");
    const auto counts = detail::visit_counts(f, x0.numerator().get_si(), x0.denominator().get_si(), steps);
    SingleOrbitLyapunov out{detail::summarize(f, {counts}, m.dim(), steps), {}};
    for (std::size_t a = 0; a < m.dim(); ++a) {
        Rational prod(1);
        for (std::size_t p = 0; p < counts.size(); ++p)
            if (counts[p]) prod *= pow(f.pieces()[p].slopes[a], static_cast<long>(counts[p]));
        check_bits(prod, "lyapunov product");
        out.product.push_back(prod);
    }
    return out;
}

enum class Observable { coord_x, coord_y, coord_z, indicator_R2, product_xz };

inline Observable parse_observable(std::string_view s) {
    if (s == "coord_x") return Observable::coord_x;
    if (s == "coord_y") return Observable::coord_y;
    if (s == "coord_z") return Observable::coord_z;
    if (s == "indicator_R2") return Observable::indicator_R2;
    if (s == "product_xz") return Observable::product_xz;
    throw ValidationError("unknown observable '" + std::string(s) +
                          "' (expected coord_x, coord_y, coord_z, indicator_R2, product_xz)");
}

inline std::string to_string(Observable o) {
    switch (o) {
    case Observable::coord_x: return "coord_x";
    case Observable::coord_y: return "coord_y";
    case Observable::coord_z: return "coord_z";
    case Observable::indicator_R2: return "indicator_R2";
    case Observable::product_xz: return "product_xz";
    }
    return "";
}

struct BirkhoffResult {
    Observable observable = Observable::coord_x;
    std::size_t steps = 0;
    std::uint64_t seed = 0;
    std::vector<Point> starts;
    std::vector<double> averages;
    double mean = 0;
    double spread = 0;
};

namespace detail {

/// Trajectory average of an observable. The factor coordinate is exact;
/// the others are doubles, and the branch among those over the current
/// factor piece is chosen from them.
inline double birkhoff_orbit(const MapSystem& m, const ExactFactor& f, Observable obs, std::int64_t n, std::int64_t q,
                             std::vector<double> other, std::size_t steps) {
    const std::size_t fa = f.axis();
    const std::size_t dim = m.dim();
    // Per-branch double bounds and actions.
    struct B {
        std::vector<double> lo, hi, c, d;
        std::vector<bool> closed;
        bool r2;
    };
    std::vector<B> bs;
    for (const auto& br : m.branches()) {
        B b;
        std::size_t expanding = 0;
        for (std::size_t a = 0; a < dim; ++a) {
            b.lo.push_back(br.domain[a].lo().to_double());
            b.hi.push_back(br.domain[a].hi().to_double());
            b.closed.push_back(br.domain[a].closed_hi());
            b.c.push_back(br.action[a].offset.to_double());
            b.d.push_back(br.action[a].slope.to_double());
            if (br.action[a].slope.abs() > Rational(1)) ++expanding;
        }
        b.r2 = expanding >= 2;
        bs.push_back(std::move(b));
    }
    auto coord = [&](std::size_t a) {
        return a == fa ? static_cast<double>(n) / static_cast<double>(q) : other[a];
    };
    const std::size_t ay = dim == 3 ? 1 : 0;
    const std::size_t az = dim - 1;
    double sum = 0.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const std::size_t piece = f.locate(n, q);
        const auto& cand = f.pieces()[piece].branches;
        std::size_t b = cand.front();
        for (auto c : cand) {
            bool inside = true;
            for (std::size_t a = 0; a < dim && inside; ++a) {
                if (a == fa) continue;
                const double v = other[a];
                inside = v >= bs[c].lo[a] && (v < bs[c].hi[a] || (bs[c].closed[a] && v <= bs[c].hi[a]));
            }
            if (inside) {
                b = c;
                break;
            }
        }
        switch (obs) {
        case Observable::coord_x: sum += coord(0); break;
        case Observable::coord_y: sum += coord(ay); break;
        case Observable::coord_z: sum += coord(az); break;
        case Observable::indicator_R2: sum += bs[b].r2 ? 1.0 : 0.0; break;
        case Observable::product_xz: sum += coord(0) * coord(az); break;
        }
        for (std::size_t a = 0; a < dim; ++a) {
            if (a == fa) continue;
            other[a] = std::clamp(bs[b].c[a] + bs[b].d[a] * other[a], 0.0, 1.0);
        }
        n = f.step(n, q, piece);
    }
    return sum / static_cast<double>(steps);
}

} // namespace detail

inline BirkhoffResult birkhoff(const MapSystem& m, Observable obs, std::size_t points, std::size_t steps,
                               std::uint64_t seed, unsigned threads = 1) {
    if (points < 1 || steps < 1) throw ValidationError("birkhoff needs points >= 1 and steps >= 1");
    const ExactFactor f(m);
    std::mt19937_64 rng(seed);
    BirkhoffResult r;
    r.observable = obs;
    r.steps = steps;
    r.seed = seed;
    std::vector<std::vector<std::int64_t>> nums;
    while (nums.size() < points) {
        std::vector<std::int64_t> p;
        for (std::size_t a = 0; a < m.dim(); ++a) p.push_back(sample_numerator(rng));
        if (f.at_endpoint(p[f.axis()], sample_denominator)) continue;
        Point pt;
        for (auto v : p) pt.push_back(Rational(BigInt(static_cast<long>(v)), BigInt(static_cast<long>(sample_denominator))));
        r.starts.push_back(std::move(pt));
        nums.push_back(std::move(p));
    }
    r.averages.assign(points, 0.0);
    detail::parallel_for(points, threads, [&](std::size_t i) {
        std::vector<double> other;
        for (auto v : nums[i]) other.push_back(static_cast<double>(v) / static_cast<double>(sample_denominator));
        r.averages[i] = detail::birkhoff_orbit(m, f, obs, nums[i][f.axis()], sample_denominator, other, steps);
    });
    double lo = r.averages.front(), hi = lo, total = 0.0;
    for (double a : r.averages) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
        total += a;
    }
    r.mean = total / static_cast<double>(points);
    r.spread = hi - lo;
    return r;
}

/// Average along the orbit of one given start point.
inline double birkhoff_from(const MapSystem& m, Observable obs, const Point& start, std::size_t steps) {
    if (steps < 1) throw ValidationError("steps must be positive");
    if (!Box::unit(m.dim()).contains(start)) throw ValidationError("start outside the unit domain");
    const ExactFactor f(m);
    const Rational& x = start[f.axis()];
    if (x.denominator() > BigInt(1) << 60) throw ValidationError("start denominator too large");
    std::vector<double> other;
    for (const auto& c : start) other.push_back(c.to_double());
    return detail::birkhoff_orbit(m, f, obs, x.numerator().get_si(), x.denominator().get_si(), other, steps);
}

struct LeafStep {
    long n = 0;
    Rational x;
    /// Width of each Y piece of F^n(leaf).
    Rational y_width;
    /// Number of Y pieces; grows only by splits across B and C.
    BigInt y_pieces;
    /// Convex hull of the Y pieces.
    HalfOpenInterval y_hull = HalfOpenInterval::unit();
    HalfOpenInterval z = HalfOpenInterval::unit();
    /// |hull Y| + |Z|, an upper bound on the diameter of F^n(leaf).
    double diameter_bound = 2;
};

struct LeafRecord {
    Rational x0;
    std::vector<LeafStep> steps;
    const LeafStep& last() const { return steps.back(); }
};

/// Image of the leaf {x0} x [0,1] x [0,1] under F^n for hc3d, tracked exactly.
/// A Z interval inside one half follows the single branch over x_n; the
/// whole interval over R splits into a B part and a C part, both with Z the
/// whole interval again.
inline LeafRecord leaf_contraction(const MapSystem& m, const Rational& x0, long n) {
    if (m.dim() != 3) throw ValidationError("leaves live in a 3D system");
    if (x0 < Rational(0) || x0 > Rational(1)) throw ValidationError("x0 outside [0,1]");
    if (n < 0) throw ValidationError("n must be non-negative");
    const auto unit = HalfOpenInterval::unit();
    LeafRecord rec;
    rec.x0 = x0;
    LeafStep cur;
    cur.x = x0;
    cur.y_width = Rational(1);
    cur.y_pieces = 1;
    cur.diameter_bound = 2.0;
    rec.steps.push_back(cur);
    for (long i = 0; i < n; ++i) {
        // Branches over x_n, and which of them the Z interval meets.
        std::vector<std::size_t> hit;
        for (std::size_t b = 0; b < m.size(); ++b) {
            const auto& dom = m.branch(b).domain;
            if (!dom[0].contains(cur.x)) continue;
            if (intersect(dom[2], cur.z).interval) hit.push_back(b);
        }
        if (hit.empty()) throw InvariantViolation("leaf image left every branch");
        LeafStep next;
        next.n = i + 1;
        next.x = m.branch(hit.front()).action[0].apply(cur.x);
        next.y_width = cur.y_width * m.branch(hit.front()).action[1].slope;
        next.y_pieces = cur.y_pieces * static_cast<unsigned long>(hit.size());
        std::optional<Rational> lo, hi;
        std::optional<HalfOpenInterval> z;
        for (auto b : hit) {
            const auto& br = m.branch(b);
            if (br.action[1].slope != m.branch(hit.front()).action[1].slope)
                throw InvariantViolation("split branches contract Y differently");
            const auto y = br.action[1].image(cur.y_hull);
            lo = lo ? std::min(*lo, y.lo()) : y.lo();
            hi = hi ? std::max(*hi, y.hi()) : y.hi();
            const auto zi = br.action[2].image(*intersect(cur.z, br.domain[2]).interval);
            z = z ? HalfOpenInterval(std::min(z->lo(), zi.lo()), std::max(z->hi(), zi.hi())) : zi;
        }
        next.y_hull = HalfOpenInterval(*lo, *hi);
        next.z = *z;
        if (hit.size() > 1 && !(next.z == unit)) throw InvariantViolation("split leaf lost its full Z interval");
        check_bits(next.y_width, "leaf width");
        next.diameter_bound = next.y_hull.length().to_double() + next.z.length().to_double();
        rec.steps.push_back(std::move(next));
        cur = rec.steps.back();
    }
    return rec;
}

/// R1 = A u D, R2 = B u C.
enum class CoverSet { H1, H2, H21, H12 };

inline CoverSet parse_cover_set(std::string_view s) {
    if (s == "H1") return CoverSet::H1;
    if (s == "H2") return CoverSet::H2;
    if (s == "H21" || s == "H2,1" || s == "H*21") return CoverSet::H21;
    if (s == "H12" || s == "H1,2" || s == "H*12") return CoverSet::H12;
    throw ValidationError("unknown set '" + std::string(s) + "' (expected H1, H2, H21, H12)");
}

inline std::string to_string(CoverSet s) {
    switch (s) {
    case CoverSet::H1: return "H1";
    case CoverSet::H2: return "H2";
    case CoverSet::H21: return "H21";
    case CoverSet::H12: return "H12";
    }
    return "";
}

struct CoverBox {
    /// Symbols for times -depth..depth (backward part empty at depth 0).
    std::vector<std::size_t> word;
    Box box;
};

struct CoverResult {
    CoverSet set = CoverSet::H1;
    long depth = 0;
    std::vector<CoverBox> boxes;

    Rational volume() const {
        Rational v(0);
        for (const auto& b : boxes) v += b.box.volume();
        return v;
    }
    /// Hull of the cover's projection onto an axis.
    HalfOpenInterval hull(std::size_t axis) const {
        if (boxes.empty()) throw ValidationError("empty cover");
        Rational lo = boxes.front().box[axis].lo(), hi = boxes.front().box[axis].hi();
        for (const auto& b : boxes) {
            lo = std::min(lo, b.box[axis].lo());
            hi = std::max(hi, b.box[axis].hi());
        }
        return {lo, hi};
    }
};

/// Boxes {p : F^i(p) in the prescribed symbol set for -depth <= i <= depth},
/// one per word, for hc3d. H1 and H2 use R1 and R2 at all times; H21 uses R1
/// forward (i >= 0) and R2 backward, H12 the reverse.
inline CoverResult invariant_cover(const MapSystem& m, CoverSet set, long depth, std::size_t word_budget = 1u << 22) {
    if (depth < 0) throw ValidationError("depth must be non-negative");
    const std::vector<std::size_t> r1{m.symbol_index("A"), m.symbol_index("D")};
    const std::vector<std::size_t> r2{m.symbol_index("B"), m.symbol_index("C")};
    const auto& fwd = (set == CoverSet::H1 || set == CoverSet::H21) ? r1 : r2;
    const auto& bwd = (set == CoverSet::H1 || set == CoverSet::H12) ? r1 : r2;
    const std::size_t len = static_cast<std::size_t>(2 * depth + 1);
    if (len > 62 || (std::size_t{1} << len) > word_budget)
        throw GuardExceeded("cover depth " + std::to_string(depth) + " exceeds the word budget");
    CoverResult out;
    out.set = set;
    out.depth = depth;
    for (std::size_t code = 0; code < (std::size_t{1} << len); ++code) {
        std::vector<std::size_t> word(len);
        for (std::size_t i = 0; i < len; ++i) {
            const long t = static_cast<long>(i) - depth;
            const auto& alphabet = t >= 0 ? fwd : bwd;
            word[i] = alphabet[(code >> (len - 1 - i)) & 1];
        }
        // Points at time -depth that follow the word, then carried to time 0.
        std::optional<Box> c = m.branch(word.back()).domain;
        for (std::size_t i = len - 1; i-- > 0 && c;) c = intersect(m.branch(word[i]).domain, m.branch(word[i]).preimage_of(*c));
        if (!c) continue;
        Box b = *c;
        for (long i = 0; i < depth; ++i) b = m.branch(word[static_cast<std::size_t>(i)]).image_of(b);
        out.boxes.push_back({std::move(word), std::move(b)});
    }
    return out;
}

} // namespace heterochaos
