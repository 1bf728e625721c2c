#pragma once

// Piecewise linear-diagonal map systems on the unit square/cube: presets,
// exact evaluation, programmatic inversion, orbits and the XZ projection.

#include "heterochaos/exact.hpp"

#include <charconv>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace heterochaos {

/// u -> offset + slope * u
struct AffinePair {
    Rational offset;
    Rational slope{1};

    Rational apply(const Rational& u) const { return offset + slope * u; }

    AffinePair inverse() const {
        if (slope.sign() == 0) throw ValidationError("affine slope is zero");
        return {-offset / slope, slope.reciprocal()};
    }

    /// The pair for `next` applied after `*this`.
    AffinePair then(const AffinePair& next) const { return {next.offset + next.slope * offset, next.slope * slope}; }

    /// Image of an interval under an increasing pair, renormalized half-open.
    HalfOpenInterval image(const HalfOpenInterval& j) const { return {apply(j.lo()), apply(j.hi())}; }
    HalfOpenInterval preimage(const HalfOpenInterval& j) const { return inverse().image(j); }

    friend bool operator==(const AffinePair&, const AffinePair&) = default;
};

struct SymbolBranch {
    std::string symbol;
    Box domain;
    std::vector<AffinePair> action;

    Point apply(const Point& p) const {
        Point out;
        out.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) out.push_back(action[i].apply(p[i]));
        return out;
    }

    Box image_of(const Box& b) const {
        std::vector<HalfOpenInterval> axes;
        axes.reserve(b.dim());
        for (std::size_t i = 0; i < b.dim(); ++i) axes.push_back(action[i].image(b[i]));
        return Box(std::move(axes));
    }
    Box preimage_of(const Box& b) const {
        std::vector<HalfOpenInterval> axes;
        axes.reserve(b.dim());
        for (std::size_t i = 0; i < b.dim(); ++i) axes.push_back(action[i].preimage(b[i]));
        return Box(std::move(axes));
    }
    Box image() const { return image_of(domain); }

    /// |det| of the diagonal Jacobian.
    Rational jacobian() const {
        Rational d(1);
        for (const auto& a : action) d *= a.slope.abs();
        return d;
    }
};

struct Step {
    Point image;
    std::size_t branch = 0;
    bool boundary = false;
};

class MapSystem {
public:
    MapSystem(std::string name, std::size_t dim, std::vector<SymbolBranch> branches, std::optional<long> k = {})
        : name_(std::move(name)), dim_(dim), branches_(std::move(branches)), k_(k) {
        validate();
    }

    const std::string& name() const { return name_; }
    std::size_t dim() const { return dim_; }
    std::optional<long> k() const { return k_; }
    std::size_t size() const { return branches_.size(); }
    const std::vector<SymbolBranch>& branches() const { return branches_; }
    const SymbolBranch& branch(std::size_t i) const { return branches_.at(i); }

    std::optional<std::size_t> find_symbol(std::string_view label) const {
        for (std::size_t i = 0; i < branches_.size(); ++i)
            if (branches_[i].symbol == label) return i;
        return std::nullopt;
    }
    std::size_t symbol_index(std::string_view label) const {
        if (auto i = find_symbol(label)) return *i;
        throw ValidationError("map " + name_ + " has no symbol '" + std::string(label) + "'");
    }

    /// Index of the branch owning p under the half-open convention.
    std::size_t locate(const Point& p) const {
        if (p.size() != dim_) throw ValidationError("point dimension does not match map " + name_);
        for (std::size_t i = 0; i < branches_.size(); ++i)
            if (branches_[i].domain.contains(p)) return i;
        throw ValidationError("point (" + format_point(p) + ") outside the unit domain");
    }

    bool on_boundary(const Point& p, std::size_t b) const {
        const auto& dom = branches_[b].domain;
        for (std::size_t i = 0; i < dim_; ++i)
            if (dom[i].on_boundary(p[i])) return true;
        return false;
    }

    Step evaluate(const Point& p) const {
        const std::size_t b = locate(p);
        return {branches_[b].apply(p), b, on_boundary(p, b)};
    }

    Point operator()(const Point& p) const { return evaluate(p).image; }

    /// True when branch images have pairwise disjoint interiors (a.e. injective).
    bool injective() const {
        for (std::size_t a = 0; a < branches_.size(); ++a)
            for (std::size_t b = a + 1; b < branches_.size(); ++b)
                if (intersect(branches_[a].image(), branches_[b].image())) return false;
        return true;
    }

    /// Branches whose Jacobian has `count` expanding axes.
    std::vector<std::size_t> branches_expanding_in(std::size_t count) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < branches_.size(); ++i) {
            std::size_t n = 0;
            for (const auto& a : branches_[i].action)
                if (a.slope.abs() > Rational(1)) ++n;
            if (n == count) out.push_back(i);
        }
        return out;
    }

private:
    void validate() const {
        if (dim_ != 2 && dim_ != 3) throw ValidationError("map dimension must be 2 or 3");
        if (branches_.empty()) throw ValidationError("map has no branches");
        const Box unit = Box::unit(dim_);
        Rational volume(0);
        std::map<std::string, int> seen;
        for (const auto& br : branches_) {
            if (br.domain.dim() != dim_ || br.action.size() != dim_)
                throw ValidationError("branch " + br.symbol + " has wrong dimension");
            if (++seen[br.symbol] > 1) throw ValidationError("duplicate symbol " + br.symbol);
            for (const auto& a : br.action)
                if (a.slope.sign() <= 0) throw ValidationError("branch " + br.symbol + " needs positive slopes");
            if (!unit.covers(br.domain)) throw ValidationError("branch " + br.symbol + " domain leaves the unit box");
            if (!unit.covers(br.image())) throw ValidationError("branch " + br.symbol + " maps outside the unit box");
            volume += br.domain.volume();
        }
        for (std::size_t a = 0; a < branches_.size(); ++a)
            for (std::size_t b = a + 1; b < branches_.size(); ++b)
                if (intersect(branches_[a].domain, branches_[b].domain))
                    throw ValidationError("branches " + branches_[a].symbol + " and " + branches_[b].symbol +
                                          " overlap");
        if (volume != Rational(1)) throw ValidationError("branch domains do not cover the unit box");
    }

    std::string name_;
    std::size_t dim_;
    std::vector<SymbolBranch> branches_;
    std::optional<long> k_;
};

namespace detail {

inline HalfOpenInterval iv(long lo_n, long lo_d, long hi_n, long hi_d) {
    return {Rational(lo_n, lo_d), Rational(hi_n, hi_d)};
}
inline AffinePair ap(const Rational& c, const Rational& d) { return {c, d}; }

inline MapSystem hc_family(long k, bool three_d, std::string name) {
    const auto full = HalfOpenInterval::unit();
    const auto xl = iv(0, 1, 1, 3), xm = iv(1, 3, 2, 3), xr = iv(2, 3, 1, 1);
    const Rational third(1, 3), half(1, 2), two_thirds(2, 3);
    auto make = [&](std::string sym, HalfOpenInterval x, HalfOpenInterval z, AffinePair ax, AffinePair ay,
                    AffinePair az) {
        SymbolBranch b;
        b.symbol = std::move(sym);
        if (three_d) {
            b.domain = Box({std::move(x), full, std::move(z)});
            b.action = {ax, ay, az};
        } else {
            b.domain = Box({std::move(x), std::move(z)});
            b.action = {ax, az};
        }
        return b;
    };
    std::vector<SymbolBranch> brs;
    brs.push_back(make("A", xl, full, ap(0, 3), ap(0, two_thirds), ap(0, half)));
    for (long j = 1; j <= k; ++j) {
        std::string sym = k == 2 && name.find("-k") == std::string::npos ? (j == 1 ? "B" : "C") : "B" + std::to_string(j);
        brs.push_back(make(sym, xr, iv(j - 1, k, j, k), ap(-2, 3),
                           ap(two_thirds + Rational(j - 1, 3 * k), Rational(1, 3 * k)), ap(Rational(-(j - 1)), Rational(k))));
    }
    brs.push_back(make("D", xm, full, ap(-1, 3), ap(0, two_thirds), ap(half, half)));
    return MapSystem(std::move(name), three_d ? 3 : 2, std::move(brs), k);
}

inline MapSystem baker2d() {
    std::vector<SymbolBranch> brs;
    for (long i = 0; i < 3; ++i) {
        SymbolBranch b;
        b.symbol = "Q" + std::to_string(i);
        b.domain = Box({iv(i, 3, i + 1, 3), HalfOpenInterval::unit()});
        b.action = {ap(Rational(-i), 3), ap(Rational(i, 3), Rational(1, 3))};
        brs.push_back(std::move(b));
    }
    return MapSystem("baker2d", 2, std::move(brs));
}

inline MapSystem baker3d() {
    std::vector<SymbolBranch> brs;
    for (long i = 0; i < 2; ++i) {
        for (long j = 0; j < 2; ++j) {
            SymbolBranch b;
            b.symbol = "Q" + std::to_string(i) + std::to_string(j);
            b.domain = Box({iv(i, 2, i + 1, 2), HalfOpenInterval::unit(), iv(j, 2, j + 1, 2)});
            b.action = {ap(Rational(-i), 2), ap(Rational(2 * i + j, 4), Rational(1, 4)), ap(Rational(-j), 2)};
            brs.push_back(std::move(b));
        }
    }
    return MapSystem("baker3d", 3, std::move(brs));
}

inline long parse_family_k(std::string_view name, std::string_view prefix) {
    std::string_view arg = name.substr(prefix.size());
    if (arg.size() < 3 || arg.front() != '(' || arg.back() != ')')
        throw ValidationError("expected " + std::string(prefix) + "(k), got '" + std::string(name) + "'");
    arg = arg.substr(1, arg.size() - 2);
    long k = 0;
    auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (ec != std::errc() || ptr != arg.data() + arg.size())
        throw ValidationError("family parameter k must be an integer, got '" + std::string(arg) + "'");
    if (k <= 1) throw ValidationError("family parameter k must exceed 1");
    if (k > 1000) throw ValidationError("family parameter k too large");
    return k;
}

} // namespace detail

/// Named presets: baker2d, baker3d, hc2d, hc3d, hc2d-k(k), hc3d-k(k).
inline MapSystem preset(std::string_view name) {
    if (name == "baker2d") return detail::baker2d();
    if (name == "baker3d") return detail::baker3d();
    if (name == "hc2d") return detail::hc_family(2, false, "hc2d");
    if (name == "hc3d") return detail::hc_family(2, true, "hc3d");
    if (name.starts_with("hc2d-k")) {
        const long k = detail::parse_family_k(name, "hc2d-k");
        return detail::hc_family(k, false, "hc2d-k(" + std::to_string(k) + ")");
    }
    if (name.starts_with("hc3d-k")) {
        const long k = detail::parse_family_k(name, "hc3d-k");
        return detail::hc_family(k, true, "hc3d-k(" + std::to_string(k) + ")");
    }
    throw ValidationError("unknown map '" + std::string(name) + "'");
}

inline std::vector<std::string> preset_names() { return {"baker2d", "baker3d", "hc2d", "hc3d", "hc2d-k(k)", "hc3d-k(k)"}; }

/// Inverse system on the image boxes, with inverted affine pairs. Image boxes
/// are renormalized to the half-open convention.
inline MapSystem invert_system(const MapSystem& m) {
    if (!m.injective()) throw ValidationError("map " + m.name() + " is not one-to-one; it has no inverse system");
    std::vector<SymbolBranch> brs;
    brs.reserve(m.size());
    for (const auto& b : m.branches()) {
        SymbolBranch inv;
        inv.symbol = b.symbol.ends_with("'") ? b.symbol.substr(0, b.symbol.size() - 1) : b.symbol + "'";
        inv.domain = b.image();
        for (const auto& a : b.action) inv.action.push_back(a.inverse());
        brs.push_back(std::move(inv));
    }
    std::string name = m.name().ends_with("^-1") ? m.name().substr(0, m.name().size() - 3) : m.name() + "^-1";
    return MapSystem(std::move(name), m.dim(), std::move(brs), m.k());
}

/// (x,y,z) -> (x,z)
inline Point project(const Point& p) {
    if (p.size() != 3) throw ValidationError("projection needs a 3D point");
    return {p[0], p[2]};
}

struct OrbitSegment {
    /// Time index of points.front(); equals -n_backward.
    long start = 0;
    std::vector<Point> points;
    std::vector<std::size_t> symbols;
    /// First time index whose point lies on its branch-domain boundary.
    std::optional<long> boundary_index;

    const Point& at(long n) const { return points.at(static_cast<std::size_t>(n - start)); }
};

inline OrbitSegment orbit(const MapSystem& m, const Point& p, long n_forward, long n_backward = 0) {
    if (n_forward < 0 || n_backward < 0) throw ValidationError("orbit lengths must be non-negative");
    if (!Box::unit(m.dim()).contains(p)) throw ValidationError("point (" + format_point(p) + ") outside the unit domain");
    std::vector<Point> back;
    if (n_backward > 0) {
        const MapSystem inv = invert_system(m);
        Point q = p;
        for (long i = 0; i < n_backward; ++i) {
            q = inv(q);
            check_bits(q, "backward orbit");
            back.push_back(q);
        }
    }
    OrbitSegment seg;
    seg.start = -n_backward;
    seg.points.assign(back.rbegin(), back.rend());
    seg.points.push_back(p);
    for (long i = 0; i < n_forward; ++i) {
        Point next = m(seg.points.back());
        check_bits(next, "forward orbit");
        seg.points.push_back(std::move(next));
    }
    seg.symbols.reserve(seg.points.size());
    for (std::size_t i = 0; i < seg.points.size(); ++i) {
        const std::size_t b = m.locate(seg.points[i]);
        seg.symbols.push_back(b);
        if (!seg.boundary_index && m.on_boundary(seg.points[i], b)) seg.boundary_index = seg.start + static_cast<long>(i);
    }
    return seg;
}

/// One coordinate of a system viewed as a 1D map with full linear branches,
/// e.g. the X action of hc3d or the Y action of its inverse.
class IntervalMap {
public:
    struct Piece {
        HalfOpenInterval domain;
        AffinePair action;
    };

    explicit IntervalMap(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
        std::sort(pieces_.begin(), pieces_.end(),
                  [](const Piece& a, const Piece& b) { return a.domain.lo() < b.domain.lo(); });
        Rational at(0);
        for (const auto& p : pieces_) {
            if (p.domain.lo() != at) throw ValidationError("interval map pieces do not tile [0,1]");
            if (!(p.action.image(p.domain) == HalfOpenInterval::unit()))
                throw ValidationError("interval map piece is not a full branch");
            at = p.domain.hi();
        }
        if (at != Rational(1)) throw ValidationError("interval map pieces do not tile [0,1]");
    }

    /// Restriction of a system to one axis. Requires that the axis action
    /// depends only on that axis' projection.
    static IntervalMap from_axis(const MapSystem& m, std::size_t axis) {
        std::vector<Piece> pieces;
        for (const auto& b : m.branches()) {
            const auto& d = b.domain[axis];
            bool merged = false;
            for (const auto& p : pieces) {
                if (intersect(p.domain, d).interval) {
                    if (!(p.domain == d) || !(p.action == b.action[axis]))
                        throw ValidationError("axis action of " + m.name() + " is not a function of that axis");
                    merged = true;
                }
            }
            if (!merged) pieces.push_back({d, b.action[axis]});
        }
        return IntervalMap(std::move(pieces));
    }

    const std::vector<Piece>& pieces() const { return pieces_; }
    std::size_t size() const { return pieces_.size(); }

    std::size_t locate(const Rational& u) const {
        for (std::size_t i = 0; i < pieces_.size(); ++i)
            if (pieces_[i].domain.contains(u)) return i;
        throw ValidationError("value " + u.str() + " outside [0,1]");
    }
    Rational operator()(const Rational& u) const { return pieces_[locate(u)].action.apply(u); }

    /// Partition points {0, ..., 1} of the branch domains.
    std::vector<Rational> partition() const {
        std::vector<Rational> out{Rational(0)};
        for (const auto& p : pieces_) out.push_back(p.domain.hi());
        return out;
    }

private:
    std::vector<Piece> pieces_;
};

/// Ordered endpoint set of the linearity intervals of f^n: {0,1} for n = 0
/// and 3^n+1 points for the three-branch maps.
inline std::vector<Rational> ends(const IntervalMap& f, unsigned n) {
    std::vector<Rational> cur{Rational(0), Rational(1)};
    for (unsigned level = 0; level < n; ++level) {
        std::vector<Rational> next;
        for (const auto& p : f.pieces()) {
            const AffinePair back = p.action.inverse();
            for (const auto& e : cur) next.push_back(back.apply(e));
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        cur = std::move(next);
    }
    return cur;
}

// Map-spec text format, one branch per line:
//
//   name hc3d
//   dim 3
//   branch A [0,1/3) [0,1] [0,1] -> 0,3 0,2/3 0,1/2
//
// Intervals are per axis; each affine pair is "offset,slope". Lines starting
// with '#' are comments.

inline std::string dump_map_spec(const MapSystem& m) {
    std::ostringstream os;
    os << "# heterochaos map-spec v1\n";
    os << "name " << m.name() << "\n";
    os << "dim " << m.dim() << "\n";
    if (m.k()) os << "k " << *m.k() << "\n";
    for (const auto& b : m.branches()) {
        os << "branch " << b.symbol;
        for (const auto& a : b.domain.axes()) os << ' ' << a.str();
        os << " ->";
        for (const auto& a : b.action) os << ' ' << a.offset.str() << ',' << a.slope.str();
        os << '\n';
    }
    return os.str();
}

inline MapSystem parse_map_spec(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string name = "custom";
    std::size_t dim = 0;
    std::optional<long> k;
    std::vector<SymbolBranch> branches;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key) || key.front() == '#') continue;
        auto fail = [&](const std::string& why) {
            return ValidationError("map-spec line " + std::to_string(line_no) + ": " + why);
        };
        if (key == "name") {
            if (!(ls >> name)) throw fail("missing name");
        } else if (key == "dim") {
            if (!(ls >> dim)) throw fail("missing dimension");
        } else if (key == "k") {
            long v = 0;
            if (!(ls >> v)) throw fail("missing k");
            k = v;
        } else if (key == "branch") {
            if (dim == 0) throw fail("branch before dim");
            SymbolBranch b;
            if (!(ls >> b.symbol)) throw fail("missing symbol");
            std::vector<HalfOpenInterval> axes;
            std::string tok;
            while (ls >> tok && tok != "->") axes.push_back(HalfOpenInterval::parse(tok));
            if (tok != "->") throw fail("missing '->'");
            while (ls >> tok) {
                const auto comma = tok.find(',');
                if (comma == std::string::npos) throw fail("affine pair needs 'offset,slope'");
                b.action.push_back({Rational::parse(tok.substr(0, comma)), Rational::parse(tok.substr(comma + 1))});
            }
            if (axes.size() != dim || b.action.size() != dim) throw fail("branch needs one interval and pair per axis");
            b.domain = Box(std::move(axes));
            branches.push_back(std::move(b));
        } else {
            throw fail("unknown key '" + key + "'");
        }
    }
    return MapSystem(std::move(name), dim, std::move(branches), k);
}

} // namespace heterochaos
