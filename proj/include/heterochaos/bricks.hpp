#pragma once

// Biased points, (j,k)-bricks and the periodic points and nested chains
// they certify.
//
// Axes play three roles: u is the expanding full-branch axis, v the
// contracting axis, w the mixed axis whose per-step log2 slope is L_n.
// For hc3d, (u,v,w) = (X,Y,Z); the same code run on the inverse system with
// (u,v,w) = (Y,X,Z) gives the dual constructions.

#include "heterochaos/periodic.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace heterochaos {

namespace detail {

/// e with |r| = 2^e, or nullopt.
inline std::optional<long> exact_log2(const Rational& r) {
    const Rational a = r.abs();
    if (a.sign() == 0) return std::nullopt;
    const BigInt num = a.numerator(), den = a.denominator();
    auto log2_of_power = [](const BigInt& v) -> std::optional<long> {
        const auto bits = mpz_sizeinbase(v.get_mpz_t(), 2);
        if (mpz_popcount(v.get_mpz_t()) != 1) return std::nullopt;
        return static_cast<long>(bits) - 1;
    };
    auto en = log2_of_power(num), ed = log2_of_power(den);
    if (!en || !ed) return std::nullopt;
    return *en - *ed;
}

} // namespace detail

/// Eventually periodic sequence: prefix, then cycle repeated forever.
struct EventualCycle {
    std::vector<std::size_t> prefix;
    std::vector<std::size_t> cycle;

    std::size_t at(std::size_t i) const {
        if (i < prefix.size()) return prefix[i];
        return cycle[(i - prefix.size()) % cycle.size()];
    }
};

/// L_n for all integers n from eventually periodic forward values L_0, L_1,
/// ... and backward values L_{-1}, L_{-2}, ...
class PhiProfile {
public:
    PhiProfile(std::vector<long> fwd_prefix, std::vector<long> fwd_cycle, std::vector<long> bwd_prefix,
               std::vector<long> bwd_cycle)
        : fp_(std::move(fwd_prefix)), fc_(std::move(fwd_cycle)), bp_(std::move(bwd_prefix)), bc_(std::move(bwd_cycle)) {
        if (fc_.empty() || bc_.empty()) throw ValidationError("L profile cycles must be nonempty");
        fc_sum_ = sum(fc_);
        bc_sum_ = sum(bc_);
    }

    /// L_n = value for every n.
    static PhiProfile constant(long value) { return PhiProfile({}, {value}, {}, {value}); }

    long L(long n) const {
        if (n >= 0) return at(fp_, fc_, static_cast<std::size_t>(n));
        return at(bp_, bc_, static_cast<std::size_t>(-n - 1));
    }

    /// S(n) = Phi(0,n) for n >= 0 and -Phi(n,0) for n < 0.
    long S(long n) const {
        if (n >= 0) return partial(fp_, fc_, fc_sum_, static_cast<std::size_t>(n));
        return -partial(bp_, bc_, bc_sum_, static_cast<std::size_t>(-n));
    }

    /// Sum of L_i for m <= i < n.
    long phi(long m, long n) const {
        if (m > n) throw ValidationError("phi needs m <= n");
        return S(n) - S(m);
    }

    /// Both tails drift upward: Phi(0,n) and Phi(-n,0) tend to +infinity.
    bool certified_biased() const { return fc_sum_ > 0 && bc_sum_ > 0; }

    /// -min over m <= 0 of Phi(m,0).
    long beta() const { return std::max<long>(0, max_S_below(0)); }

    /// Phi(m,k) > 0 for every m < k.
    bool right_biased(long k) const {
        require_certified();
        if (k < 1) throw ValidationError("right-biased index must be positive");
        const long sk = S(k);
        if (max_S_below(0) >= sk) return false;
        for (long m = 0; m < k; ++m)
            if (S(m) >= sk) return false;
        return true;
    }

    /// Phi(-j,m) > 0 for every m > -j.
    bool left_biased(long j) const {
        require_certified();
        if (j < 1) throw ValidationError("left-biased index must be positive");
        const long sj = S(-j);
        for (long m = -j + 1; m < 0; ++m)
            if (S(m) <= sj) return false;
        return min_S_from(0) > sj;
    }

    /// Smallest right-biased k > n and left-biased j > n.
    std::pair<long, long> biased_pair(long n) const {
        require_certified();
        long j = n + 1, k = n + 1;
        while (!left_biased(j)) ++j;
        while (!right_biased(k)) ++k;
        return {j, k};
    }

    long next_right_biased(long after) const {
        long k = after + 1;
        while (!right_biased(k)) ++k;
        return k;
    }
    long next_left_biased(long after) const {
        long j = after + 1;
        while (!left_biased(j)) ++j;
        return j;
    }

    const std::vector<long>& forward_prefix() const { return fp_; }
    const std::vector<long>& forward_cycle() const { return fc_; }
    const std::vector<long>& backward_prefix() const { return bp_; }
    const std::vector<long>& backward_cycle() const { return bc_; }

private:
    static long sum(const std::vector<long>& v) {
        long s = 0;
        for (long x : v) s += x;
        return s;
    }
    static long at(const std::vector<long>& p, const std::vector<long>& c, std::size_t i) {
        if (i < p.size()) return p[i];
        return c[(i - p.size()) % c.size()];
    }
    static long partial(const std::vector<long>& p, const std::vector<long>& c, long csum, std::size_t n) {
        long s = 0;
        const std::size_t head = std::min(n, p.size());
        for (std::size_t i = 0; i < head; ++i) s += p[i];
        if (n <= p.size()) return s;
        const std::size_t rest = n - p.size();
        s += static_cast<long>(rest / c.size()) * csum;
        for (std::size_t i = 0; i < rest % c.size(); ++i) s += c[i];
        return s;
    }
    void require_certified() const {
        if (!certified_biased()) throw ValidationError("profile tails are not net positive; biased indices need not exist");
    }
    /// max of S(m) over m < bound <= 0. Past the backward prefix each full
    /// cycle lowers S by the cycle sum, so one cycle beyond suffices.
    long max_S_below(long bound) const {
        const long lowest = std::min(bound - 1, -static_cast<long>(bp_.size())) - static_cast<long>(bc_.size());
        long best = S(bound - 1);
        for (long m = bound - 1; m >= lowest; --m) best = std::max(best, S(m));
        return best;
    }
    /// min of S(m) over m >= bound >= 0.
    long min_S_from(long bound) const {
        const long highest = std::max(bound, static_cast<long>(fp_.size())) + static_cast<long>(fc_.size());
        long best = S(bound);
        for (long m = bound; m <= highest; ++m) best = std::min(best, S(m));
        return best;
    }

    std::vector<long> fp_, fc_, bp_, bc_;
    long fc_sum_ = 0, bc_sum_ = 0;
};

/// A system with brick roles assigned, plus the 1D maps driving the u
/// itinerary forward and the v itinerary backward.
class BrickSystem {
public:
    BrickSystem(MapSystem sys, std::size_t u, std::size_t v, std::size_t w)
        : sys_(std::move(sys)), inv_(invert_system(sys_)), u_(u), v_(v), w_(w),
          ufwd_(IntervalMap::from_axis(sys_, u)), vbwd_(IntervalMap::from_axis(inv_, v)) {
        if (sys_.dim() != 3) throw ValidationError("bricks need a 3D system");
        for (const auto& piece : ufwd_.pieces()) lu_.push_back(slope_exponent(sys_, u_, piece.domain, false));
        for (const auto& piece : vbwd_.pieces()) lv_.push_back(slope_exponent(inv_, v_, piece.domain, true));
    }

    /// (u,v,w) = (X,Y,Z) on the system itself.
    static BrickSystem forward(const MapSystem& m) { return BrickSystem(m, 0, 1, 2); }
    /// (u,v,w) = (Y,X,Z) on the inverse system.
    static BrickSystem dual(const MapSystem& m) { return BrickSystem(invert_system(m), 1, 0, 2); }

    const MapSystem& system() const { return sys_; }
    const MapSystem& inverse() const { return inv_; }
    std::size_t u() const { return u_; }
    std::size_t v() const { return v_; }
    std::size_t w() const { return w_; }
    const IntervalMap& u_map() const { return ufwd_; }
    const IntervalMap& v_map() const { return vbwd_; }
    /// L contributed by a forward step from a point in u-piece i.
    long L_forward(std::size_t piece) const { return lu_.at(piece); }
    /// L_{n-1} when v_n lies in v-piece i.
    long L_backward(std::size_t piece) const { return lv_.at(piece); }

    PhiProfile profile(const EventualCycle& u_digits, const EventualCycle& v_digits) const {
        auto conv = [](const std::vector<std::size_t>& d, const std::vector<long>& table) {
            std::vector<long> out;
            for (auto x : d) out.push_back(table.at(x));
            return out;
        };
        return PhiProfile(conv(u_digits.prefix, lu_), conv(u_digits.cycle, lu_), conv(v_digits.prefix, lv_),
                          conv(v_digits.cycle, lv_));
    }

private:
    /// log2 of the w-slope of every branch whose `axis` domain overlaps
    /// `piece`; negated when read off the inverse system.
    long slope_exponent(const MapSystem& m, std::size_t axis, const HalfOpenInterval& piece, bool negate) const {
        std::optional<long> e;
        for (const auto& b : m.branches()) {
            if (!intersect(b.domain[axis], piece).interval) continue;
            auto x = detail::exact_log2(b.action[w_].slope);
            if (!x) throw ValidationError("brick construction needs power-of-two slopes on the mixed axis");
            if (e && *e != *x) throw ValidationError("mixed-axis slope is not determined by the itinerary axis");
            e = x;
        }
        if (!e) throw ValidationError("itinerary piece meets no branch");
        return negate ? -*e : *e;
    }

    MapSystem sys_;
    MapSystem inv_;
    std::size_t u_, v_, w_;
    IntervalMap ufwd_, vbwd_;
    std::vector<long> lu_, lv_;
};

struct BiasedPoint {
    Point point;
    /// u-piece indices of u_0, u_1, ...
    EventualCycle u_digits;
    /// v-piece indices of v_0, v_{-1}, ...
    EventualCycle v_digits;
    PhiProfile profile;
};

namespace detail {

/// Tail cycle with positive net L: the two largest-L pieces if at least two
/// share the maximum, otherwise max, max, and the first other piece.
inline std::vector<std::size_t> bias_cycle(const IntervalMap& f, const std::function<long(std::size_t)>& L) {
    long best = L(0);
    for (std::size_t i = 1; i < f.size(); ++i) best = std::max(best, L(i));
    std::vector<std::size_t> top, rest;
    for (std::size_t i = 0; i < f.size(); ++i) (L(i) == best ? top : rest).push_back(i);
    if (best <= 0) throw ValidationError("no branch expands the mixed axis; no biased tail exists");
    if (top.size() >= 2) return {top[0], top[1]};
    if (rest.empty()) return {top[0]};
    return {top[0], top[0], rest[0]};
}

/// Point whose itinerary under f is prefix followed by cycle forever.
inline Rational point_with_itinerary(const IntervalMap& f, const EventualCycle& d) {
    AffinePair c{Rational(0), Rational(1)};
    for (auto i : d.cycle) c = c.then(f.pieces()[i].action);
    if (c.slope == Rational(1)) throw ValidationError("cycle composition has slope 1");
    Rational u = c.offset / (Rational(1) - c.slope);
    for (auto it = d.prefix.rbegin(); it != d.prefix.rend(); ++it) u = f.pieces()[*it].action.inverse().apply(u);
    return u;
}

/// Shortest prefix of u's itinerary whose cylinder is shorter than eps.
inline std::vector<std::size_t> itinerary_prefix(const IntervalMap& f, Rational u, const Rational& eps) {
    std::vector<std::size_t> digits;
    Rational len(1);
    while (!(len < eps)) {
        const std::size_t i = f.locate(u);
        digits.push_back(i);
        len /= f.pieces()[i].action.slope;
        u = f.pieces()[i].action.apply(u);
        check_bits(u, "target itinerary");
    }
    // Two extra digits keep the result off the cylinder's edge region.
    for (int extra = 0; extra < 2; ++extra) {
        const std::size_t i = f.locate(u);
        digits.push_back(i);
        u = f.pieces()[i].action.apply(u);
    }
    return digits;
}

inline Rational max_distance(const Point& a, const Point& b) {
    Rational d(0);
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).abs());
    return d;
}

} // namespace detail

/// Exact orbit points p_m for lo <= m <= hi (lo <= 0 <= hi).
inline std::vector<Point> orbit_window(const BrickSystem& bs, const Point& p, long lo, long hi) {
    std::vector<Point> back;
    Point q = p;
    for (long m = -1; m >= lo; --m) {
        q = bs.inverse()(q);
        check_bits(q, "brick orbit");
        back.push_back(q);
    }
    std::vector<Point> out(back.rbegin(), back.rend());
    out.push_back(p);
    for (long m = 1; m <= hi; ++m) {
        out.push_back(bs.system()(out.back()));
        check_bits(out.back(), "brick orbit");
    }
    return out;
}

/// Checks that p_m avoids every symbol-set boundary and follows the
/// certificate digits for -back <= m <= fwd.
inline void verify_biased(const BrickSystem& bs, const BiasedPoint& bp, long back, long fwd) {
    const auto pts = orbit_window(bs, bp.point, -back, fwd);
    for (long m = -back; m <= fwd; ++m) {
        const Point& q = pts[static_cast<std::size_t>(m + back)];
        if (bs.system().on_boundary(q, bs.system().locate(q)))
            throw InvariantViolation("biased point orbit touches a symbol-set boundary at m = " + std::to_string(m));
        if (m >= 0 && bs.u_map().locate(q[bs.u()]) != bp.u_digits.at(static_cast<std::size_t>(m)))
            throw InvariantViolation("forward itinerary differs from certificate at m = " + std::to_string(m));
        if (m <= 0 && bs.v_map().locate(q[bs.v()]) != bp.v_digits.at(static_cast<std::size_t>(-m)))
            throw InvariantViolation("backward itinerary differs from certificate at m = " + std::to_string(m));
    }
}

/// A certified biased point within eps (max norm) of target: forward u
/// digits copy the target's then repeat a net-expanding cycle; backward v
/// digits likewise; w is a non-dyadic grid point so its orbit never meets a
/// dyadic boundary.
inline BiasedPoint construct_biased(const BrickSystem& bs, const Point& target, const Rational& eps) {
    if (eps.sign() <= 0) throw ValidationError("eps must be positive");
    if (target.size() != 3 || !Box::unit(3).contains(target)) throw ValidationError("target outside the unit cube");
    EventualCycle ud, vd;
    ud.prefix = detail::itinerary_prefix(bs.u_map(), target[bs.u()], eps);
    ud.cycle = detail::bias_cycle(bs.u_map(), [&](std::size_t i) { return bs.L_forward(i); });
    vd.prefix = detail::itinerary_prefix(bs.v_map(), target[bs.v()], eps);
    vd.cycle = detail::bias_cycle(bs.v_map(), [&](std::size_t i) { return bs.L_backward(i); });

    Point p(3);
    p[bs.u()] = detail::point_with_itinerary(bs.u_map(), ud);
    p[bs.v()] = detail::point_with_itinerary(bs.v_map(), vd);
    BigInt K = 2;
    while (!(Rational(1) / Rational(K) < eps)) K *= 2;
    BigInt c = (target[bs.w()] * Rational(K)).floor();
    if (c >= K) c = K - 1;
    p[bs.w()] = Rational(BigInt(3 * c + 1), BigInt(3 * K));

    if (!(detail::max_distance(p, target) < eps)) throw InvariantViolation("constructed point is not within eps");
    BiasedPoint bp{p, ud, vd, bs.profile(ud, vd)};
    if (!bp.profile.certified_biased()) throw InvariantViolation("bias cycle is not net positive");
    verify_biased(bs, bp, static_cast<long>(vd.prefix.size() + 2 * vd.cycle.size()),
                  static_cast<long>(ud.prefix.size() + 2 * ud.cycle.size()));
    return bp;
}

struct Brick {
    long j = 0;
    long k = 0;
    Point p;
    /// boxes[m + j] = B^m for -j <= m <= k
    std::vector<Box> boxes;
    /// symbols[m + j] = branch of B^m for -j <= m < k
    Word symbols;

    const Box& box(long m) const { return boxes.at(static_cast<std::size_t>(m + j)); }
    std::size_t symbol(long m) const { return symbols.at(static_cast<std::size_t>(m + j)); }
};

/// Interior: B^{-j} closure inside (0,1) on u and w, B^k closure inside
/// (0,1) on v.
inline bool is_interior(const BrickSystem& bs, const Brick& b) {
    return !b.box(-b.j)[bs.u()].touches_unit_ends() && !b.box(-b.j)[bs.w()].touches_unit_ends() &&
           !b.box(b.k)[bs.v()].touches_unit_ends();
}

/// Throws InvariantViolation unless b is a (j,k)-brick containing b.p.
inline void verify_brick(const BrickSystem& bs, const Brick& b) {
    const auto& m = bs.system();
    const auto pts = orbit_window(bs, b.p, -b.j, b.k);
    auto fail = [&](const std::string& what, long idx) {
        throw InvariantViolation("brick (" + std::to_string(b.j) + "," + std::to_string(b.k) + "): " + what +
                                 " at m = " + std::to_string(idx));
    };
    for (long i = -b.j; i <= b.k; ++i) {
        if (!b.box(i).contains_interior(pts[static_cast<std::size_t>(i + b.j)])) fail("orbit point not interior", i);
        if (i == b.k) break;
        const auto& br = m.branch(b.symbol(i));
        if (!br.domain.covers(b.box(i))) fail("box leaves its symbol set", i);
        if (!(br.image_of(b.box(i)) == b.box(i + 1))) fail("image is not the next box", i);
    }
    const Box& top = b.box(b.k);
    if (!(top[bs.u()] == HalfOpenInterval::unit()) || !(top[bs.w()] == HalfOpenInterval::unit()))
        fail("last box is not full on the expanding axes", b.k);
    if (!(b.box(-b.j)[bs.v()] == HalfOpenInterval::unit())) fail("first box is not full on the contracting axis", -b.j);
}

/// (J_u): pull [0,1] back along u from m = k; (J_w): likewise on w;
/// (J_v): push [0,1] forward along v from m = -j.
inline Brick build_brick(const BrickSystem& bs, const Point& p, long j, long k) {
    if (j < 1 || k < 1) throw ValidationError("brick needs j, k >= 1");
    const auto& m = bs.system();
    const auto pts = orbit_window(bs, p, -j, k);
    Brick b;
    b.j = j;
    b.k = k;
    b.p = p;
    for (long i = -j; i < k; ++i) {
        const Point& q = pts[static_cast<std::size_t>(i + j)];
        const std::size_t s = m.locate(q);
        if (m.on_boundary(q, s)) throw ValidationError("orbit point on a symbol-set boundary at m = " + std::to_string(i));
        b.symbols.push_back(s);
    }
    const auto n = static_cast<std::size_t>(j + k + 1);
    std::vector<HalfOpenInterval> U(n, HalfOpenInterval::unit()), V(n, HalfOpenInterval::unit()),
        W(n, HalfOpenInterval::unit());
    for (long i = k - 1; i >= -j; --i) {
        const auto idx = static_cast<std::size_t>(i + j);
        const auto& br = m.branch(b.symbols[idx]);
        U[idx] = br.action[bs.u()].preimage(U[idx + 1]);
        W[idx] = br.action[bs.w()].preimage(W[idx + 1]);
    }
    for (long i = -j; i < k; ++i) {
        const auto idx = static_cast<std::size_t>(i + j);
        V[idx + 1] = m.branch(b.symbols[idx]).action[bs.v()].image(V[idx]);
    }
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::vector<HalfOpenInterval> axes(3, HalfOpenInterval::unit());
        axes[bs.u()] = U[idx];
        axes[bs.v()] = V[idx];
        axes[bs.w()] = W[idx];
        b.boxes.emplace_back(std::move(axes));
    }
    verify_brick(bs, b);
    return b;
}

/// Every point of B^0 lies within eps of c (max norm).
inline bool box_within(const Box& box, const Point& c, const Rational& eps) {
    for (std::size_t a = 0; a < box.dim(); ++a) {
        if (c[a] - box[a].lo() > eps || box[a].hi() - c[a] > eps) return false;
    }
    return true;
}

/// Grows j along left-biased indices until B^0 fits on v, then k along
/// right-biased indices until B^0 fits on u and w and the brick is interior.
inline Brick interior_brick_search(const BrickSystem& bs, const BiasedPoint& bp, const Rational& eps,
                                   long max_index = 2000) {
    if (eps.sign() <= 0) throw ValidationError("eps must be positive");
    const auto& prof = bp.profile;
    // B^0 on v is the image of [0,1] along the j backward branches.
    auto v_fits = [&](long jj) {
        const auto pts = orbit_window(bs, bp.point, -jj, 0);
        HalfOpenInterval iv = HalfOpenInterval::unit();
        for (long i = 0; i < jj; ++i) {
            const auto& q = pts[static_cast<std::size_t>(i)];
            iv = bs.system().branch(bs.system().locate(q)).action[bs.v()].image(iv);
        }
        return bp.point[bs.v()] - iv.lo() <= eps && iv.hi() - bp.point[bs.v()] <= eps;
    };
    long j = prof.next_left_biased(0);
    while (!v_fits(j)) {
        j = prof.next_left_biased(j);
        if (j > max_index) throw GuardExceeded("no left-biased index fits eps");
    }
    long k = prof.next_right_biased(0);
    bool grow_j = false;
    while (true) {
        Brick b = build_brick(bs, bp.point, j, k);
        if (!box_within(b.box(0), bp.point, eps)) {
            k = prof.next_right_biased(k);
        } else if (is_interior(bs, b)) {
            return b;
        } else {
            if (grow_j) j = prof.next_left_biased(j);
            else k = prof.next_right_biased(k);
            grow_j = !grow_j;
        }
        if (j > max_index || k > max_index) throw GuardExceeded("interior brick search exceeded index limit");
    }
}

/// The periodic point of period j+k in an interior brick, as a point of B^0.
inline PeriodicOrbit periodic_point_in_brick(const BrickSystem& bs, const Brick& b) {
    if (!is_interior(bs, b)) throw ValidationError("brick is not interior");
    const auto& m = bs.system();
    auto orb = fixed_point_of_word(m, b.symbols);
    if (!orb) throw InvariantViolation("interior brick has no periodic point for its word");
    if (!b.box(-b.j).contains(orb->point)) throw InvariantViolation("periodic point is not in B^-j");
    Point q = orb->point;
    for (long i = 0; i < b.j; ++i) q = m(q);
    if (!b.box(0).contains_interior(q)) throw InvariantViolation("periodic point is not strictly inside B^0");
    Word w(b.symbols.begin() + b.j, b.symbols.end());
    w.insert(w.end(), b.symbols.begin(), b.symbols.begin() + b.j);
    Point r = q;
    for (auto s : w) {
        if (m.locate(r) != s) throw InvariantViolation("periodic orbit leaves the brick word");
        r = m(r);
    }
    if (r != q) throw InvariantViolation("point does not return after j+k steps");
    PeriodicOrbit out = *orb;
    out.word = std::move(w);
    out.point = std::move(q);
    if (!(out.chi[bs.u()] > Rational(1) && out.chi[bs.w()] > Rational(1) && out.chi[bs.v()] < Rational(1)))
        throw InvariantViolation("brick periodic point is not unstable on u,w and stable on v");
    return out;
}

/// The same orbit read as an orbit of the inverse of bs.system().
inline PeriodicOrbit as_inverse_orbit(const BrickSystem& bs, const PeriodicOrbit& orb) {
    auto r = fixed_point_of_word(bs.inverse(), dual_word(bs.system(), bs.inverse(), orb.word));
    if (!r || r->point != orb.point) throw InvariantViolation("dual word does not reproduce the orbit");
    return *r;
}

struct BrickResult {
    BiasedPoint biased;
    Brick brick;
    PeriodicOrbit orbit;
};

/// construct_biased, interior_brick_search and periodic_point_in_brick with
/// eps/2 each, so B^0 lies within eps of the target.
inline BrickResult brick_pipeline(const BrickSystem& bs, const Point& target, const Rational& eps) {
    const Rational half = eps / Rational(2);
    BiasedPoint bp = construct_biased(bs, target, half);
    Brick b = interior_brick_search(bs, bp, half);
    PeriodicOrbit orb = periodic_point_in_brick(bs, b);
    if (!box_within(b.box(0), target, eps)) throw InvariantViolation("brick is not within eps of the target");
    return {std::move(bp), std::move(b), std::move(orb)};
}

/// Image of a box along a word; each step must lie in the branch domain.
inline Box map_box(const MapSystem& m, Box box, const Word& w, std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
        const auto& br = m.branch(w.at(i));
        if (!br.domain.covers(box)) throw InvariantViolation("box leaves symbol set " + br.symbol);
        box = br.image_of(box);
    }
    return box;
}

struct ChainLink {
    /// Nested breadbox U_s.
    Box U;
    /// F^{N_s}(U_t) lies in B^0_s for t >= s.
    long N = 0;
    /// F^{M_s}(U_s) is the last box of brick s.
    long M = 0;
    /// Symbol word followed by U_s for M_s steps.
    Word chain;
};

/// Nested breadboxes visiting each brick's B^0 in turn.
inline std::vector<ChainLink> two_brick_chain(const BrickSystem& bs, const std::vector<Brick>& bricks) {
    if (bricks.empty()) throw ValidationError("chain needs at least one brick");
    const auto& m = bs.system();
    for (const auto& b : bricks)
        if (!is_interior(bs, b)) throw ValidationError("chain bricks must be interior");
    std::vector<ChainLink> links;
    {
        const Brick& b = bricks.front();
        links.push_back({b.box(-b.j), b.j, b.j + b.k, b.symbols});
    }
    for (std::size_t s = 1; s < bricks.size(); ++s) {
        const ChainLink& prev = links.back();
        const Brick& b = bricks[s];
        const Box top = map_box(m, prev.U, prev.chain, static_cast<std::size_t>(prev.M));
        auto q = intersect(top, b.box(-b.j));
        if (!q) throw InvariantViolation("pizzabox misses the next brick's breadbox");
        Box u = *q;
        for (long i = prev.M - 1; i >= 0; --i) u = m.branch(prev.chain[static_cast<std::size_t>(i)]).preimage_of(u);
        ChainLink next;
        next.U = u;
        next.N = prev.M + b.j;
        next.M = prev.M + b.j + b.k;
        next.chain = prev.chain;
        next.chain.insert(next.chain.end(), b.symbols.begin(), b.symbols.end());
        if (!prev.U[bs.u()].strictly_covers(u[bs.u()]) || !prev.U[bs.w()].strictly_covers(u[bs.w()]))
            throw InvariantViolation("nested breadbox closure is not inside its parent");
        links.push_back(std::move(next));
    }
    for (std::size_t s = 0; s < links.size(); ++s) {
        const Brick& b = bricks[s];
        for (std::size_t t = s; t < links.size(); ++t) {
            const Box img = map_box(m, links[t].U, links[t].chain, static_cast<std::size_t>(links[s].N));
            if (!b.box(0).covers(img))
                throw InvariantViolation("F^N_s(U_t) is not inside B^0_s for s = " + std::to_string(s) +
                                         ", t = " + std::to_string(t));
        }
    }
    return links;
}

} // namespace heterochaos
