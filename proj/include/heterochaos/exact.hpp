#pragma once

// Exact arithmetic substrate: GMP-backed rationals, half-open intervals,
// boxes and b-adic grid intervals.

#include <gmpxx.h>

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <compare>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace heterochaos {

using BigInt = mpz_class;

/// User-facing validation failure (bad argument, malformed input).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A resource limit was hit: rational bit-size guard, word or state budget.
struct GuardExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal invariant that a theorem guarantees did not hold.
struct InvariantViolation : std::logic_error {
    using std::logic_error::logic_error;
};

namespace detail {

inline std::size_t initial_bit_limit() {
    if (const char* env = std::getenv("HETEROCHAOS_MAX_BITS")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return 4096;
}

inline std::size_t& bit_limit_storage() {
    static std::size_t limit = initial_bit_limit();
    return limit;
}

} // namespace detail

/// Maximum combined numerator+denominator bit size tolerated by guarded
/// operations. Defaults to 4096, overridable with HETEROCHAOS_MAX_BITS.
inline std::size_t max_bits() { return detail::bit_limit_storage(); }
inline void set_max_bits(std::size_t bits) { detail::bit_limit_storage() = bits; }

/// Restores the previous bit limit on scope exit.
class ScopedBitLimit {
public:
    explicit ScopedBitLimit(std::size_t bits) : saved_(max_bits()) { set_max_bits(bits); }
    ~ScopedBitLimit() { set_max_bits(saved_); }
    ScopedBitLimit(const ScopedBitLimit&) = delete;
    ScopedBitLimit& operator=(const ScopedBitLimit&) = delete;

private:
    std::size_t saved_;
};

class Rational {
public:
    Rational() = default;
    Rational(long n) : v_(n) {} // NOLINT(google-explicit-constructor)
    Rational(long n, long d) {
        if (d == 0) throw ValidationError("rational with zero denominator");
        v_ = mpq_class(n, d);
        v_.canonicalize();
    }
    Rational(const BigInt& n, const BigInt& d) {
        if (d == 0) throw ValidationError("rational with zero denominator");
        v_ = mpq_class(n, d);
        v_.canonicalize();
    }
    explicit Rational(const BigInt& n) : v_(n) {}
    explicit Rational(mpq_class v) : v_(std::move(v)) { v_.canonicalize(); }

    /// Parses "p/q" or "p" (optional leading minus). Throws ValidationError.
    static Rational parse(std::string_view text) {
        auto fail = [&] { return ValidationError("malformed rational '" + std::string(text) + "'"); };
        if (text.empty()) throw fail();
        auto is_int = [](std::string_view s) {
            if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
            return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
        };
        const auto slash = text.find('/');
        std::string num(text.substr(0, slash));
        std::string den = slash == std::string_view::npos ? "1" : std::string(text.substr(slash + 1));
        if (!is_int(num) || !is_int(den) || den.front() == '-' || den.front() == '+') throw fail();
        if (num.front() == '+') num.erase(0, 1);
        BigInt n(num, 10);
        BigInt d(den, 10);
        if (d == 0) throw fail();
        return Rational(n, d);
    }

    const mpq_class& get() const { return v_; }
    BigInt numerator() const { return v_.get_num(); }
    BigInt denominator() const { return v_.get_den(); }

    int sign() const { return sgn(v_); }
    bool is_integer() const { return v_.get_den() == 1; }
    double to_double() const { return v_.get_d(); }

    BigInt floor() const {
        BigInt q;
        mpz_fdiv_q(q.get_mpz_t(), v_.get_num_mpz_t(), v_.get_den_mpz_t());
        return q;
    }

    /// Bits of |numerator| plus bits of denominator.
    std::size_t bit_size() const {
        return mpz_sizeinbase(v_.get_num_mpz_t(), 2) + mpz_sizeinbase(v_.get_den_mpz_t(), 2);
    }

    std::string str() const {
        if (is_integer()) return v_.get_num().get_str();
        return v_.get_num().get_str() + "/" + v_.get_den().get_str();
    }

    Rational abs() const { return Rational(mpq_class(::abs(v_))); }
    Rational reciprocal() const {
        if (sign() == 0) throw ValidationError("division by zero");
        return Rational(mpq_class(1 / v_));
    }

    friend Rational operator+(const Rational& a, const Rational& b) { return Rational(RawTag{}, a.v_ + b.v_); }
    friend Rational operator-(const Rational& a, const Rational& b) { return Rational(RawTag{}, a.v_ - b.v_); }
    friend Rational operator*(const Rational& a, const Rational& b) { return Rational(RawTag{}, a.v_ * b.v_); }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.sign() == 0) throw ValidationError("division by zero");
        return Rational(RawTag{}, a.v_ / b.v_);
    }
    Rational operator-() const { return Rational(RawTag{}, -v_); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.sign() == 0) throw ValidationError("division by zero");
        v_ /= o.v_;
        return *this;
    }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.v_, b.v_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const int c = cmp(a.v_, b.v_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
    struct RawTag {};
    // GMP expression results are already canonical.
    Rational(RawTag, mpq_class v) : v_(std::move(v)) {}

    mpq_class v_;
};

inline Rational pow(const Rational& base, long exponent) {
    if (exponent < 0) return pow(base.reciprocal(), -exponent);
    BigInt num, den;
    mpz_pow_ui(num.get_mpz_t(), base.numerator().get_mpz_t(), static_cast<unsigned long>(exponent));
    mpz_pow_ui(den.get_mpz_t(), base.denominator().get_mpz_t(), static_cast<unsigned long>(exponent));
    return Rational(num, den);
}

inline BigInt pow_int(unsigned long base, unsigned long exponent) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), base, exponent);
    return r;
}

/// Throws GuardExceeded when `r` is larger than the configured bit limit.
inline void check_bits(const Rational& r, std::string_view context) {
    if (r.bit_size() > max_bits()) {
        throw GuardExceeded("rational bit size " + std::to_string(r.bit_size()) + " exceeds limit " +
                            std::to_string(max_bits()) + " (" + std::string(context) + ")");
    }
}

/// [lo,hi), or [lo,1] when hi == 1. Invariant: lo < hi.
class HalfOpenInterval {
public:
    HalfOpenInterval(Rational lo, Rational hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (!(lo_ < hi_)) throw ValidationError("interval needs lo < hi, got [" + lo_.str() + "," + hi_.str() + ")");
        closed_hi_ = hi_ == Rational(1);
    }

    static HalfOpenInterval unit() { return {Rational(0), Rational(1)}; }

    /// Parses "[lo,hi)" or "[lo,1]".
    static HalfOpenInterval parse(std::string_view text) {
        auto fail = [&] { return ValidationError("malformed interval '" + std::string(text) + "'"); };
        if (text.size() < 5 || text.front() != '[') throw fail();
        const char close = text.back();
        const auto comma = text.find(',');
        if (comma == std::string_view::npos || (close != ')' && close != ']')) throw fail();
        Rational lo = Rational::parse(text.substr(1, comma - 1));
        Rational hi = Rational::parse(text.substr(comma + 1, text.size() - comma - 2));
        if ((close == ']') != (hi == Rational(1))) throw fail();
        return {std::move(lo), std::move(hi)};
    }

    const Rational& lo() const { return lo_; }
    const Rational& hi() const { return hi_; }
    bool closed_hi() const { return closed_hi_; }
    Rational length() const { return hi_ - lo_; }

    bool contains(const Rational& x) const { return lo_ <= x && (x < hi_ || (closed_hi_ && x == hi_)); }
    /// Strict interior membership lo < x < hi.
    bool contains_interior(const Rational& x) const { return lo_ < x && x < hi_; }
    bool on_boundary(const Rational& x) const { return x == lo_ || x == hi_; }
    /// Closure containment: [other.lo, other.hi] within [lo, hi].
    bool covers(const HalfOpenInterval& other) const { return lo_ <= other.lo_ && other.hi_ <= hi_; }
    /// Closure of `other` inside the open interval (lo, hi).
    bool strictly_covers(const HalfOpenInterval& other) const { return lo_ < other.lo_ && other.hi_ < hi_; }
    bool touches_unit_ends() const { return lo_ == Rational(0) || hi_ == Rational(1); }

    std::string str() const { return "[" + lo_.str() + "," + hi_.str() + (closed_hi_ ? "]" : ")"); }

    friend bool operator==(const HalfOpenInterval& a, const HalfOpenInterval& b) {
        return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }

private:
    Rational lo_;
    Rational hi_;
    bool closed_hi_ = false;
};

inline std::ostream& operator<<(std::ostream& os, const HalfOpenInterval& j) { return os << j.str(); }

/// Result of a half-open intersection. Half-open intervals with lo < hi <= 1
/// never meet in a single point, so `interval` is present exactly when the
/// intersection has nonempty interior.
struct Intersection {
    std::optional<HalfOpenInterval> interval;
    bool interior = false;
};

inline Intersection intersect(const HalfOpenInterval& a, const HalfOpenInterval& b) {
    const Rational& lo = std::max(a.lo(), b.lo());
    const Rational& hi = std::min(a.hi(), b.hi());
    if (!(lo < hi)) return {};
    return {HalfOpenInterval(lo, hi), true};
}

enum class BoxShape { plain, breadbox, pizzabox, full };

/// Cartesian product of half-open intervals. Axis labels are X,Y,Z in 3D and
/// X,Z in 2D.
class Box {
public:
    Box() = default;
    explicit Box(std::vector<HalfOpenInterval> axes) : axes_(std::move(axes)) {
        if (axes_.empty()) throw ValidationError("box needs at least one axis");
    }

    static Box unit(std::size_t dim) { return Box(std::vector<HalfOpenInterval>(dim, HalfOpenInterval::unit())); }

    std::size_t dim() const { return axes_.size(); }
    const HalfOpenInterval& operator[](std::size_t i) const { return axes_.at(i); }
    const std::vector<HalfOpenInterval>& axes() const { return axes_; }

    bool contains(const std::vector<Rational>& p) const {
        if (p.size() != axes_.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (!axes_[i].contains(p[i])) return false;
        return true;
    }
    bool contains_interior(const std::vector<Rational>& p) const {
        if (p.size() != axes_.size()) return false;
        for (std::size_t i = 0; i < p.size(); ++i)
            if (!axes_[i].contains_interior(p[i])) return false;
        return true;
    }
    bool covers(const Box& other) const {
        if (other.dim() != dim()) return false;
        for (std::size_t i = 0; i < dim(); ++i)
            if (!axes_[i].covers(other.axes_[i])) return false;
        return true;
    }

    Rational volume() const {
        Rational v(1);
        for (const auto& a : axes_) v *= a.length();
        return v;
    }

    /// Axes of full length 1.
    std::vector<std::size_t> unit_axes() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < axes_.size(); ++i)
            if (axes_[i].length() == Rational(1)) out.push_back(i);
        return out;
    }

    BoxShape classify() const {
        const auto n = unit_axes().size();
        if (n == dim()) return BoxShape::full;
        if (n == 1) return BoxShape::breadbox;
        if (n == 2) return BoxShape::pizzabox;
        return BoxShape::plain;
    }

    std::string str() const {
        std::string s;
        for (std::size_t i = 0; i < axes_.size(); ++i) s += (i ? "x" : "") + axes_[i].str();
        return s;
    }

    friend bool operator==(const Box& a, const Box& b) { return a.axes_ == b.axes_; }

private:
    std::vector<HalfOpenInterval> axes_;
};

inline char axis_label(std::size_t dim, std::size_t axis) {
    if (dim == 3) return "XYZ"[axis];
    if (dim == 2) return "XZ"[axis];
    return static_cast<char>('0' + axis);
}

/// Labels of the unit-length axes, e.g. "YZ" for a YZ pizzabox.
inline std::string unit_axis_labels(const Box& b) {
    std::string s;
    for (auto a : b.unit_axes()) s += axis_label(b.dim(), a);
    return s;
}

inline std::optional<Box> intersect(const Box& a, const Box& b) {
    if (a.dim() != b.dim()) throw ValidationError("box dimension mismatch");
    std::vector<HalfOpenInterval> axes;
    axes.reserve(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) {
        auto r = intersect(a[i], b[i]);
        if (!r.interval) return std::nullopt;
        axes.push_back(*r.interval);
    }
    return Box(std::move(axes));
}

/// Sum of axis lengths: an upper bound on the diameter in any product metric.
inline Rational box_diameter_bound(const Box& b) {
    if (b.dim() == 0) throw ValidationError("empty box");
    Rational sum(0);
    for (const auto& a : b.axes()) sum += a.length();
    return sum;
}

/// [c/B^N, (c+1)/B^N) with 0 <= c < B^N.
template <unsigned long Base>
struct AdicInterval {
    static_assert(Base >= 2);

    BigInt coefficient;
    unsigned long level = 0;

    AdicInterval() = default;
    AdicInterval(BigInt c, unsigned long n) : coefficient(std::move(c)), level(n) {
        if (coefficient < 0 || coefficient >= pow_int(Base, level))
            throw ValidationError("grid coefficient out of range");
    }

    /// The grid cell of the given level whose half-open span contains x.
    static AdicInterval containing(const Rational& x, unsigned long n) {
        if (x < Rational(0) || x > Rational(1)) throw ValidationError("point outside [0,1]");
        const BigInt scale = pow_int(Base, n);
        BigInt c = (x * Rational(scale)).floor();
        if (c == scale) c -= 1;
        return {std::move(c), n};
    }

    HalfOpenInterval interval() const {
        const BigInt scale = pow_int(Base, level);
        return {Rational(coefficient, scale), Rational(BigInt(coefficient + 1), scale)};
    }

    /// Recognizes a half-open interval that is exactly a grid cell.
    static std::optional<AdicInterval> from_interval(const HalfOpenInterval& j) {
        const Rational len = j.length();
        if (len.numerator() != 1) return std::nullopt;
        BigInt den = len.denominator();
        unsigned long n = 0;
        while (den > 1) {
            if (den % Base != 0) return std::nullopt;
            den /= Base;
            ++n;
        }
        const Rational scaled = j.lo() * Rational(pow_int(Base, n));
        if (!scaled.is_integer()) return std::nullopt;
        return AdicInterval(scaled.numerator(), n);
    }

    friend bool operator==(const AdicInterval&, const AdicInterval&) = default;
};

using DyadicInterval = AdicInterval<2>;
using TrinaryInterval = AdicInterval<3>;

using Point = std::vector<Rational>;

inline std::string format_point(const Point& p, char sep = ',') {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? std::string(1, sep) : "") + p[i].str();
    return s;
}

inline Point parse_point(std::string_view text) {
    Point p;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        p.push_back(Rational::parse(text.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return p;
}

inline std::size_t max_bit_size(const Point& p) {
    std::size_t m = 0;
    for (const auto& c : p) m = std::max(m, c.bit_size());
    return m;
}

inline void check_bits(const Point& p, std::string_view context) {
    for (const auto& c : p) check_bits(c, context);
}

} // namespace heterochaos
