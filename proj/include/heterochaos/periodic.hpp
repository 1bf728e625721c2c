#pragma once

// Periodic orbits: exact fixed points of composed word actions, stability
// multipliers and enumeration over admissible necklaces.

#include "heterochaos/symbolic.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace heterochaos {

enum class AxisClass { stable, neutral, unstable };

enum class StabilityClass { one_d_unstable, two_d_unstable, neutral, other };

inline std::string to_string(StabilityClass c) {
    switch (c) {
    case StabilityClass::one_d_unstable: return "1d";
    case StabilityClass::two_d_unstable: return "2d";
    case StabilityClass::neutral: return "neutral";
    case StabilityClass::other: return "other";
    }
    return "other";
}

inline StabilityClass parse_stability_class(std::string_view s) {
    if (s == "1d") return StabilityClass::one_d_unstable;
    if (s == "2d") return StabilityClass::two_d_unstable;
    if (s == "neutral") return StabilityClass::neutral;
    if (s == "other") return StabilityClass::other;
    throw ValidationError("unknown stability class '" + std::string(s) + "' (expected 1d, 2d, neutral, other)");
}

inline AxisClass classify_multiplier(const Rational& chi) {
    const auto c = chi <=> Rational(1);
    if (c < 0) return AxisClass::stable;
    if (c > 0) return AxisClass::unstable;
    return AxisClass::neutral;
}

/// Per-axis multipliers: X,Z in 2D and X,Y,Z in 3D. 1D unstable means
/// expanding only in X; 2D unstable means expanding in X and Z.
inline StabilityClass classify_multipliers(const std::vector<Rational>& chi) {
    const Rational one(1);
    for (const auto& c : chi)
        if (c == one) return StabilityClass::neutral;
    const bool x_up = chi.front() > one;
    const bool z_up = chi.back() > one;
    const bool y_down = chi.size() == 2 || chi[1] < one;
    if (x_up && y_down) return z_up ? StabilityClass::two_d_unstable : StabilityClass::one_d_unstable;
    return StabilityClass::other;
}

/// Per-axis composition of the branch actions along a word, first symbol first.
inline std::vector<AffinePair> compose_word(const MapSystem& m, const Word& w) {
    std::vector<AffinePair> acc(m.dim(), AffinePair{Rational(0), Rational(1)});
    for (auto sym : w) {
        const auto& br = m.branch(sym);
        for (std::size_t a = 0; a < m.dim(); ++a) acc[a] = acc[a].then(br.action[a]);
    }
    return acc;
}

struct PeriodicOrbit {
    Word word;
    Point point;
    std::vector<Rational> chi;
    StabilityClass stability = StabilityClass::other;
    /// Set when one axis composes to the identity: every value in this
    /// interval on that axis gives a periodic point with the same word.
    std::optional<std::size_t> neutral_axis;
    std::optional<HalfOpenInterval> neutral_family;
    /// Some orbit point lies on the boundary of its symbol set.
    bool boundary = false;

    std::size_t period() const { return word.size(); }
    std::vector<AxisClass> axis_classes() const {
        std::vector<AxisClass> out;
        for (const auto& c : chi) out.push_back(classify_multiplier(c));
        return out;
    }
    std::vector<Point> orbit_points(const MapSystem& m) const {
        std::vector<Point> pts{point};
        for (std::size_t i = 1; i < word.size(); ++i) pts.push_back(m.branch(word[i - 1]).apply(pts.back()));
        return pts;
    }
};

/// The periodic orbit following w, or nullopt when the candidate leaves the
/// prescribed symbol sets or an axis is a pure translation.
inline std::optional<PeriodicOrbit> fixed_point_of_word(const MapSystem& m, const Word& w) {
    if (w.empty()) throw ValidationError("empty word");
    const auto composed = compose_word(m, w);
    PeriodicOrbit orb;
    orb.word = w;
    orb.point.resize(m.dim());
    for (std::size_t a = 0; a < m.dim(); ++a) {
        const auto& pair = composed[a];
        orb.chi.push_back(pair.slope.abs());
        if (pair.slope == Rational(1)) {
            if (pair.offset != Rational(0)) return std::nullopt;
            // Identity on this axis: the valid values are those whose forward
            // chain stays in the word's domains.
            std::optional<HalfOpenInterval> s = HalfOpenInterval::unit();
            for (auto sym : w) {
                const auto& br = m.branch(sym);
                auto cut = intersect(*s, br.domain[a]).interval;
                if (!cut) return std::nullopt;
                s = br.action[a].image(*cut);
            }
            orb.neutral_axis = a;
            orb.neutral_family = *s;
            orb.point[a] = (s->lo() + s->hi()) / Rational(2);
        } else {
            orb.point[a] = pair.offset / (Rational(1) - pair.slope);
        }
    }
    if (!Box::unit(m.dim()).contains(orb.point)) return std::nullopt;
    Point q = orb.point;
    for (auto sym : w) {
        const auto& br = m.branch(sym);
        if (!br.domain.contains(q)) return std::nullopt;
        if (m.on_boundary(q, sym)) orb.boundary = true;
        q = br.apply(q);
    }
    if (q != orb.point) throw InvariantViolation("composed fixed point does not close its orbit");
    orb.stability = classify_multipliers(orb.chi);
    return orb;
}

/// Index of the lexicographically least rotation.
inline std::size_t least_rotation(const Word& w) {
    const std::size_t n = w.size();
    std::size_t best = 0;
    for (std::size_t r = 1; r < n; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto a = w[(r + i) % n], b = w[(best + i) % n];
            if (a != b) {
                if (a < b) best = r;
                break;
            }
        }
    }
    return best;
}

inline Word canonical_rotation(const Word& w) {
    const std::size_t r = least_rotation(w);
    Word out(w.begin() + static_cast<std::ptrdiff_t>(r), w.end());
    out.insert(out.end(), w.begin(), w.begin() + static_cast<std::ptrdiff_t>(r));
    return out;
}

inline bool is_primitive(const Word& w) {
    const std::size_t n = w.size();
    for (std::size_t p = 1; p < n; ++p) {
        if (n % p) continue;
        bool periodic = true;
        for (std::size_t i = p; i < n && periodic; ++i) periodic = w[i] == w[i - p];
        if (periodic) return false;
    }
    return true;
}

struct EnumerateOptions {
    std::optional<StabilityClass> filter;
    /// Include neutral families (only meaningful without a filter).
    bool include_neutral = true;
    /// Maximum number of word prefixes visited.
    std::size_t word_budget = 200'000'000;
};

/// All periodic orbits of primitive period <= max_period, one per necklace,
/// ordered by period then canonical word.
inline std::vector<PeriodicOrbit> enumerate_periodic(const MapSystem& m, std::size_t max_period,
                                                     const EnumerateOptions& opt = {}) {
    if (max_period < 1) throw ValidationError("max period must be at least 1");
    const Admissibility adm(m);
    const std::size_t k = m.size();
    std::vector<PeriodicOrbit> out;
    Word a(max_period + 1, 0); // 1-based pre-necklace letters
    std::vector<AdmissibilityState> states;
    states.reserve(max_period + 1);
    states.push_back(adm.initial());
    std::size_t visited = 0;

    auto keep = [&](const PeriodicOrbit& orb) {
        if (opt.filter) return orb.stability == *opt.filter;
        return opt.include_neutral || orb.stability != StabilityClass::neutral;
    };

    // Pre-necklace generation: a[1..t] with period p is a Lyndon word when p == t.
    auto extend = [&](auto&& self, std::size_t t, std::size_t p) -> void {
        if (t > 0 && p == t) {
            Word w(a.begin() + 1, a.begin() + static_cast<std::ptrdiff_t>(t) + 1);
            if (auto orb = fixed_point_of_word(m, w); orb && keep(*orb)) out.push_back(std::move(*orb));
        }
        if (t == max_period) return;
        const std::size_t first = t == 0 ? 0 : a[t + 1 - p];
        for (std::size_t j = first; j < k; ++j) {
            if (++visited > opt.word_budget)
                throw GuardExceeded("periodic enumeration exceeded its word budget of " +
                                    std::to_string(opt.word_budget));
            auto next = adm.step(states.back(), j);
            if (!next) continue;
            a[t + 1] = j;
            states.push_back(std::move(*next));
            self(self, t + 1, j == first && t > 0 ? p : t + 1);
            states.pop_back();
        }
    };
    extend(extend, 0, 1);

    std::sort(out.begin(), out.end(), [](const PeriodicOrbit& x, const PeriodicOrbit& y) {
        if (x.word.size() != y.word.size()) return x.word.size() < y.word.size();
        return x.word < y.word;
    });
    return out;
}

/// Itinerary of the same orbit under the inverse system, read from the same
/// representative point: reversed word on the primed symbols.
inline Word dual_word(const MapSystem& m, const MapSystem& inverse, const Word& w) {
    Word out;
    out.reserve(w.size());
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        const auto& sym = m.branch(*it).symbol;
        out.push_back(inverse.symbol_index(sym.ends_with("'") ? sym.substr(0, sym.size() - 1) : sym + "'"));
    }
    return out;
}

} // namespace heterochaos
