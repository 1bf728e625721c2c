#pragma once

// Symbol-word admissibility by exact interval transfer, admissible-word
// counting and growth-rate estimates.

#include "heterochaos/maps.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace heterochaos {

/// Branch indices into a MapSystem.
using Word = std::vector<std::size_t>;

inline std::string format_word(const MapSystem& m, const Word& w, std::string_view sep = "") {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) s += sep;
        s += m.branch(w[i]).symbol;
    }
    return s;
}

/// Parses "ABAB", "A B1 B2" or "A,B1,B2". Unseparated text is split by
/// longest-matching symbol.
inline Word parse_word(const MapSystem& m, std::string_view text) {
    Word w;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == ' ' || c == ',' || c == '.' || c == '-') {
            ++i;
            continue;
        }
        std::optional<std::size_t> best;
        std::size_t best_len = 0;
        for (std::size_t b = 0; b < m.size(); ++b) {
            const auto& sym = m.branch(b).symbol;
            if (sym.size() > best_len && text.substr(i, sym.size()) == sym) {
                best = b;
                best_len = sym.size();
            }
        }
        if (!best) throw ValidationError("word '" + std::string(text) + "' has an unknown symbol at position " +
                                         std::to_string(i) + " for map " + m.name());
        w.push_back(*best);
        i += best_len;
    }
    if (w.empty()) throw ValidationError("empty word");
    return w;
}

/// Reachable set of a word prefix, restricted to the axes on which some
/// branch domain is not the whole unit interval (for hc3d: X and Z; X is
/// always full again after one step, so in effect the Z interval).
struct AdmissibilityState {
    std::vector<HalfOpenInterval> axes;
    friend bool operator==(const AdmissibilityState&, const AdmissibilityState&) = default;
};

class Admissibility {
public:
    explicit Admissibility(const MapSystem& m) : m_(m) {
        for (std::size_t a = 0; a < m.dim(); ++a) {
            for (const auto& b : m.branches()) {
                if (!(b.domain[a] == HalfOpenInterval::unit())) {
                    constrained_.push_back(a);
                    break;
                }
            }
        }
    }

    const MapSystem& system() const { return m_; }
    const std::vector<std::size_t>& constrained_axes() const { return constrained_; }

    AdmissibilityState initial() const {
        return {std::vector<HalfOpenInterval>(constrained_.size(), HalfOpenInterval::unit())};
    }

    /// Next state, or nullopt when the branch domain meets the state only in
    /// a set without interior.
    std::optional<AdmissibilityState> step(const AdmissibilityState& s, std::size_t sym) const {
        const auto& br = m_.branch(sym);
        AdmissibilityState next;
        next.axes.reserve(constrained_.size());
        for (std::size_t i = 0; i < constrained_.size(); ++i) {
            const std::size_t a = constrained_[i];
            auto r = intersect(s.axes[i], br.domain[a]);
            if (!r.interval) return std::nullopt;
            next.axes.push_back(br.action[a].image(*r.interval));
        }
        return next;
    }

    std::optional<AdmissibilityState> run(const Word& w) const {
        std::optional<AdmissibilityState> s = initial();
        for (auto sym : w) {
            s = step(*s, sym);
            if (!s) return std::nullopt;
        }
        return s;
    }

    bool is_admissible(const Word& w) const { return run(w).has_value(); }

    /// Z interval of a state (last axis).
    static const HalfOpenInterval& z_interval(const AdmissibilityState& s) { return s.axes.back(); }

private:
    const MapSystem& m_;
    std::vector<std::size_t> constrained_;
};

inline bool is_admissible(const MapSystem& m, const Word& w) { return Admissibility(m).is_admissible(w); }

/// A point whose forward itinerary starts with w: the midpoint of the
/// reachable box pulled back along the word. Verified by forward iteration.
inline std::optional<Point> witness_point(const MapSystem& m, const Word& w) {
    Box reach = Box::unit(m.dim());
    for (auto sym : w) {
        auto cut = intersect(reach, m.branch(sym).domain);
        if (!cut) return std::nullopt;
        reach = m.branch(sym).image_of(*cut);
    }
    Point p;
    for (const auto& a : reach.axes()) p.push_back((a.lo() + a.hi()) / Rational(2));
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
        const auto& br = m.branch(*it);
        for (std::size_t a = 0; a < p.size(); ++a) p[a] = br.action[a].inverse().apply(p[a]);
    }
    Point q = p;
    for (auto sym : w) {
        if (m.locate(q) != sym) throw InvariantViolation("witness point does not follow its word");
        q = m(q);
    }
    return p;
}

struct AdmissibleCounts {
    /// adm[n-1] = number of admissible words of length n.
    std::vector<BigInt> adm;

    std::size_t max_n() const { return adm.size(); }
    const BigInt& at(std::size_t n) const { return adm.at(n - 1); }
    /// adm(N)/adm(N-1) for N >= 2.
    Rational gamma(std::size_t n) const {
        if (n < 2 || n > adm.size()) throw ValidationError("growth rate needs 2 <= N <= max N");
        return Rational(at(n), at(n - 1));
    }
};

namespace detail {

/// Push/pop description of a system whose Z dynamics is a binary stack:
/// some branches halve Z into one side, the others double one half back.
/// Then the number of admissible continuations depends only on the stack
/// depth of the current Z interval.
struct StackShape {
    std::size_t pushes = 0;
    std::size_t pops_per_half = 0;
};

inline std::optional<StackShape> stack_shape(const MapSystem& m) {
    const std::size_t z = m.dim() - 1;
    const auto full = HalfOpenInterval::unit();
    const HalfOpenInterval lower(Rational(0), Rational(1, 2)), upper(Rational(1, 2), Rational(1));
    std::size_t push_lo = 0, push_hi = 0, pop_lo = 0, pop_hi = 0;
    for (const auto& b : m.branches()) {
        for (std::size_t a = 0; a < z; ++a) {
            if (!(b.domain[a] == full) && !(b.image()[a] == full)) return std::nullopt;
        }
        const auto& dz = b.domain[z];
        const auto& act = b.action[z];
        if (dz == full && act.slope == Rational(1, 2)) {
            if (act.offset == Rational(0)) ++push_lo;
            else if (act.offset == Rational(1, 2)) ++push_hi;
            else return std::nullopt;
        } else if (act.slope == Rational(2) && dz == lower && act.offset == Rational(0)) {
            ++pop_lo;
        } else if (act.slope == Rational(2) && dz == upper && act.offset == Rational(-1)) {
            ++pop_hi;
        } else {
            return std::nullopt;
        }
    }
    if (pop_lo != pop_hi || push_lo != push_hi || push_lo == 0) return std::nullopt;
    return StackShape{push_lo + push_hi, pop_lo};
}

inline AdmissibleCounts count_by_depth(const StackShape& s, std::size_t max_n) {
    // ways[d] = number of admissible prefixes of the current length whose Z
    // interval has stack depth d (depth 0 is the whole interval).
    std::vector<BigInt> ways(max_n + 2, BigInt(0));
    ways[0] = 1;
    AdmissibleCounts out;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<BigInt> next(max_n + 2, BigInt(0));
        for (std::size_t d = 0; d + 1 < ways.size(); ++d) {
            if (ways[d] == 0) continue;
            next[d + 1] += ways[d] * static_cast<unsigned long>(s.pushes);
            if (d == 0) next[0] += ways[d] * static_cast<unsigned long>(2 * s.pops_per_half);
            else next[d - 1] += ways[d] * static_cast<unsigned long>(s.pops_per_half);
        }
        ways = std::move(next);
        BigInt total = 0;
        for (const auto& w : ways) total += w;
        out.adm.push_back(total);
    }
    return out;
}

struct StateLess {
    bool operator()(const AdmissibilityState& a, const AdmissibilityState& b) const {
        for (std::size_t i = 0; i < a.axes.size(); ++i) {
            if (a.axes[i].lo() != b.axes[i].lo()) return a.axes[i].lo() < b.axes[i].lo();
            if (a.axes[i].hi() != b.axes[i].hi()) return a.axes[i].hi() < b.axes[i].hi();
        }
        return false;
    }
};

} // namespace detail

/// Exact counts by forward dynamic programming over distinct reachable states.
inline AdmissibleCounts count_admissible_states(const MapSystem& m, std::size_t max_n,
                                                std::size_t state_budget = 1u << 20) {
    if (max_n < 1) throw ValidationError("N must be at least 1");
    const Admissibility adm(m);
    std::map<AdmissibilityState, BigInt, detail::StateLess> cur{{adm.initial(), BigInt(1)}};
    AdmissibleCounts out;
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::map<AdmissibilityState, BigInt, detail::StateLess> next;
        for (const auto& [state, ways] : cur) {
            for (std::size_t sym = 0; sym < m.size(); ++sym) {
                if (auto s = adm.step(state, sym)) next[*s] += ways;
            }
        }
        if (next.size() > state_budget)
            throw GuardExceeded("admissibility DP exceeded its state budget of " + std::to_string(state_budget) +
                                " at N = " + std::to_string(n));
        BigInt total = 0;
        for (const auto& [state, ways] : next) total += ways;
        out.adm.push_back(total);
        cur = std::move(next);
    }
    return out;
}

/// adm(1..max_n). Uses the depth recursion when the Z dynamics is a binary
/// stack (hc2d, hc3d), otherwise the state DP.
inline AdmissibleCounts count_admissible(const MapSystem& m, std::size_t max_n, std::size_t state_budget = 1u << 20) {
    if (max_n < 1) throw ValidationError("N must be at least 1");
    if (auto shape = detail::stack_shape(m)) return detail::count_by_depth(*shape, max_n);
    return count_admissible_states(m, max_n, state_budget);
}

/// Counts admissible words of length n by visiting every word over the
/// alphabet; prefixes share their state so each word costs one step.
inline BigInt brute_force_admissible(const MapSystem& m, std::size_t n, std::size_t max_n = 12) {
    if (n < 1) throw ValidationError("N must be at least 1");
    if (n > max_n) throw ValidationError("brute force limited to N <= " + std::to_string(max_n));
    const Admissibility adm(m);
    const std::size_t s = m.size();
    BigInt count = 0;
    std::vector<std::optional<AdmissibilityState>> states(n + 1);
    states[0] = adm.initial();
    Word w(n, 0);
    std::size_t from = 0;
    while (true) {
        for (std::size_t i = from; i < n; ++i) states[i + 1] = states[i] ? adm.step(*states[i], w[i]) : std::nullopt;
        if (states[n]) ++count;
        std::size_t i = n;
        while (i > 0 && w[i - 1] + 1 == s) {
            w[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
        ++w[i - 1];
        from = i - 1;
    }
    return count;
}

struct EntropyEstimate {
    std::size_t n = 0;
    double log_adm_over_n = 0;
    /// (N, Gamma(N) - 3, 3/N) for N = 2..n
    struct Row {
        std::size_t n;
        Rational gamma;
        double gamma_minus_3;
        double three_over_n;
    };
    std::vector<Row> trend;
};

inline EntropyEstimate entropy_estimate(const MapSystem& m, std::size_t n) {
    if (n < 2) throw ValidationError("entropy estimate needs N >= 2");
    const auto counts = count_admissible(m, n);
    EntropyEstimate e;
    e.n = n;
    e.log_adm_over_n = std::log(Rational(counts.at(n)).to_double()) / static_cast<double>(n);
    for (std::size_t k = 2; k <= n; ++k) {
        const Rational g = counts.gamma(k);
        e.trend.push_back({k, g, g.to_double() - 3.0, 3.0 / static_cast<double>(k)});
    }
    return e;
}

/// A^j B^(j-1) C (inadmissible) and A^j B^j C (admissible) on hc3d/hc2d.
inline Word sft_witness(const MapSystem& m, std::size_t j, bool admissible) {
    if (j < 1) throw ValidationError("witness needs j >= 1");
    const auto a = m.symbol_index("A"), b = m.symbol_index("B"), c = m.symbol_index("C");
    Word w(j, a);
    w.insert(w.end(), admissible ? j : j - 1, b);
    w.push_back(c);
    return w;
}

} // namespace heterochaos
