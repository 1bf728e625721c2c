#include "heterochaos/symbolic.hpp"

#include <gtest/gtest.h>

using namespace heterochaos;

namespace {

const MapSystem& hc3d() {
    static const MapSystem m = preset("hc3d");
    return m;
}

HalfOpenInterval z_after(const std::string& word) {
    const Admissibility adm(hc3d());
    auto s = adm.run(parse_word(hc3d(), word));
    if (!s) throw std::runtime_error("inadmissible");
    return Admissibility::z_interval(*s);
}

} // namespace

TEST(Word, ParseAndFormat) {
    const auto w = parse_word(hc3d(), "ABCD");
    EXPECT_EQ(format_word(hc3d(), w), "ABCD");
    const auto k = preset("hc3d-k(12)");
    const auto w2 = parse_word(k, "A B12 B1 D");
    EXPECT_EQ(format_word(k, w2, " "), "A B12 B1 D");
    EXPECT_EQ(parse_word(k, "AB12B1D"), w2);
    EXPECT_THROW(parse_word(hc3d(), "AXB"), ValidationError);
    EXPECT_THROW(parse_word(hc3d(), ""), ValidationError);
}

TEST(StepState, HandComputedTransitions) {
    EXPECT_EQ(z_after("A"), HalfOpenInterval(Rational(0), Rational(1, 2)));
    EXPECT_EQ(z_after("AD"), HalfOpenInterval(Rational(1, 2), Rational(3, 4)));
    EXPECT_EQ(z_after("ADC"), HalfOpenInterval(Rational(0), Rational(1, 2)));
    EXPECT_EQ(z_after("B"), HalfOpenInterval::unit());
    EXPECT_FALSE(is_admissible(hc3d(), parse_word(hc3d(), "AC")));
    EXPECT_FALSE(is_admissible(hc3d(), parse_word(hc3d(), "DB")));
}

TEST(StepState, ReachableStatesAreDyadic) {
    const Admissibility adm(hc3d());
    std::vector<AdmissibilityState> frontier{adm.initial()};
    for (int n = 0; n < 8; ++n) {
        std::vector<AdmissibilityState> next;
        for (const auto& s : frontier) {
            for (std::size_t sym = 0; sym < hc3d().size(); ++sym) {
                if (auto t = adm.step(s, sym)) {
                    EXPECT_TRUE(DyadicInterval::from_interval(Admissibility::z_interval(*t)).has_value());
                    EXPECT_EQ(t->axes.front(), HalfOpenInterval::unit());
                    next.push_back(*t);
                }
            }
        }
        frontier = std::move(next);
    }
}

TEST(Admissible, AlternatingAndWitnessFamilies) {
    std::string ab;
    for (int i = 0; i < 20; ++i) {
        ab += "AB";
        EXPECT_TRUE(is_admissible(hc3d(), parse_word(hc3d(), ab)));
    }
    for (std::size_t j = 1; j <= 12; ++j) {
        Word ajc(j, hc3d().symbol_index("A"));
        ajc.push_back(hc3d().symbol_index("C"));
        EXPECT_FALSE(is_admissible(hc3d(), ajc));
        EXPECT_FALSE(is_admissible(hc3d(), sft_witness(hc3d(), j, false))) << j;
        EXPECT_TRUE(is_admissible(hc3d(), sft_witness(hc3d(), j, true))) << j;
    }
}

TEST(Admissible, WitnessPointsFollowEveryShortWord) {
    // Every admissible word of length <= 6 is realized by a point: the
    // Z-only state misses no constraint from X or Y.
    const auto& m = hc3d();
    const Admissibility adm(m);
    for (std::size_t n = 1; n <= 6; ++n) {
        Word w(n, 0);
        while (true) {
            const bool ok = adm.is_admissible(w);
            EXPECT_EQ(witness_point(m, w).has_value(), ok) << format_word(m, w);
            std::size_t i = n;
            while (i > 0 && w[i - 1] + 1 == m.size()) w[--i] = 0;
            if (i == 0) break;
            ++w[i - 1];
        }
    }
}

TEST(Count, SmallValues) {
    const auto c = count_admissible(hc3d(), 3);
    EXPECT_EQ(c.at(1), BigInt(4));
    EXPECT_EQ(c.at(2), BigInt(14));
    EXPECT_EQ(c.at(3), BigInt(48));
    EXPECT_EQ(c.gamma(3), Rational(24, 7));
    EXPECT_EQ(brute_force_admissible(hc3d(), 1), BigInt(4));
    EXPECT_EQ(brute_force_admissible(hc3d(), 2), BigInt(14));
    EXPECT_THROW(brute_force_admissible(hc3d(), 13), ValidationError);
}

TEST(Count, DepthRecursionMatchesStateDpAndBruteForce) {
    const auto fast = count_admissible(hc3d(), 14);
    const auto states = count_admissible_states(hc3d(), 14);
    EXPECT_EQ(fast.adm, states.adm);
    for (std::size_t n = 1; n <= 7; ++n) EXPECT_EQ(fast.at(n), brute_force_admissible(hc3d(), n)) << n;
    const auto two = count_admissible(preset("hc2d"), 14);
    EXPECT_EQ(two.adm, fast.adm);
}

TEST(Count, GeneralizedFamilyUsesStateDp) {
    const auto m = preset("hc3d-k(3)");
    const auto c = count_admissible(m, 5);
    for (std::size_t n = 1; n <= 5; ++n) EXPECT_EQ(c.at(n), brute_force_admissible(m, n)) << n;
    EXPECT_THROW(count_admissible_states(m, 12, 10), GuardExceeded);
}

TEST(Entropy, TrendAboveThree) {
    const auto e = entropy_estimate(hc3d(), 20);
    EXPECT_NEAR(entropy_estimate(hc3d(), 2).log_adm_over_n, std::log(14.0) / 2, 1e-12);
    for (std::size_t i = 0; i < e.trend.size(); ++i) {
        EXPECT_GT(e.trend[i].gamma, Rational(3));
        if (e.trend[i].n >= 4) {
            EXPECT_LT(e.trend[i].gamma, e.trend[i - 1].gamma) << e.trend[i].n;
        }
    }
    EXPECT_THROW(entropy_estimate(hc3d(), 1), ValidationError);
}
