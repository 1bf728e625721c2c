#include "heterochaos/maps.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace heterochaos;

namespace {

Rational R(long n, long d = 1) { return Rational(n, d); }

Point random_point(std::mt19937_64& rng, std::size_t dim, long den = 1'000'003) {
    std::uniform_int_distribution<long> num(0, den);
    Point p;
    for (std::size_t i = 0; i < dim; ++i) p.push_back(Rational(num(rng), den));
    return p;
}

} // namespace

TEST(Presets, Hc3dPeriodTwoLegs) {
    const auto m = preset("hc3d");
    const auto s1 = m.evaluate({R(1, 4), R(3, 4), R(1, 3)});
    EXPECT_EQ(m.branch(s1.branch).symbol, "A");
    EXPECT_EQ(s1.image, (Point{R(3, 4), R(1, 2), R(1, 6)}));
    const auto s2 = m.evaluate(s1.image);
    EXPECT_EQ(m.branch(s2.branch).symbol, "B");
    EXPECT_EQ(s2.image, (Point{R(1, 4), R(3, 4), R(1, 3)}));
    EXPECT_FALSE(s1.boundary);
}

TEST(Presets, KFamilyAtTwoMatchesHc3dGeometry) {
    const auto a = preset("hc3d");
    const auto b = preset("hc3d-k(2)");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.branch(i).domain, b.branch(i).domain);
        EXPECT_EQ(a.branch(i).action, b.branch(i).action);
    }
    EXPECT_EQ(b.branch(1).symbol, "B1");
    EXPECT_EQ(b.branch(2).symbol, "B2");
}

TEST(Presets, RejectsBadNames) {
    EXPECT_THROW(preset("hc4d"), ValidationError);
    EXPECT_THROW(preset("hc3d-k(1)"), ValidationError);
    EXPECT_THROW(preset("hc3d-k(2.5)"), ValidationError);
    EXPECT_THROW(preset("hc3d-k()"), ValidationError);
}

TEST(Presets, SymbolSetShapes) {
    const auto m = preset("hc3d");
    EXPECT_EQ(m.branch(m.symbol_index("A")).domain.classify(), BoxShape::pizzabox);
    EXPECT_EQ(m.branch(m.symbol_index("D")).domain.classify(), BoxShape::pizzabox);
    EXPECT_EQ(m.branch(m.symbol_index("B")).domain.classify(), BoxShape::breadbox);
    EXPECT_EQ(m.branch(m.symbol_index("C")).domain.classify(), BoxShape::breadbox);
    EXPECT_EQ(unit_axis_labels(m.branch(m.symbol_index("A")).domain), "YZ");
    EXPECT_EQ(unit_axis_labels(m.branch(m.symbol_index("B")).domain), "Y");
}

TEST(Presets, VolumePreservation) {
    for (const char* name : {"hc3d", "hc3d-k(2)", "hc3d-k(3)", "hc3d-k(5)", "hc3d-k(6)", "baker2d", "baker3d"}) {
        const auto m = preset(name);
        for (const auto& b : m.branches()) EXPECT_EQ(b.jacobian(), R(1)) << name << " " << b.symbol;
    }
}

TEST(Presets, XActionIsATauBranch) {
    const std::vector<AffinePair> tau{{R(0), R(3)}, {R(-1), R(3)}, {R(-2), R(3)}};
    for (const char* name : {"hc3d", "hc2d", "hc3d-k(4)"}) {
        const auto m = preset(name);
        for (const auto& b : m.branches()) {
            EXPECT_NE(std::find(tau.begin(), tau.end(), b.action[0]), tau.end()) << name;
        }
    }
}

TEST(Presets, KFamilyCanExpandZFasterThanX) {
    const auto m = preset("hc3d-k(5)");
    EXPECT_EQ(m.branch(m.symbol_index("B3")).action[2].slope, R(5));
    EXPECT_EQ(m.branch(m.symbol_index("B3")).action[0].slope, R(3));
}

TEST(Evaluate, BoundaryAndFixedPoints) {
    const auto m = preset("hc3d");
    const auto s = m.evaluate({R(1, 3), R(1, 2), R(1, 4)});
    EXPECT_EQ(s.image[0], R(0));
    EXPECT_EQ(m.branch(s.branch).symbol, "D");
    EXPECT_TRUE(s.boundary);
    const auto o = m.evaluate({R(0), R(0), R(0)});
    EXPECT_EQ(o.image, (Point{R(0), R(0), R(0)}));
    EXPECT_EQ(m.branch(o.branch).symbol, "A");
    const auto c = m.evaluate({R(1), R(1), R(1)});
    EXPECT_EQ(c.image, (Point{R(1), R(1), R(1)}));
    EXPECT_EQ(m.branch(c.branch).symbol, "C");
    EXPECT_THROW(m.evaluate({R(2), R(0), R(0)}), ValidationError);
    EXPECT_THROW(m.evaluate({R(0), R(0)}), ValidationError);
}

TEST(Evaluate, TotalityOnRandomPoints) {
    std::mt19937_64 rng(11);
    for (const char* name : {"hc3d", "hc2d", "baker2d", "baker3d", "hc3d-k(5)"}) {
        const auto m = preset(name);
        for (int i = 0; i < 300; ++i) {
            const Point p = random_point(rng, m.dim(), 36);
            int owners = 0;
            for (const auto& b : m.branches()) owners += b.domain.contains(p) ? 1 : 0;
            EXPECT_EQ(owners, 1) << name << " " << format_point(p);
        }
    }
}

TEST(Inverse, DomainsAndSigma) {
    const auto inv = invert_system(preset("hc3d"));
    const auto& a = inv.branch(inv.symbol_index("A'")).domain;
    EXPECT_EQ(a.str(), "[0,1]x[0,2/3)x[0,1/2)");
    EXPECT_EQ(inv.branch(inv.symbol_index("D'")).domain.str(), "[0,1]x[0,2/3)x[1/2,1]");
    EXPECT_EQ(inv.branch(inv.symbol_index("B'")).domain.str(), "[0,1]x[2/3,5/6)x[0,1]");
    EXPECT_EQ(inv.branch(inv.symbol_index("C'")).domain.str(), "[0,1]x[5/6,1]x[0,1]");
    const auto sigma = IntervalMap::from_axis(inv, 1);
    ASSERT_EQ(sigma.size(), 3u);
    EXPECT_EQ(sigma.pieces()[0].action.slope, R(3, 2));
    EXPECT_EQ(sigma.pieces()[1].action.slope, R(6));
    EXPECT_EQ(sigma.pieces()[2].action.slope, R(6));
    EXPECT_EQ(sigma(R(4, 5)), R(4, 5));
    EXPECT_EQ(sigma(R(1, 2)), R(3, 4));
    EXPECT_EQ(inv({R(3, 4), R(1, 2), R(1, 6)}), (Point{R(1, 4), R(3, 4), R(1, 3)}));
    EXPECT_EQ(invert_system(inv).name(), "hc3d");
}

TEST(Inverse, NonInjectiveMapRejected) {
    EXPECT_THROW(invert_system(preset("hc2d")), ValidationError);
    EXPECT_NO_THROW(invert_system(preset("baker3d")));
    EXPECT_NO_THROW(invert_system(preset("hc3d-k(5)")));
}

TEST(Inverse, RoundTripOnRandomPoints) {
    std::mt19937_64 rng(5);
    for (const char* name : {"hc3d", "hc3d-k(3)", "baker3d", "baker2d"}) {
        const auto m = preset(name);
        const auto inv = invert_system(m);
        int checked = 0;
        while (checked < 500) {
            const Point p = random_point(rng, m.dim());
            const auto s = m.evaluate(p);
            if (s.boundary) continue;
            EXPECT_EQ(inv(s.image), p) << name;
            ++checked;
        }
    }
}

TEST(Orbit, TauCycleOfOneSeventh) {
    const auto tau = IntervalMap::from_axis(preset("hc3d"), 0);
    std::vector<Rational> xs{R(1, 7)};
    for (int i = 0; i < 6; ++i) xs.push_back(tau(xs.back()));
    EXPECT_EQ(xs, (std::vector<Rational>{R(1, 7), R(3, 7), R(2, 7), R(6, 7), R(4, 7), R(5, 7), R(1, 7)}));
}

TEST(Orbit, PeriodTwoAndBackward) {
    const auto m = preset("hc3d");
    const Point p{R(1, 4), R(3, 4), R(1, 3)};
    const auto seg = orbit(m, p, 2, 2);
    EXPECT_EQ(seg.start, -2);
    EXPECT_EQ(seg.at(2), p);
    EXPECT_EQ(seg.at(-2), p);
    EXPECT_EQ(m.branch(seg.symbols[2]).symbol, "A");
    EXPECT_EQ(m.branch(seg.symbols[3]).symbol, "B");
    EXPECT_FALSE(seg.boundary_index);
    for (std::size_t i = 0; i + 1 < seg.points.size(); ++i) EXPECT_EQ(m(seg.points[i]), seg.points[i + 1]);

    const auto fixed = orbit(m, {R(0), R(0), R(0)}, 5);
    for (const auto& q : fixed.points) EXPECT_EQ(q, (Point{R(0), R(0), R(0)}));
    EXPECT_EQ(fixed.boundary_index, 0);
    EXPECT_THROW(orbit(preset("hc2d"), {R(1, 4), R(1, 3)}, 1, 1), ValidationError);
}

TEST(Orbit, GuardStopsDenominatorBlowup) {
    ScopedBitLimit guard(80);
    EXPECT_THROW(orbit(preset("hc3d"), {R(1, 7), R(1, 5), R(1, 3)}, 0, 60), GuardExceeded);
}

TEST(Project, CommutesWithTwoDimensionalMap) {
    const auto f3 = preset("hc3d");
    const auto f2 = preset("hc2d");
    EXPECT_EQ(project({R(1, 4), R(3, 4), R(1, 3)}), (Point{R(1, 4), R(1, 3)}));
    EXPECT_EQ(project({R(0), R(0), R(0)}), (Point{R(0), R(0)}));
    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const Point p = random_point(rng, 3);
        EXPECT_EQ(project(f3(p)), f2(project(p)));
    }
}

TEST(Ends, SizesAndFirstLevel) {
    const auto tau = IntervalMap::from_axis(preset("hc3d"), 0);
    const auto sigma = IntervalMap::from_axis(invert_system(preset("hc3d")), 1);
    EXPECT_EQ(ends(tau, 1), (std::vector<Rational>{R(0), R(1, 3), R(2, 3), R(1)}));
    EXPECT_EQ(ends(sigma, 1), (std::vector<Rational>{R(0), R(2, 3), R(5, 6), R(1)}));
    for (unsigned n = 0; n <= 5; ++n) {
        EXPECT_EQ(ends(tau, n).size(), static_cast<std::size_t>(std::pow(3, n)) + 1);
        EXPECT_EQ(ends(sigma, n).size(), static_cast<std::size_t>(std::pow(3, n)) + 1);
    }
}

TEST(MapSpec, RoundTripsEveryPreset) {
    for (const char* name : {"hc3d", "hc2d", "baker2d", "baker3d", "hc3d-k(4)", "hc2d-k(3)"}) {
        const auto m = preset(name);
        const auto text = dump_map_spec(m);
        const auto back = parse_map_spec(text);
        EXPECT_EQ(back.name(), m.name());
        EXPECT_EQ(dump_map_spec(back), text);
    }
}

TEST(MapSpec, RejectsInconsistentSystems) {
    EXPECT_THROW(parse_map_spec("dim 2\nbranch A [0,1/2) [0,1] -> 0,2 0,1\n"), ValidationError);
    EXPECT_THROW(parse_map_spec("dim 2\nbranch A [0,1] [0,1] -> 0,2 0,1\n"), ValidationError);
    EXPECT_THROW(parse_map_spec("dim 2\nbranch A [0,1] [0,1] 0,1 0,1\n"), ValidationError);
    EXPECT_NO_THROW(parse_map_spec("# identity\ndim 2\nbranch A [0,1] [0,1] -> 0,1 0,1\n"));
}
