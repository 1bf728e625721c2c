#include "heterochaos/cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace heterochaos;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

/// Data rows (non-comment lines after the header), split on sep.
std::vector<std::vector<std::string>> rows(const std::string& text, char sep = ',') {
    std::vector<std::vector<std::string>> out;
    std::istringstream in(text);
    bool header = true;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line.front() == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        // Minimal RFC 4180 reader, independent of the writer.
        std::vector<std::string> cells(1);
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cells.back() += line[++i];
                else if (c == '"') quoted = false;
                else cells.back() += c;
            } else if (c == '"') {
                quoted = true;
            } else if (c == sep) {
                cells.emplace_back();
            } else {
                cells.back() += c;
            }
        }
        out.push_back(std::move(cells));
    }
    return out;
}

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("heterochaos_test_" + name)).string();
}

} // namespace

TEST(Cli, Fig8HasFourteenWordsOfLengthTwo) {
    const auto r = run({"fig8", "--max-n", "12"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = rows(r.out);
    ASSERT_EQ(t.size(), 12u);
    EXPECT_EQ(t[1][0], "2");
    EXPECT_EQ(t[1][1], "14");
    EXPECT_EQ(t[2][1], "48");
    EXPECT_EQ(t[2][2], "24/7");
    EXPECT_NE(r.out.find("N,adm,gamma,gamma_float,gamma_minus_3,three_over_n"), std::string::npos);
}

TEST(Cli, PeriodicFixedPointsOfTheSquareMap) {
    const auto r = run({"periodic", "--map", "hc2d", "--max-period", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = rows(r.out);
    ASSERT_EQ(t.size(), 4u);
    for (const auto& row : t) EXPECT_EQ(row[0], "1");
    const auto only_2d = rows(run({"periodic", "--map", "hc2d", "--max-period", "1", "--class", "2d"}).out);
    EXPECT_EQ(only_2d.size(), 2u);
}

TEST(Cli, LyapunovIsByteIdenticalAcrossRunsAndThreads) {
    const std::vector<std::string> args{"lyapunov", "--map", "hc3d", "--orbits", "10", "--steps", "1000", "--seed", "7"};
    const auto a = run(args);
    const auto b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    auto threaded = args;
    threaded.insert(threaded.end(), {"--threads", "4"});
    EXPECT_EQ(run(threaded).out, a.out);
    EXPECT_NE(a.out.find("seed=7"), std::string::npos);
    const auto t = rows(a.out);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0][2], "3");
}

TEST(Cli, ConfigIsEchoedAsComments) {
    const auto r = run({"leaf", "--x0", "1/7", "--n", "6"});
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out.rfind("# command=leaf\n# map=hc3d\n# x0=1/7\n# n=6\n", 0), 0u);
    const auto t = rows(r.out);
    ASSERT_EQ(t.size(), 7u);
    EXPECT_EQ(t[6][1], "1/7");
    EXPECT_EQ(t[6][6], "[1/2,3/4)");
}

TEST(Cli, CellsWithSeparatorsAreQuoted) {
    EXPECT_EQ(cli::quote_cell("[0,1)", ','), "\"[0,1)\"");
    EXPECT_EQ(cli::quote_cell("[0,1)", '\t'), "[0,1)");
    EXPECT_EQ(cli::quote_cell("a\"b", ','), "\"a\"\"b\"");
    const auto r = run({"periodic", "--map", "hc3d", "--max-period", "2", "--class", "neutral"});
    ASSERT_EQ(r.code, 0);
    const auto t = rows(r.out);
    ASSERT_FALSE(t.empty());
    EXPECT_EQ(t[0].size(), 13u);
    EXPECT_EQ(t[0].back().rfind("z in [", 0), 0u);
}

TEST(Cli, TsvAndOutputFile) {
    const auto path = temp_path("cover.tsv");
    const auto r = run({"cover", "--set", "H2", "--depth", "1", "--format", "tsv", "--out", path});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto t = rows(ss.str(), '\t');
    EXPECT_EQ(t.size(), 8u);
    for (const auto& row : t) EXPECT_EQ(row.size(), 9u);
    std::filesystem::remove(path);
}

TEST(Cli, MapsDumpRoundTripsThroughMapFile) {
    const auto dump = run({"maps", "dump", "--map", "hc3d-k(3)"});
    ASSERT_EQ(dump.code, 0) << dump.err;
    const auto path = temp_path("map.txt");
    std::ofstream(path) << dump.out;
    const auto loaded = parse_map_spec(dump.out);
    const auto preset_map = preset("hc3d-k(3)");
    ASSERT_EQ(loaded.size(), preset_map.size());
    for (std::size_t b = 0; b < loaded.size(); ++b) {
        EXPECT_EQ(loaded.branch(b).symbol, preset_map.branch(b).symbol);
        EXPECT_EQ(loaded.branch(b).domain, preset_map.branch(b).domain);
        EXPECT_EQ(loaded.branch(b).action, preset_map.branch(b).action);
    }
    const auto from_file = run({"adm", "--map-file", path, "--max-n", "6"});
    const auto from_preset = run({"adm", "--map", "hc3d-k(3)", "--max-n", "6"});
    ASSERT_EQ(from_file.code, 0) << from_file.err;
    EXPECT_EQ(rows(from_file.out), rows(from_preset.out));
    std::filesystem::remove(path);
}

TEST(Cli, OrbitAndInverseMap) {
    const auto r = run({"orbit", "--point", "3/4,1/2,1/6", "--forward", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto t = rows(r.out);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0][1], "B");
    EXPECT_EQ((std::vector<std::string>{t[1][2], t[1][3], t[1][4]}), (std::vector<std::string>{"1/4", "3/4", "1/3"}));
    const auto inv = run({"orbit", "--map", "hc3d^-1", "--point", "1/4,3/4,1/3", "--forward", "1"});
    ASSERT_EQ(inv.code, 0) << inv.err;
    EXPECT_EQ(rows(inv.out)[1][2], "3/4");
}

TEST(Cli, BrickAndDenseChain) {
    const auto r = run({"brick", "--target", "1/2,1/2,1/2", "--eps", "1/10"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# class=2d"), std::string::npos);
    const auto d = run({"brick", "--target", "1/2,1/2,1/2", "--eps", "1/10", "--dual"});
    ASSERT_EQ(d.code, 0) << d.err;
    EXPECT_NE(d.out.find("# class=1d"), std::string::npos);

    const auto path = temp_path("targets.txt");
    std::ofstream(path) << "# targets\n1/3,1/3,1/3\n\n2/3,1/5,4/5\n";
    const auto c = run({"dense-chain", "--targets", path});
    ASSERT_EQ(c.code, 0) << c.err;
    const auto t = rows(c.out);
    ASSERT_EQ(t.size(), 2u);
    for (const auto& row : t) EXPECT_EQ(row.back(), "1");
    std::filesystem::remove(path);
}

TEST(Cli, BirkhoffFromOrigin) {
    const auto r = run({"birkhoff", "--obs", "coord_x", "--start", "0,0,0", "--steps", "100"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(rows(r.out)[0].back(), "0");
}

TEST(Cli, ValidationErrorsExitTwo) {
    EXPECT_EQ(run({"orbit", "--point", "1/0,1,1"}).code, 2);
    EXPECT_EQ(run({"orbit", "--point", "1/2,1/2"}).code, 2);
    EXPECT_EQ(run({"adm", "--bogus"}).code, 2);
    EXPECT_EQ(run({"adm", "--map", "no-such-map"}).code, 2);
    EXPECT_EQ(run({"adm", "--format", "json"}).code, 2);
    EXPECT_EQ(run({"birkhoff", "--obs", "coord_w"}).code, 2);
    EXPECT_EQ(run({"cover", "--set", "H3"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
    const auto r = run({"leaf", "--x0", "abc"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("malformed rational"), std::string::npos);
}

TEST(Cli, GuardsExitThree) {
    {
        ScopedBitLimit limit(64);
        EXPECT_EQ(run({"orbit", "--point", "1/3,1/5,1/7", "--forward", "100"}).code, 3);
    }
    EXPECT_EQ(run({"cover", "--set", "H1", "--depth", "40"}).code, 3);
    EXPECT_EQ(run({"orbit", "--point", "1/3,1/5,1/7", "--forward", "100"}).code, 0);
}

TEST(Cli, HelpExitsZero) {
    const auto r = run({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("dense-chain"), std::string::npos);
}
