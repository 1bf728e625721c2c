#pragma once

// Command-line front end. Every subcommand writes a table (CSV or TSV)
// preceded by '#' comment lines that echo the full run configuration.
// Exit codes: 0 success, 2 invalid input, 3 resource guard exceeded.

#include "heterochaos/bricks.hpp"
#include "heterochaos/ergodic.hpp"
#include "heterochaos/periodic.hpp"
#include "heterochaos/symbolic.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace heterochaos::cli {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// RFC 4180 quoting: cells holding the separator, a quote or a newline are
/// wrapped in quotes with inner quotes doubled.
inline std::string quote_cell(const std::string& cell, char sep) {
    if (cell.find_first_of(std::string{sep, '"', '\n'}) == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Table with '#' comment lines above a header row.
struct Table {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void write(std::ostream& os, char sep) const {
        for (const auto& c : comments) os << "# " << c << '\n';
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i) os << sep;
                os << quote_cell(cells[i], sep);
            }
            os << '\n';
        };
        if (!header.empty()) line(header);
        for (const auto& r : rows) line(r);
    }
};

struct RunConfig {
    std::string subcommand;
    std::string map = "hc3d";
    std::string map_file;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 1;
    unsigned threads = detail::default_threads();
    /// Parameters echoed into the output, in order.
    std::vector<std::pair<std::string, std::string>> params;

    void param(std::string key, std::string value) { params.emplace_back(std::move(key), std::move(value)); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Preset name, "NAME^-1" for the inverse of a preset, or a map-spec file.
inline MapSystem load_map(RunConfig& cfg) {
    if (!cfg.map_file.empty()) {
        auto m = parse_map_spec(read_file(cfg.map_file));
        cfg.map = m.name();
        cfg.param("map_file", cfg.map_file);
        return m;
    }
    const std::string inv = "^-1";
    if (cfg.map.size() > inv.size() && cfg.map.ends_with(inv))
        return invert_system(preset(cfg.map.substr(0, cfg.map.size() - inv.size())));
    return preset(cfg.map);
}

inline std::vector<std::string> box_cells(const Box& b) {
    std::vector<std::string> out;
    for (const auto& iv : b.axes()) {
        out.push_back(iv.lo().str());
        out.push_back(iv.hi().str());
    }
    return out;
}

inline std::vector<std::string> box_header(std::size_t dim) {
    std::vector<std::string> out;
    for (std::size_t a = 0; a < dim; ++a) {
        const char l = static_cast<char>(std::tolower(axis_label(dim, a)));
        out.push_back(std::string(1, l) + "_lo");
        out.push_back(std::string(1, l) + "_hi");
    }
    return out;
}

inline std::string lower_label(std::size_t dim, std::size_t a) {
    return std::string(1, static_cast<char>(std::tolower(axis_label(dim, a))));
}

inline std::string shape_name(BoxShape s) {
    switch (s) {
    case BoxShape::breadbox: return "breadbox";
    case BoxShape::pizzabox: return "pizzabox";
    case BoxShape::full: return "full";
    default: return "box";
    }
}

inline Table periodic_table(const MapSystem& m, const std::vector<PeriodicOrbit>& orbits) {
    Table t;
    const std::size_t dim = m.dim();
    t.header = {"period", "word"};
    for (std::size_t a = 0; a < dim; ++a) t.header.push_back(lower_label(dim, a));
    for (std::size_t a = 0; a < dim; ++a) t.header.push_back(lower_label(dim, a) + "_float");
    for (std::size_t a = 0; a < dim; ++a) t.header.push_back("chi_" + lower_label(dim, a));
    t.header.push_back("class");
    t.header.push_back("neutral_family");
    for (const auto& o : orbits) {
        std::vector<std::string> r{std::to_string(o.period()), format_word(m, o.word)};
        for (const auto& c : o.point) r.push_back(c.str());
        for (const auto& c : o.point) r.push_back(fmt(c.to_double()));
        for (const auto& c : o.chi) r.push_back(c.str());
        r.push_back(to_string(o.stability));
        r.push_back(o.neutral_family ? lower_label(dim, *o.neutral_axis) + " in " + o.neutral_family->str() : "");
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline Table adm_table(const MapSystem& m, std::size_t max_n) {
    const auto counts = count_admissible(m, max_n);
    Table t;
    t.header = {"N", "adm", "gamma", "gamma_float", "gamma_minus_3", "three_over_n"};
    for (std::size_t n = 1; n <= max_n; ++n) {
        std::vector<std::string> r{std::to_string(n), counts.at(n).get_str()};
        if (n >= 2) {
            const auto g = counts.gamma(n);
            r.push_back(g.str());
            r.push_back(fmt(g.to_double()));
            r.push_back(fmt((g - Rational(3)).to_double()));
        } else {
            r.insert(r.end(), {"", "", ""});
        }
        r.push_back(fmt(3.0 / static_cast<double>(n)));
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline Point parse_target(const std::string& s, std::size_t dim) {
    Point p = parse_point(s);
    if (p.size() != dim) throw ValidationError("point '" + s + "' needs " + std::to_string(dim) + " coordinates");
    return p;
}

/// Parses argv-style arguments (without the program name), runs the
/// subcommand and writes its table to `out` or to --out.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact simulation of hetero-chaotic piecewise-linear maps", "heterochaos"};
    app.require_subcommand(1);
    app.fallthrough();
    RunConfig cfg;
    app.add_option("--map", cfg.map, "Preset map name (hc3d, hc2d, baker2d, baker3d, hc3d-k(K), hc2d-k(K), NAME^-1)");
    app.add_option("--map-file", cfg.map_file, "Map-spec file (overrides --map)");
    app.add_option("--out", cfg.out, "Output file (default stdout)");
    app.add_option("--format", cfg.format, "Table format")->check(CLI::IsMember({"csv", "tsv"}));
    app.add_option("--seed", cfg.seed, "Random seed");
    app.add_option("--threads", cfg.threads, "Worker threads (output does not depend on it)")
        ->check(CLI::Range(1u, 1024u));

    std::function<Table()> action;

    // Options shared by several subcommands; each subcommand binds its own.
    std::string point_s, target_s, x0_s, obs_s, set_s, cls_s = "all", eps_s = "1/1000", chain_eps = "1/20",
                targets_file;
    long forward = 10, backward = 0, leaf_n = 200, depth = 6;
    std::size_t max_period = 6, max_n = 12, orbits_n = 100, steps = 100000, points_n = 20;
    bool dual = false;

    auto* orbit_cmd = app.add_subcommand("orbit", "Exact forward/backward orbit of a point");
    orbit_cmd->add_option("--point", point_s, "Start point p/q,...")->required();
    orbit_cmd->add_option("--forward", forward, "Forward steps")->check(CLI::NonNegativeNumber);
    orbit_cmd->add_option("--backward", backward, "Backward steps")->check(CLI::NonNegativeNumber);
    orbit_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("point", point_s);
            cfg.param("forward", std::to_string(forward));
            cfg.param("backward", std::to_string(backward));
            const auto seg = orbit(m, parse_target(point_s, m.dim()), forward, backward);
            Table t;
            t.header = {"n", "symbol"};
            for (std::size_t a = 0; a < m.dim(); ++a) t.header.push_back(lower_label(m.dim(), a));
            for (std::size_t a = 0; a < m.dim(); ++a) t.header.push_back(lower_label(m.dim(), a) + "_float");
            t.header.push_back("boundary");
            for (std::size_t i = 0; i < seg.points.size(); ++i) {
                const auto& p = seg.points[i];
                const auto sym = m.locate(p);
                std::vector<std::string> r{std::to_string(seg.start + static_cast<long>(i)), m.branch(sym).symbol};
                for (const auto& c : p) r.push_back(c.str());
                for (const auto& c : p) r.push_back(fmt(c.to_double()));
                r.push_back(m.on_boundary(p, sym) ? "1" : "0");
                t.rows.push_back(std::move(r));
            }
            return t;
        };
    });

    auto* periodic_cmd = app.add_subcommand("periodic", "Periodic orbits up to a period, one per necklace");
    periodic_cmd->add_option("--max-period", max_period, "Largest period")->check(CLI::Range(1, 64));
    periodic_cmd->add_option("--class", cls_s, "Stability class filter")
        ->check(CLI::IsMember({"all", "1d", "2d", "neutral", "other"}));
    periodic_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("max_period", std::to_string(max_period));
            cfg.param("class", cls_s);
            EnumerateOptions opt;
            if (cls_s != "all") opt.filter = parse_stability_class(cls_s);
            auto t = periodic_table(m, enumerate_periodic(m, max_period, opt));
            t.comments.push_back("orbits=" + std::to_string(t.rows.size()));
            return t;
        };
    });

    auto* adm_cmd = app.add_subcommand("adm", "Admissible word counts and growth ratios");
    adm_cmd->add_option("--max-n", max_n, "Largest word length")->check(CLI::Range(1, 4096));
    adm_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("max_n", std::to_string(max_n));
            return adm_table(m, max_n);
        };
    });

    auto* lyap_cmd = app.add_subcommand("lyapunov", "Lyapunov numbers from seeded random orbits");
    lyap_cmd->add_option("--orbits", orbits_n, "Number of orbits")->check(CLI::PositiveNumber);
    lyap_cmd->add_option("--steps", steps, "Steps per orbit")->check(CLI::PositiveNumber);
    lyap_cmd->add_option("--x0", x0_s, "Single deterministic orbit from this factor coordinate");
    lyap_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            Table t;
            LyapunovEstimate est;
            std::vector<Rational> product;
            if (!x0_s.empty()) {
                cfg.param("x0", x0_s);
                cfg.param("steps", std::to_string(steps));
                auto r = lyapunov_from(m, Rational::parse(x0_s), steps);
                est = r.estimate;
                product = r.product;
            } else {
                cfg.param("orbits", std::to_string(orbits_n));
                cfg.param("steps", std::to_string(steps));
                cfg.param("seed", std::to_string(cfg.seed));
                est = lyapunov(m, orbits_n, steps, cfg.seed, cfg.threads);
            }
            const auto pred = predicted_lyapunov(m);
            if (m.k() && *m.k() == 4) t.comments.push_back("k=4 gives a Z Lyapunov number of exactly 1");
            t.header = {"axis", "lambda", "exact", "predicted", "orbit_min", "orbit_max"};
            if (!product.empty()) t.header.push_back("product_exact");
            double prod = 1.0, pred_prod = 1.0;
            for (std::size_t a = 0; a < m.dim(); ++a) {
                std::vector<std::string> r{std::string(1, axis_label(m.dim(), a)), fmt(est.lambda[a]),
                                           est.exact[a] ? est.exact[a]->str() : "", pred ? fmt((*pred)[a]) : "",
                                           fmt(est.orbit_min[a]), fmt(est.orbit_max[a])};
                if (!product.empty()) r.push_back(product[a].str());
                prod *= est.lambda[a];
                if (pred) pred_prod *= (*pred)[a];
                t.rows.push_back(std::move(r));
            }
            std::vector<std::string> r{"product", fmt(prod), "", pred ? fmt(pred_prod) : "", "", ""};
            if (!product.empty()) r.push_back("");
            t.rows.push_back(std::move(r));
            return t;
        };
    });

    auto* birk_cmd = app.add_subcommand("birkhoff", "Birkhoff averages of a named observable");
    birk_cmd->add_option("--obs", obs_s, "coord_x, coord_y, coord_z, indicator_R2 or product_xz")->required();
    birk_cmd->add_option("--points", points_n, "Number of seeded start points")->check(CLI::PositiveNumber);
    birk_cmd->add_option("--steps", steps, "Steps per orbit")->check(CLI::PositiveNumber);
    birk_cmd->add_option("--start", point_s, "Single given start point instead of seeded ones");
    birk_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            const auto obs = parse_observable(obs_s);
            cfg.param("obs", obs_s);
            cfg.param("steps", std::to_string(steps));
            Table t;
            t.header = {"index"};
            for (std::size_t a = 0; a < m.dim(); ++a) t.header.push_back(lower_label(m.dim(), a) + "0");
            t.header.push_back("average");
            if (!point_s.empty()) {
                cfg.param("start", point_s);
                const auto p = parse_target(point_s, m.dim());
                std::vector<std::string> r{"0"};
                for (const auto& c : p) r.push_back(c.str());
                r.push_back(fmt(birkhoff_from(m, obs, p, steps)));
                t.rows.push_back(std::move(r));
                return t;
            }
            cfg.param("points", std::to_string(points_n));
            cfg.param("seed", std::to_string(cfg.seed));
            const auto res = birkhoff(m, obs, points_n, steps, cfg.seed, cfg.threads);
            t.comments.push_back("mean=" + fmt(res.mean));
            t.comments.push_back("spread=" + fmt(res.spread));
            for (std::size_t i = 0; i < res.averages.size(); ++i) {
                std::vector<std::string> r{std::to_string(i)};
                for (const auto& c : res.starts[i]) r.push_back(c.str());
                r.push_back(fmt(res.averages[i]));
                t.rows.push_back(std::move(r));
            }
            return t;
        };
    });

    auto* leaf_cmd = app.add_subcommand("leaf", "Exact images of the leaf {x0} x [0,1] x [0,1]");
    leaf_cmd->add_option("--x0", x0_s, "Leaf coordinate p/q")->required();
    leaf_cmd->add_option("--n", leaf_n, "Steps")->check(CLI::NonNegativeNumber);
    leaf_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("x0", x0_s);
            cfg.param("n", std::to_string(leaf_n));
            const auto rec = leaf_contraction(m, Rational::parse(x0_s), leaf_n);
            Table t;
            t.header = {"n", "x", "y_width", "y_width_float", "y_pieces", "y_hull", "z", "z_length_float",
                        "diameter_bound"};
            for (const auto& s : rec.steps) {
                t.rows.push_back({std::to_string(s.n), s.x.str(), s.y_width.str(), fmt(s.y_width.to_double()),
                                  s.y_pieces.get_str(), s.y_hull.str(), s.z.str(), fmt(s.z.length().to_double()),
                                  fmt(s.diameter_bound)});
            }
            return t;
        };
    });

    auto* brick_cmd = app.add_subcommand("brick", "Interior brick and certified periodic point near a target");
    brick_cmd->add_option("--target", target_s, "Target point p/q,p/q,p/q")->required();
    brick_cmd->add_option("--eps", eps_s, "Distance bound as a rational");
    brick_cmd->add_flag("--dual", dual, "Run on the inverse system (1D unstable points of the map)");
    brick_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("target", target_s);
            cfg.param("eps", eps_s);
            cfg.param("dual", dual ? "1" : "0");
            const auto bs = dual ? BrickSystem::dual(m) : BrickSystem::forward(m);
            const auto r = brick_pipeline(bs, parse_target(target_s, 3), Rational::parse(eps_s));
            const auto orb = dual ? as_inverse_orbit(bs, r.orbit) : r.orbit;
            const auto& sys = bs.system();
            Table t;
            t.comments.push_back("brick_system=" + sys.name());
            t.comments.push_back("j=" + std::to_string(r.brick.j) + " k=" + std::to_string(r.brick.k));
            t.comments.push_back("periodic_point=" + format_point(orb.point));
            t.comments.push_back("period=" + std::to_string(orb.period()));
            t.comments.push_back("word=" + format_word(sys, r.orbit.word));
            std::string chi;
            for (const auto& c : orb.chi) chi += (chi.empty() ? "" : ",") + c.str();
            t.comments.push_back("chi=" + chi);
            t.comments.push_back("class=" + to_string(orb.stability));
            t.header = {"m", "symbol"};
            for (auto& h : box_header(3)) t.header.push_back(h);
            t.header.push_back("shape");
            for (long i = -r.brick.j; i <= r.brick.k; ++i) {
                std::vector<std::string> row{std::to_string(i), i < r.brick.k ? sys.branch(r.brick.symbol(i)).symbol : ""};
                for (auto& c : box_cells(r.brick.box(i))) row.push_back(c);
                row.push_back(shape_name(r.brick.box(i).classify()));
                t.rows.push_back(std::move(row));
            }
            return t;
        };
    });

    auto* chain_cmd = app.add_subcommand("dense-chain", "Nested breadboxes visiting bricks around given targets");
    chain_cmd->add_option("--targets", targets_file, "File with one target point per line")->required();
    chain_cmd->add_option("--eps", chain_eps, "Brick size bound as a rational");
    chain_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("targets", targets_file);
            cfg.param("eps", chain_eps);
            const auto bs = BrickSystem::forward(m);
            std::istringstream in(read_file(targets_file));
            std::vector<Brick> bricks;
            for (std::string line; std::getline(in, line);) {
                if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
                line.erase(0, line.find_first_not_of(" \t\r"));
                line.erase(line.find_last_not_of(" \t\r") + 1);
                if (line.empty()) continue;
                bricks.push_back(brick_pipeline(bs, parse_target(line, 3), Rational::parse(chain_eps)).brick);
            }
            if (bricks.empty()) throw ValidationError("no targets in '" + targets_file + "'");
            const auto links = two_brick_chain(bs, bricks);
            Table t;
            t.header = {"s", "N", "M", "U", "B0", "contained"};
            for (std::size_t s = 0; s < links.size(); ++s) {
                const Box img = map_box(m, links.back().U, links.back().chain, static_cast<std::size_t>(links[s].N));
                t.rows.push_back({std::to_string(s), std::to_string(links[s].N), std::to_string(links[s].M),
                                  links[s].U.str(), bricks[s].box(0).str(), bricks[s].box(0).covers(img) ? "1" : "0"});
            }
            return t;
        };
    });

    auto* cover_cmd = app.add_subcommand("cover", "Finite-depth box cover of an index or heteroclinic set");
    cover_cmd->add_option("--set", set_s, "H1, H2, H21 or H12")->required();
    cover_cmd->add_option("--depth", depth, "Steps forward and backward")->check(CLI::NonNegativeNumber);
    cover_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("set", set_s);
            cfg.param("depth", std::to_string(depth));
            const auto c = invariant_cover(m, parse_cover_set(set_s), depth);
            Table t;
            t.comments.push_back("boxes=" + std::to_string(c.boxes.size()));
            t.comments.push_back("volume=" + c.volume().str());
            if (!c.boxes.empty()) {
                std::string hull;
                for (std::size_t a = 0; a < m.dim(); ++a) hull += (a ? "x" : "") + c.hull(a).str();
                t.comments.push_back("hull=" + hull);
            }
            t.header = {"index", "word"};
            for (auto& h : box_header(m.dim())) t.header.push_back(h);
            t.header.push_back("volume");
            for (std::size_t i = 0; i < c.boxes.size(); ++i) {
                std::vector<std::string> r{std::to_string(i), format_word(m, c.boxes[i].word)};
                for (auto& s : box_cells(c.boxes[i].box)) r.push_back(s);
                r.push_back(c.boxes[i].box.volume().str());
                t.rows.push_back(std::move(r));
            }
            return t;
        };
    });

    bool dumped = false;
    auto* maps_cmd = app.add_subcommand("maps", "Map utilities");
    maps_cmd->require_subcommand(1);
    auto* dump_cmd = maps_cmd->add_subcommand("dump", "Print the map in map-spec format");
    std::string dump_text;
    dump_cmd->callback([&] {
        action = [&] {
            cfg.subcommand = "maps dump";
            const auto m = load_map(cfg);
            dump_text = dump_map_spec(m);
            dumped = true;
            return Table{};
        };
    });

    auto* fig4_cmd = app.add_subcommand("fig4", "Periodic points of the 2D map split into 1D and 2D unstable classes");
    std::size_t fig4_period = 13;
    fig4_cmd->add_option("--max-period", fig4_period, "Largest period")->check(CLI::Range(1, 64));
    fig4_cmd->callback([&] {
        action = [&] {
            if (cfg.map_file.empty() && !app.get_option("--map")->count()) cfg.map = "hc2d";
            const auto m = load_map(cfg);
            cfg.param("max_period", std::to_string(fig4_period));
            EnumerateOptions opt;
            opt.include_neutral = false;
            auto all = enumerate_periodic(m, fig4_period, opt);
            std::vector<PeriodicOrbit> keep;
            std::size_t n1 = 0, n2 = 0;
            for (auto& o : all) {
                if (o.stability == StabilityClass::one_d_unstable) ++n1;
                else if (o.stability == StabilityClass::two_d_unstable) ++n2;
                else continue;
                keep.push_back(std::move(o));
            }
            auto t = periodic_table(m, keep);
            t.comments.push_back("orbits_1d=" + std::to_string(n1));
            t.comments.push_back("orbits_2d=" + std::to_string(n2));
            return t;
        };
    });

    auto* fig8_cmd = app.add_subcommand("fig8", "Growth ratios of admissible word counts");
    std::size_t fig8_n = 18;
    fig8_cmd->add_option("--max-n", fig8_n, "Largest word length")->check(CLI::Range(2, 4096));
    fig8_cmd->callback([&] {
        action = [&] {
            const auto m = load_map(cfg);
            cfg.param("max_n", std::to_string(fig8_n));
            return adm_table(m, fig8_n);
        };
    });

    std::vector<const char*> argv{"heterochaos"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    for (auto* sub : app.get_subcommands())
        if (cfg.subcommand.empty()) cfg.subcommand = sub->get_name();
    try {
        Table t = action();
        std::vector<std::string> header{"command=" + cfg.subcommand, "map=" + cfg.map};
        for (const auto& [k, v] : cfg.params) header.push_back(k + "=" + v);
        t.comments.insert(t.comments.begin(), header.begin(), header.end());
        std::ofstream file;
        std::ostream* os = &out;
        if (!cfg.out.empty()) {
            file.open(cfg.out);
            if (!file) throw ValidationError("cannot write '" + cfg.out + "'");
            os = &file;
        }
        if (dumped) {
            for (const auto& c : t.comments) *os << "# " << c << '\n';
            *os << dump_text;
        } else {
            t.write(*os, cfg.format == "tsv" ? '\t' : ',');
        }
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const GuardExceeded& e) {
        err << "guard exceeded: " << e.what() << '\n';
        return 3;
    }
}

} // namespace heterochaos::cli
