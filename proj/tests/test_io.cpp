#include <bit>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "csl/config.hpp"
#include "csl/io.hpp"

using namespace csl;
using namespace csl::io;

namespace {

// doubles from random bit patterns, so every exponent range shows up
double random_double(std::mt19937_64& gen) {
    for (;;) {
        const double x = std::bit_cast<double>(gen());
        if (std::isfinite(x)) return x;
    }
}

std::string round_trip_text(const DataFile& f) {
    std::ostringstream os;
    write_data_file(os, f);
    return os.str();
}

DataFile read_text(const std::string& text, const std::string& name = "mem") {
    std::istringstream is(text);
    return read_data_file(is, name);
}

}  // namespace

TEST(numbers, shortest_round_trip) {
    std::mt19937_64 gen(1);
    for (int i = 0; i < 100000; ++i) {
        const double x = random_double(gen);
        const auto back = try_parse_number(format_number(x));
        ASSERT_TRUE(back.has_value());
        ASSERT_EQ(std::bit_cast<std::uint64_t>(*back), std::bit_cast<std::uint64_t>(x)) << format_number(x);
    }
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1e-7), "1e-07");
    EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
    EXPECT_TRUE(std::isinf(*try_parse_number("-inf")));
    EXPECT_TRUE(std::isnan(*try_parse_number("nan")));
    EXPECT_FALSE(try_parse_number("1.0x").has_value());
    EXPECT_FALSE(try_parse_number("").has_value());
    EXPECT_EQ(*try_parse_number(" +2.5 "), 2.5);
}

TEST(data_file, fringe_round_trip_property) {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        inference::FringeScan scan;
        scan.t_sep = random_double(gen);
        const int n = static_cast<int>(unit(gen) * 50);
        for (int i = 0; i < n; ++i) scan.points.push_back({random_double(gen), unit(gen), std::nullopt});
        const auto file = make_fringe_file({{"seed", std::to_string(trial)}}, scan);
        const auto text = round_trip_text(file);
        const auto back = parse_fringe_file(read_text(text), "mem");
        ASSERT_EQ(std::bit_cast<std::uint64_t>(back.t_sep), std::bit_cast<std::uint64_t>(scan.t_sep));
        ASSERT_EQ(back.points.size(), scan.points.size());
        for (std::size_t i = 0; i < scan.points.size(); ++i) {
            ASSERT_EQ(back.points[i].alpha, scan.points[i].alpha);
            ASSERT_EQ(back.points[i].population, scan.points[i].population);
        }
        // write(read(write(x))) == write(x)
        ASSERT_EQ(round_trip_text(read_text(text)), text);
    }
}

TEST(data_file, contrast_and_exclusion_round_trip) {
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 100; ++trial) {
        inference::ContrastSeries s;
        inference::ExclusionCurve c;
        c.overlap_slope = random_double(gen);
        if (trial % 2) c.crossover_rc = random_double(gen);
        for (int i = 0; i < 10; ++i) {
            s.points.push_back({random_double(gen), random_double(gen), random_double(gen)});
            c.samples.push_back({random_double(gen), random_double(gen),
                                 i % 3 ? inference::BoundSource::overlap : inference::BoundSource::interferometric});
        }
        const auto sb = parse_contrast_file(read_text(round_trip_text(make_contrast_file({}, s))), "mem");
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            ASSERT_EQ(sb.points[i].t_sep, s.points[i].t_sep);
            ASSERT_EQ(sb.points[i].contrast, s.points[i].contrast);
            ASSERT_EQ(sb.points[i].sigma_c, s.points[i].sigma_c);
        }
        const auto cb = parse_exclusion_file(read_text(round_trip_text(make_exclusion_file({}, c))), "mem");
        ASSERT_EQ(cb.overlap_slope, c.overlap_slope);
        ASSERT_EQ(cb.crossover_rc, c.crossover_rc);
        for (std::size_t i = 0; i < c.samples.size(); ++i) {
            ASSERT_EQ(cb.samples[i].r_c, c.samples[i].r_c);
            ASSERT_EQ(cb.samples[i].lambda_bound, c.samples[i].lambda_bound);
            ASSERT_EQ(cb.samples[i].source, c.samples[i].source);
        }
    }
}

TEST(data_file, header_order_is_kept) {
    const auto f = make_fringe_file({{"kind", "fringe"}, {"b", "2"}, {"a", "1"}}, {0.5, {}});
    const auto text = round_trip_text(f);
    EXPECT_EQ(text, "# kind=fringe\n# b=2\n# a=1\n# t_s=0.5\nalpha_rad_s2,population\n");
}

TEST(data_file, schema_errors) {
    EXPECT_THROW(read_text(""), SchemaError);
    EXPECT_THROW(read_text("# only=header\n"), SchemaError);
    try {
        read_text("# t_s=1\nalpha_rad_s2,population\n1,0.5\n2\n", "f.csv");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("f.csv:4"), std::string::npos) << e.what();
    }
    EXPECT_THROW(read_text("# broken header\nx\n"), SchemaError);
    EXPECT_THROW(parse_fringe_file(read_text("t_s,contrast,sigma_c\n"), "x"), SchemaError);
    EXPECT_THROW(parse_fringe_file(read_text("alpha_rad_s2,population\n1,0.5\n"), "x"), SchemaError);  // no t_s
    EXPECT_THROW(parse_fringe_file(read_text("# t_s=1\nalpha_rad_s2,population\n1,abc\n"), "x"), SchemaError);
    EXPECT_THROW(parse_contrast_file(read_text("# kind=fringe\nt_s,contrast,sigma_c\n"), "x"), SchemaError);
    EXPECT_THROW(parse_exclusion_file(read_text("r_c_m,lambda_s,source\n1,2,elsewhere\n"), "x"), SchemaError);
}

TEST(config, defaults) {
    config::RunConfig cfg;
    EXPECT_EQ(cfg.integer("n_nucleons"), 87);
    EXPECT_EQ(cfg.real("mass_kg"), 1.44e-25);
    EXPECT_EQ(cfg.real("v2_m_s") - cfg.real("v1_m_s"), 11e-3);
    EXPECT_EQ(cfg.real("g_m_s2"), 9.812);
    EXPECT_EQ(cfg.real("sigma_m"), 1e-6);
    EXPECT_EQ(cfg.text("format"), "json");
    EXPECT_EQ(cfg.integer("rc_count"), 181);
    EXPECT_TRUE(cfg.real_list("t_list_s").empty());
}

TEST(config, load_with_line_numbers) {
    config::RunConfig cfg;
    std::istringstream ok("# comment\n\nseed = 5\nlambda_s=1e-4\nt_list_s=0.1,0.2\n");
    cfg.load(ok, "a.conf");
    EXPECT_EQ(cfg.integer("seed"), 5);
    EXPECT_EQ(cfg.real("lambda_s"), 1e-4);
    EXPECT_EQ(cfg.real_list("t_list_s"), (std::vector<double>{0.1, 0.2}));
    auto message = [](const std::string& text) {
        config::RunConfig c;
        std::istringstream is(text);
        try {
            c.load(is, "b.conf");
        } catch (const config::ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("seed=1\nbogus=2\n").find("b.conf:2: unknown key 'bogus'"), std::string::npos);
    EXPECT_NE(message("\n\nlambda_s=fast\n").find("b.conf:3: invalid value"), std::string::npos);
    EXPECT_NE(message("seed=-1\n").find("b.conf:1"), std::string::npos);
    EXPECT_NE(message("format=xml\n").find("b.conf:1"), std::string::npos);
    EXPECT_NE(message("no equals sign\n").find("b.conf:1: expected key=value"), std::string::npos);
}

TEST(config, data_file_header_as_config) {
    config::RunConfig cfg;
    std::istringstream is("# kind=fringe\n# command=simulate-fringe\n# seed=9\n# t_s=0.1\n# t_index=3\nalpha_rad_s2,population\n1,0.5\n");
    cfg.load(is, "fringe_03.csv");
    EXPECT_EQ(cfg.integer("seed"), 9);
}
