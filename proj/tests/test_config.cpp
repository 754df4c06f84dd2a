// test_config.cpp — Key/value parsing, validation errors and canonical echo round trips

#include "qet/config.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <random>

namespace qet {
namespace {

constexpr const char* kThreeSite = R"(# three-site chain
chain.omega = 1.5, 1.2, 1.0
chain.v = 0.1
chain.v.2.3 = 0.15
chain.kappa = 0.005
noise.c = 0
noise.c.1.2 = -1   # nearest neighbours
noise.c.2.3 = -1
noise.c.1.3 = 1
noise.tau_c = 0.3
noise.epsilon_sq = 0.1
initial.site = 1
)";

TEST(KeyValueFile, ParsesCommentsAndWhitespace) {
    const auto file = KeyValueFile::parse("  a.b =  1, 2  # trailing\n\n# only comment\nc = x\n");
    ASSERT_EQ(file.entries().size(), 2u);
    EXPECT_EQ(file.find("a.b")->value, "1, 2");
    EXPECT_EQ(file.find("a.b")->line, 1);
    EXPECT_EQ(file.find("c")->line, 4);
    EXPECT_EQ(file.find("missing"), nullptr);
}

TEST(KeyValueFile, ErrorsCarryLineNumbers) {
    try {
        KeyValueFile::parse("a = 1\nno equals sign\n");
        FAIL();
    } catch (const ConfigError& err) {
        EXPECT_EQ(err.line(), 2);
    }
    try {
        KeyValueFile::parse("a = 1\nb = 2\na = 3\n");
        FAIL();
    } catch (const ConfigError& err) {
        EXPECT_EQ(err.line(), 3);
        EXPECT_EQ(err.key(), "a");
    }
    EXPECT_THROW(KeyValueFile::parse("a =\n"), ConfigError);
    EXPECT_THROW(KeyValueFile::load("/nonexistent/run.cfg"), ConfigError);
}

TEST(KeyValueFile, SetReplacesOrAppends) {
    auto file = KeyValueFile::parse("a = 1\n");
    file.set("a", "2");
    file.set("b", "3");
    EXPECT_EQ(file.find("a")->value, "2");
    EXPECT_EQ(file.find("b")->value, "3");
    EXPECT_EQ(file.entries().size(), 2u);
}

TEST(ParseRunConfig, FillsMatricesAndOverrides) {
    const auto cfg = parse_run_config(kThreeSite);
    ASSERT_EQ(cfg.chain.n_sites(), 3);
    EXPECT_DOUBLE_EQ(cfg.chain.v(0, 1), 0.1);
    EXPECT_DOUBLE_EQ(cfg.chain.v(2, 1), 0.15);
    EXPECT_DOUBLE_EQ(cfg.chain.v(0, 2), 0.0);
    EXPECT_DOUBLE_EQ(cfg.noise.c(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(cfg.noise.c(2, 0), 1.0);
    EXPECT_DOUBLE_EQ(cfg.noise.c(1, 1), 1.0);
    EXPECT_DOUBLE_EQ(cfg.noise.tau_c(0, 2), 0.3);
    EXPECT_DOUBLE_EQ(cfg.noise.delta(0, 1), 1.0);
    EXPECT_EQ(cfg.initial_site, 0);
    EXPECT_TRUE(cfg.auto_step);
    EXPECT_EQ(cfg.engine, Engine::tcl2);
    EXPECT_EQ(cfg.trap, TrapMode::population_only);
    EXPECT_DOUBLE_EQ(resolved_step(cfg), 0.01);
}

TEST(ParseRunConfig, AutoStepFollowsStabilityLimit) {
    const auto cfg = parse_run_config("chain.omega = 1.5, 0.5\nchain.v = 0.1\nnoise.tau_c = 0.1\n");
    EXPECT_DOUBLE_EQ(resolved_step(cfg), 0.005);
    EXPECT_DOUBLE_EQ(memory_time(cfg), 0.1);
    const auto lind = parse_run_config("chain.omega = 1.5, 0.5\nchain.v = 0.1\nnoise.tau_c = 0.1\nengine = lindblad\n");
    EXPECT_EQ(memory_time(lind), std::numeric_limits<double>::infinity());
    EXPECT_DOUBLE_EQ(resolved_step(lind), 0.01);
}

struct BadConfig {
    const char* text;
    const char* key;
};

class ParseRunConfigRejects : public ::testing::TestWithParam<BadConfig> {};

TEST_P(ParseRunConfigRejects, WithKey) {
    const auto p = GetParam();
    try {
        parse_run_config(p.text);
        FAIL() << "accepted: " << p.text;
    } catch (const ConfigError& err) {
        EXPECT_EQ(err.key(), p.key) << err.what();
    }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, ParseRunConfigRejects,
    ::testing::Values(BadConfig{"chain.v = 0.1\n", "chain.omega"},
                      BadConfig{"chain.omega = 1\n", "chain.omega"},
                      BadConfig{"chain.omega = 1, 2\nchain.kapa = 1\n", "chain.kapa"},
                      BadConfig{"chain.omega = 1, 2\nnoise.c = one\n", "noise.c"},
                      BadConfig{"chain.omega = 1, 2\nnoise.c.1.3 = 0.5\n", "noise.c.1.3"},
                      BadConfig{"chain.omega = 1, 2\nnoise.c.1.1 = 0.5\n", "noise.c.1.1"},
                      BadConfig{"chain.omega = 1, 2\nchain.v.2.2 = 0.5\n", "chain.v.2.2"},
                      BadConfig{"chain.omega = 1, 2\nengine = exact\n", "engine"},
                      BadConfig{"chain.omega = 1, 2\ntrap_mode = sink\n", "trap_mode"},
                      BadConfig{"chain.omega = 1, 2\nintegrator.snapshot_stride = 0\n", "integrator.snapshot_stride"},
                      BadConfig{"chain.omega = 1, 2\ninitial.site = 3\n", "initial.site"},
                      BadConfig{"chain.omega = 1, 2\noracle.n_traj = 1\n", "oracle.n_traj"},
                      BadConfig{"chain.omega = 1, 2\noutput.states = maybe\n", "output.states"},
                      BadConfig{"chain.omega = 1, 2\nlindblad.gamma = -1\n", "lindblad.gamma"},
                      BadConfig{"chain.omega = 1, 2\nnoise.c = 2\n", ""},
                      BadConfig{"chain.omega = 1, 2\nchain.kappa = -1\n", ""},
                      BadConfig{"chain.omega = 1, nan\n", "chain.omega"}));

TEST(ParseRunConfig, IgnoresSweepAndPlotKeys) {
    EXPECT_NO_THROW(parse_run_config("chain.omega = 1, 2\nsweep.axis.1 = noise.c.1.2\nplot.x = t\n"));
}

TEST(FormatDouble, ShortestRoundTrip) {
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1.0), "1");
    EXPECT_EQ(format_double(-2.5e-7), "-2.5e-07");
    std::mt19937_64 rng(21);
    for (int k = 0; k < 2000; ++k) {
        std::uint64_t bits = rng();
        double x;
        std::memcpy(&x, &bits, sizeof x);
        if (!std::isnormal(x) && x != 0.0) {
            continue;
        }
        EXPECT_EQ(parse_double(format_double(x), 0, "x"), x);
    }
}

TEST(ParseDouble, RejectsJunk) {
    EXPECT_THROW(parse_double("1.0x", 1, "k"), ConfigError);
    EXPECT_THROW(parse_double("inf", 1, "k"), ConfigError);
    EXPECT_THROW(parse_double("", 1, "k"), ConfigError);
    EXPECT_EQ(parse_double_list(" 1, 2.5 ,3", 1, "k"), (std::vector<double>{1.0, 2.5, 3.0}));
    EXPECT_THROW(parse_double_list("1,,2", 1, "k"), ConfigError);
}

RunConfig random_config(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> sites(2, 5);
    const int n = sites(rng);
    std::string text = "chain.omega = ";
    for (int a = 0; a < n; ++a) {
        text += (a ? ", " : "") + format_double(0.5 + u(rng));
    }
    text += "\nchain.kappa = " + format_double(0.01 * u(rng));
    text += "\nchain.v = " + format_double(0.2 * u(rng));
    text += "\nchain.v.1." + std::to_string(n) + " = " + format_double(0.05 * u(rng));
    text += "\nnoise.c = " + format_double(2.0 * u(rng) - 1.0);
    text += "\nnoise.c.1.2 = " + format_double(2.0 * u(rng) - 1.0);
    text += "\nnoise.delta.2.2 = " + format_double(0.5 + u(rng));
    text += "\nnoise.tau_c = " + format_double(0.1 + u(rng));
    text += "\nnoise.epsilon_sq = " + format_double(0.2 * u(rng));
    if (u(rng) < 0.5) {
        text += "\nengine = lindblad\nlindblad.gamma = " + format_double(u(rng));
    }
    if (u(rng) < 0.5) {
        text += "\ntrap_mode = lindblad_trap";
    }
    if (u(rng) < 0.5) {
        text += "\nintegrator.step = " + format_double(0.001 + 0.004 * u(rng));
    }
    text += "\nintegrator.snapshot_stride = " + std::to_string(1 + static_cast<int>(20 * u(rng)));
    text += "\ninitial.site = " + std::to_string(1 + static_cast<int>(n * u(rng)) % n);
    text += "\nmeasures.t_u = " + format_double(100.0 + 1000.0 * u(rng));
    text += "\noracle.seed = " + std::to_string(rng());
    if (u(rng) < 0.5) {
        text += "\noracle.epsilon_sq = " + format_double(u(rng));
    }
    text += "\noutput.states = " + std::string(u(rng) < 0.5 ? "true" : "false");
    return parse_run_config(text);
}

TEST(Echo, RoundTripsRandomConfigs) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto cfg = random_config(rng);
        const auto text = echo(cfg);
        const auto again = parse_run_config(text);
        EXPECT_TRUE(again == cfg) << text;
        EXPECT_EQ(echo(again), text);
    }
}

} // namespace
} // namespace qet
