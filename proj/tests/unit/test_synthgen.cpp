#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "hbary/error.hpp"
#include "hbary/synthgen.hpp"

using namespace hbary;

namespace {

std::map<std::vector<std::string>, std::size_t> pattern_counts(const HeterogeneousDataset& d) {
    std::map<std::vector<std::string>, std::size_t> out;
    for (std::size_t i = 0; i < d.size(); ++i) ++out[d.pattern(i)];
    return out;
}

void expect_in_support(const HeterogeneousDataset& d, double z1_max) {
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_TRUE(std::isfinite(d.row(i).x[0]));
        if (d.row(i).z[0]) {
            const double v = std::get<double>(*d.row(i).z[0]);
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, z1_max);
        }
        if (d.row(i).z[1]) {
            const double v = std::get<double>(*d.row(i).z[1]);
            EXPECT_GE(v, 0.0);
            EXPECT_LT(v, 1.0);
        }
    }
}

}  // namespace

TEST(MissingTest, SizesAndPatterns) {
    const auto g = gen_missing_test(1, 80, 80, 20, 20, 7);
    EXPECT_EQ(g.train.size(), 180u);
    EXPECT_EQ(g.validation.size(), 20u);
    EXPECT_EQ(g.complete.size(), 180u);
    const auto counts = pattern_counts(g.train);
    const std::map<std::vector<std::string>, std::size_t> want{
        {{"z1"}, 80}, {{"z2"}, 80}, {{"z1", "z2"}, 20}};
    EXPECT_EQ(counts, want);
    for (std::size_t i = 0; i < g.validation.size(); ++i) EXPECT_TRUE(g.validation.fully_observed(i));
    for (std::size_t i = 0; i < g.train.size(); ++i) {
        EXPECT_EQ(g.train.row(i).x, g.complete.row(i).x);
        for (std::size_t c = 0; c < 2; ++c) {
            if (g.train.row(i).z[c]) EXPECT_EQ(g.train.row(i).z[c], g.complete.row(i).z[c]);
        }
    }
    expect_in_support(g.complete, 1.0);
    EXPECT_EQ(g.truth.descriptor["seed"], 7);
    EXPECT_EQ(g.truth.descriptor["test"], 1);
}

TEST(MissingTest, TruthFunctions) {
    const auto t1 = gen_missing_test(1, 1, 1, 1, 1, 0).truth;
    const auto t2 = gen_missing_test(2, 1, 1, 1, 1, 0).truth;
    const auto t3 = gen_missing_test(3, 1, 1, 1, 1, 0).truth;
    EXPECT_DOUBLE_EQ(t1.f(0.5, 1.0), 1.5);
    EXPECT_DOUBLE_EQ(t1.g(0.3, 0.9), 0.2);
    EXPECT_DOUBLE_EQ(t2.f(0.5, 1.0), 1.25);
    EXPECT_DOUBLE_EQ(t2.f(0.2, 0.4), 4 * 0.2 * 0.8 + 0.5 * 0.2 * 0.4);
    EXPECT_DOUBLE_EQ(t3.g(1.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(t3.f(0.5, 1.0), 1.5);
    EXPECT_THROW(gen_missing_test(4, 1, 1, 1, 1, 0), ConfigError);
    EXPECT_THROW(gen_missing_test(1, 0, 1, 1, 1, 0), ConfigError);
}

TEST(MissingTest, ResidualsFollowTruth) {
    const auto g = gen_missing_test(3, 2000, 2000, 2000, 10, 3);
    double s = 0.0, ss = 0.0;
    const auto& c = g.complete;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double a = std::get<double>(*c.row(i).z[0]), b = std::get<double>(*c.row(i).z[1]);
        const double e = (c.row(i).x[0] - g.truth.f(a, b)) / g.truth.g(a, b);
        s += e;
        ss += e * e;
    }
    EXPECT_NEAR(s / c.size(), 0.0, 0.05);
    EXPECT_NEAR(ss / c.size(), 1.0, 0.05);
}

TEST(Generators, Deterministic) {
    EXPECT_EQ(gen_missing_test(2, 10, 10, 5, 5, 42).train, gen_missing_test(2, 10, 10, 5, 5, 42).train);
    EXPECT_NE(gen_missing_test(2, 10, 10, 5, 5, 42).train, gen_missing_test(2, 10, 10, 5, 5, 43).train);
    EXPECT_EQ(gen_structured(0.5, 40, 100, 20, 9).train, gen_structured(0.5, 40, 100, 20, 9).train);
    EXPECT_EQ(gen_hidden_factor(40, 50, 20, 9).hidden_labels, gen_hidden_factor(40, 50, 20, 9).hidden_labels);
    EXPECT_EQ(gen_extrapolation(40, 100, 20, 9).validation, gen_extrapolation(40, 100, 20, 9).validation);
}

TEST(Structured, GroupsAndTruth) {
    const auto g = gen_structured(1.0, 40, 100, 20, 5);
    EXPECT_EQ(g.train.size(), 140u);
    EXPECT_EQ(g.validation.size(), 20u);
    const auto counts = pattern_counts(g.train);
    EXPECT_EQ(counts.at({"z1", "z2"}), 40u);
    EXPECT_EQ(counts.at({"z1"}), 100u);
    EXPECT_DOUBLE_EQ(g.truth.f(0.5, 1.0), 1.5);
    EXPECT_DOUBLE_EQ(g.truth.g(0.1, 0.2), 0.2);
    expect_in_support(g.train, 1.0);
    EXPECT_THROW(gen_structured(-1.0, 1, 1, 1, 0), ConfigError);
}

TEST(Structured, AlphaZeroSharesLawGivenZ1) {
    const auto g = gen_structured(0.0, 3000, 3000, 1, 2);
    double r1 = 0.0, r2 = 0.0;
    std::size_t n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < g.train.size(); ++i) {
        const double a = std::get<double>(*g.train.row(i).z[0]);
        const double res = g.train.row(i).x[0] - 4 * a * (1 - a);
        (g.train.row(i).z[1] ? (++n1, r1) : (++n2, r2)) += res * res;
    }
    EXPECT_NEAR(std::sqrt(r1 / n1), 0.2, 0.01);
    EXPECT_NEAR(std::sqrt(r2 / n2), 0.2, 0.01);
}

TEST(Extrapolation, SupportAndTargets) {
    const auto g = gen_extrapolation(40, 100, 20, 11);
    for (std::size_t i = 0; i < g.train.size(); ++i) {
        if (g.train.row(i).z[1]) EXPECT_LE(std::get<double>(*g.train.row(i).z[0]), 0.5);
    }
    for (std::size_t i = 0; i < g.validation.size(); ++i) EXPECT_LE(std::get<double>(*g.validation.row(i).z[0]), 0.5);
    ASSERT_EQ(g.targets.size(), 2u);
    EXPECT_EQ(std::get<double>(g.targets[0].at("z1")), 0.85);
    EXPECT_EQ(std::get<double>(g.targets[0].at("z2")), 0.25);
    EXPECT_EQ(std::get<double>(g.targets[1].at("z1")), 0.25);
    EXPECT_EQ(std::get<double>(g.targets[1].at("z2")), 0.25);
    EXPECT_NEAR(g.truth.f(0.85, 0.25), 0.26, 1e-12);
}

TEST(HiddenFactor, LabelsAndMixture) {
    const auto g = gen_hidden_factor(40, 50, 20, 3);
    EXPECT_EQ(g.train.size(), 90u);
    ASSERT_EQ(g.hidden_labels.size(), 90u);
    for (int l : g.hidden_labels) EXPECT_TRUE(l == -1 || l == 1);
    EXPECT_EQ(g.train.schema().covariate_count(), 2u);
    EXPECT_EQ(g.truth.noise_kind, NoiseKind::bimodal);
    Rng rng(5);
    double m = 0.0;
    for (int i = 0; i < 100000; ++i) m += draw_hidden_label(rng);
    EXPECT_NEAR(m / 1e5, 1.0 / 3.0, 0.01);
}

TEST(HiddenFactor, ResidualsSplitByLabel) {
    const auto g = gen_hidden_factor(2000, 2000, 1, 8);
    double pos = 0.0, neg = 0.0;
    std::size_t np = 0, nn = 0;
    for (std::size_t i = 0; i < g.train.size(); ++i) {
        const double a = std::get<double>(*g.train.row(i).z[0]);
        double mean = 4 * a * (1 - a);
        if (g.train.row(i).z[1]) mean += std::get<double>(*g.train.row(i).z[1]) - 0.5;
        const double e = (g.train.row(i).x[0] - mean) / 0.2;
        (g.hidden_labels[i] > 0 ? (++np, pos) : (++nn, neg)) += e;
    }
    EXPECT_NEAR(pos / np, 1.0, 0.02);
    EXPECT_NEAR(neg / nn, -1.0, 0.02);
}
