#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hbary/dataset.hpp"
#include "hbary/error.hpp"
#include "hbary/synthgen.hpp"

using namespace hbary;

namespace {

CovariateSchema two_cov_schema() {
    return CovariateSchema({{"z1", CovariateKind::continuous}, {"z2", CovariateKind::continuous}}, 1);
}

HeterogeneousDataset from_text(const std::string& text, const CovariateSchema& schema) {
    std::istringstream in(text);
    return load_dataset(in, schema);
}

}  // namespace

TEST(LoadDataset, EmptyCellBecomesAbsent) {
    const auto d = from_text("x1,z1,z2\n1.5,0.1,0.2\n2.0,0.3,\n-1,,0.9\n", two_cov_schema());
    ASSERT_EQ(d.size(), 3u);
    EXPECT_FALSE(d.row(1).z[1].has_value());
    EXPECT_TRUE(d.row(1).z[0].has_value());
    EXPECT_FALSE(d.row(2).z[0].has_value());
    EXPECT_DOUBLE_EQ(d.row(2).x[0], -1.0);
    EXPECT_DOUBLE_EQ(std::get<double>(*d.row(0).z[1]), 0.2);
}

TEST(LoadDataset, RowOrderPreservedAndCrlfAccepted) {
    const auto d = from_text("x1,z1,z2\r\n3,0.1,0.2\r\n1,0.3,0.4\r\n2,0.5,0.6\r\n", two_cov_schema());
    ASSERT_EQ(d.size(), 3u);
    EXPECT_EQ(d.row(0).x[0], 3.0);
    EXPECT_EQ(d.row(1).x[0], 1.0);
    EXPECT_EQ(d.row(2).x[0], 2.0);
}

TEST(LoadDataset, EmptyBodyIsParseError) {
    try {
        from_text("x1,z1,z2\n", two_cov_schema());
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("no data rows"), std::string::npos);
    }
}

TEST(LoadDataset, NonNumericResponseNamesRow) {
    try {
        from_text("x1,z1,z2\n1,0.1,0.2\nabc,0.1,0.2\n", two_cov_schema());
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
    }
}

TEST(LoadDataset, MissingResponseIsValidationError) {
    EXPECT_THROW(from_text("x1,z1,z2\n,0.1,0.2\n", two_cov_schema()), ValidationError);
}

TEST(LoadDataset, MalformedRowReportsRowNumber) {
    try {
        from_text("x1,z1,z2\n1,0.1,0.2\n1,0.1\n", two_cov_schema());
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 2u);
    }
}

TEST(LoadDataset, HeaderMismatchRejected) {
    EXPECT_THROW(from_text("x1,z2,z1\n1,0.1,0.2\n", two_cov_schema()), ParseError);
}

TEST(LoadDataset, CategoricalValuesAreStrings) {
    CovariateSchema s({{"g", CovariateKind::categorical}}, 2);
    const auto d = from_text("x1,x2,g\n1,2,\"a,b\"\n3,4,c\n", s);
    EXPECT_EQ(std::get<std::string>(*d.row(0).z[0]), "a,b");
    EXPECT_EQ(d.row(1).x[1], 4.0);
}

TEST(LoadDataset, WriteThenReadRoundTripsBitExact) {
    const auto g = gen_missing_test(1, 10, 10, 5, 3, 42);
    std::stringstream ss;
    write_dataset(ss, g.train);
    const auto back = load_dataset(ss, g.train.schema());
    EXPECT_EQ(back, g.train);
}

TEST(Schema, JsonRoundTripAndValidation) {
    const auto s = two_cov_schema();
    EXPECT_EQ(CovariateSchema::from_json(s.to_json()), s);
    EXPECT_THROW(CovariateSchema({{"a", CovariateKind::continuous}, {"a", CovariateKind::continuous}}, 1),
                 ValidationError);
    EXPECT_THROW(CovariateSchema({}, 0), ValidationError);
}

TEST(ExtendCovariates, SinglePatternGivesOneCategory) {
    const auto d = extend_covariates(from_text("x1,z1,z2\n1,0.1,0.2\n2,0.3,0.4\n", two_cov_schema()));
    ASSERT_TRUE(d.has_missingness_factor());
    const auto w = *d.schema().index_of(kMissingnessCovariate);
    EXPECT_EQ(d.row(0).z[w], d.row(1).z[w]);
}

TEST(ExtendCovariates, MissingTestHasThreeCategoriesMatchingGroups) {
    const auto g = gen_missing_test(1, 80, 80, 20, 20, 3);
    const auto d = extend_covariates(g.train);
    const auto w = *d.schema().index_of(kMissingnessCovariate);
    std::map<std::string, std::set<std::vector<std::string>>> by_label;
    for (std::size_t i = 0; i < d.size(); ++i) by_label[std::get<std::string>(*d.row(i).z[w])].insert(d.pattern(i));
    EXPECT_EQ(by_label.size(), 3u);
    for (const auto& [label, patterns] : by_label) EXPECT_EQ(patterns.size(), 1u) << label;
}

TEST(ExtendCovariates, FourPatternsBruteForce) {
    const auto d = extend_covariates(from_text("x1,z1,z2\n1,0.1,0.2\n2,,0.4\n3,0.5,\n4,,\n5,0.2,0.3\n", two_cov_schema()));
    const auto w = *d.schema().index_of(kMissingnessCovariate);
    std::set<std::string> labels;
    std::set<std::vector<bool>> patterns;
    for (std::size_t i = 0; i < d.size(); ++i) {
        labels.insert(std::get<std::string>(*d.row(i).z[w]));
        patterns.insert({d.row(i).z[0].has_value(), d.row(i).z[1].has_value()});
    }
    EXPECT_EQ(labels.size(), patterns.size());
    EXPECT_EQ(labels.size(), 4u);
}

TEST(ExtendCovariates, Idempotent) {
    const auto g = gen_missing_test(2, 5, 5, 5, 1, 1);
    const auto once = extend_covariates(g.train);
    EXPECT_EQ(extend_covariates(once), once);
    EXPECT_EQ(once.schema().covariate_count(), 3u);
}

TEST(PatternLabel, OrderInsensitiveAndStable) {
    EXPECT_EQ(pattern_label({"b", "a"}), pattern_label({"a", "b"}));
    EXPECT_NE(pattern_label({"a"}), pattern_label({"a", "b"}));
    EXPECT_NE(pattern_label({"ab"}), pattern_label({"a", "b"}));
    EXPECT_EQ(pattern_label({}).size(), 17u);
}

TEST(EnumerateSubsets, MissingTestSetup) {
    const auto g = gen_missing_test(1, 80, 80, 20, 20, 11);
    const auto d = extend_covariates(g.train);
    const auto subs = enumerate_subsets(d, 2, 5);
    std::map<std::vector<std::string>, std::size_t> sizes;
    for (const auto& s : subs) sizes[s.covariate_ids] = s.cardinality();
    const std::map<std::vector<std::string>, std::size_t> expected{
        {{"z1"}, 100}, {{"z2"}, 100}, {{"z1", "z2"}, 20}, {{"_w"}, 180}};
    EXPECT_EQ(sizes, expected);
    for (const auto& s : subs) {
        EXPECT_FALSE(s.penalty_weight.has_value());
        for (std::size_t c = 0; c < s.covariate_ids.size(); ++c) {
            const bool categorical = s.covariate_ids[c] == "_w";
            EXPECT_EQ(s.z_bandwidths[c].has_value(), !categorical);
            if (!categorical) EXPECT_GT(*s.z_bandwidths[c], 0.0);
        }
    }
}

TEST(EnumerateSubsets, SupportMatchesPresence) {
    const auto g = gen_missing_test(3, 30, 20, 10, 1, 5);
    const auto d = extend_covariates(g.train);
    for (const auto& s : enumerate_subsets(d, 3, 1)) {
        std::set<std::size_t> support(s.support.begin(), s.support.end());
        for (std::size_t i = 0; i < d.size(); ++i) {
            bool all = true;
            for (const auto& id : s.covariate_ids) all = all && d.row(i).z[*d.schema().index_of(id)].has_value();
            EXPECT_EQ(all, support.count(i) == 1) << "row " << i;
        }
    }
}

TEST(EnumerateSubsets, OneFullyObservedCovariate) {
    const auto d = extend_covariates(
        HeterogeneousDataset(CovariateSchema({{"z1", CovariateKind::continuous}}, 1),
                             {Row{{1.0}, {0.1}}, Row{{2.0}, {0.5}}, Row{{3.0}, {0.9}}}));
    const auto subs = enumerate_subsets(d, 2, 1);
    ASSERT_EQ(subs.size(), 2u);
    EXPECT_EQ(subs[0].covariate_ids, std::vector<std::string>{"z1"});
    EXPECT_EQ(subs[1].covariate_ids, std::vector<std::string>{"_w"});
}

TEST(EnumerateSubsets, SingletonsCoverRowsWithAnyCovariate) {
    const auto d = extend_covariates(from_text("x1,z1,z2\n1,0.1,0.2\n2,,0.4\n3,0.5,\n4,0.3,0.1\n5,,0.8\n", two_cov_schema()));
    std::set<std::size_t> covered;
    for (const auto& s : enumerate_subsets(d, 1, 1)) {
        if (s.covariate_ids.size() == 1 && s.covariate_ids[0] != "_w") covered.insert(s.support.begin(), s.support.end());
    }
    EXPECT_EQ(covered.size(), d.size());
}

TEST(EnumerateSubsets, FilterRemovingEverythingIsConfigError) {
    const auto g = gen_missing_test(1, 10, 10, 10, 1, 2);
    EXPECT_THROW(enumerate_subsets(extend_covariates(g.train), 2, 1000), ConfigError);
    EXPECT_THROW(enumerate_subsets(g.train, 2, 1), ConfigError);
}

TEST(Split, SizesAndDeterminism) {
    const auto g = gen_missing_test(1, 80, 80, 40, 1, 9);
    const auto a = split(g.train, 20, 4), b = split(g.train, 20, 4);
    EXPECT_EQ(a.train.size(), 180u);
    EXPECT_EQ(a.validation.size(), 20u);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.validation, b.validation);
    for (std::size_t i = 0; i < a.validation.size(); ++i) EXPECT_TRUE(a.validation.fully_observed(i));
    EXPECT_NE(split(g.train, 20, 5).validation, a.validation);
}

TEST(Split, InvalidCounts) {
    const auto g = gen_missing_test(1, 10, 10, 3, 1, 9);
    EXPECT_THROW(split(g.train, 0, 1), ConfigError);
    EXPECT_THROW(split(g.train, g.train.size(), 1), ConfigError);
    EXPECT_THROW(split(g.train, 4, 1), ConfigError);
}
