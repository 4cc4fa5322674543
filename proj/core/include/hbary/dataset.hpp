#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hbary/points.hpp"

namespace hbary {

enum class CovariateKind { continuous, categorical };

struct CovariateSpec {
    std::string name;
    CovariateKind kind = CovariateKind::continuous;

    friend bool operator==(const CovariateSpec&, const CovariateSpec&) = default;
};

// Name of the categorical missingness-pattern factor appended by extend_covariates.
inline constexpr std::string_view kMissingnessCovariate = "_w";

class CovariateSchema {
public:
    CovariateSchema() = default;
    CovariateSchema(std::vector<CovariateSpec> covariates, std::size_t response_dim);

    static CovariateSchema from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;

    std::size_t response_dim() const noexcept { return response_dim_; }
    const std::vector<CovariateSpec>& covariates() const noexcept { return covariates_; }
    std::size_t covariate_count() const noexcept { return covariates_.size(); }
    std::optional<std::size_t> index_of(std::string_view name) const;
    const CovariateSpec& at(std::string_view name) const;

    friend bool operator==(const CovariateSchema&, const CovariateSchema&) = default;

private:
    std::vector<CovariateSpec> covariates_;
    std::size_t response_dim_ = 1;
};

using CovariateValue = std::variant<double, std::string>;
// Absent covariate = std::nullopt.
using CovariateCell = std::optional<CovariateValue>;

// A possibly partial assignment of covariate values, keyed by name.
using CovariateRecord = std::map<std::string, CovariateValue, std::less<>>;

struct Row {
    std::vector<double> x;
    std::vector<CovariateCell> z;  // aligned with schema covariates

    friend bool operator==(const Row&, const Row&) = default;
};

class HeterogeneousDataset {
public:
    HeterogeneousDataset() = default;
    HeterogeneousDataset(CovariateSchema schema, std::vector<Row> rows);

    const CovariateSchema& schema() const noexcept { return schema_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    const Row& row(std::size_t i) const { return rows_.at(i); }
    std::size_t size() const noexcept { return rows_.size(); }

    bool has_missingness_factor() const;
    bool fully_observed(std::size_t i) const;
    // Names of the covariates present at row i, in schema order (excluding the missingness factor).
    std::vector<std::string> pattern(std::size_t i) const;
    // Present covariates of row i as a record.
    CovariateRecord record(std::size_t i) const;
    PointSet responses() const;

    HeterogeneousDataset subset(std::span<const std::size_t> indices) const;

    friend bool operator==(const HeterogeneousDataset&, const HeterogeneousDataset&) = default;

private:
    CovariateSchema schema_;
    std::vector<Row> rows_;
};

// One covariate subset Z_k with its support I_k.
struct CovariateSubset {
    std::vector<std::string> covariate_ids;
    std::vector<std::size_t> support;  // ascending row indices
    // Aligned with covariate_ids; nullopt for categorical covariates (indicator kernel).
    std::vector<std::optional<double>> z_bandwidths;
    std::optional<double> penalty_weight;

    std::size_t cardinality() const noexcept { return support.size(); }

    friend bool operator==(const CovariateSubset&, const CovariateSubset&) = default;
};

nlohmann::json to_json(const CovariateSubset& subset);
CovariateSubset subset_from_json(const nlohmann::json& doc);

// CSV: header `x1..xd,<covariate names>`, empty cell = absent covariate.
HeterogeneousDataset load_dataset(std::istream& in, const CovariateSchema& schema);
void write_dataset(std::ostream& out, const HeterogeneousDataset& dataset);

// Stable category label for a set of covariate names (order-insensitive).
std::string pattern_label(std::vector<std::string> names);

// Appends the categorical missingness factor; no-op if already present.
HeterogeneousDataset extend_covariates(const HeterogeneousDataset& dataset);

// Maximal common subsets over observed patterns plus all singletons, filtered by
// size <= max_size and support >= min_support. Bandwidths filled, penalty weights unset.
std::vector<CovariateSubset> enumerate_subsets(const HeterogeneousDataset& dataset, std::size_t max_size,
                                               std::size_t min_support);

struct Split {
    HeterogeneousDataset train;
    HeterogeneousDataset validation;
};

// Validation rows are drawn uniformly among fully observed rows.
Split split(const HeterogeneousDataset& dataset, std::size_t validation_count, std::uint64_t seed);

std::string format_value(const CovariateValue& value);
std::string format_double(double value);

}  // namespace hbary
