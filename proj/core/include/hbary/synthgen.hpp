#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hbary/dataset.hpp"
#include "hbary/random.hpp"

namespace hbary {

enum class NoiseKind { gaussian, bimodal };

struct SyntheticTruth {
    std::function<double(double, double)> f;  // conditional mean at (z1, z2)
    std::function<double(double, double)> g;  // conditional standard deviation
    std::vector<std::pair<double, double>> z_support;  // per covariate
    NoiseKind noise_kind = NoiseKind::gaussian;
    nlohmann::json descriptor;  // generator name, parameters and seed
};

struct GeneratedData {
    HeterogeneousDataset train;     // covariates as observed (hidden or undefined cells absent)
    HeterogeneousDataset complete;  // same rows with every covariate revealed, when meaningful
    HeterogeneousDataset validation;
    SyntheticTruth truth;
    std::vector<int> hidden_labels;                 // hidden-factor generator only
    std::vector<CovariateRecord> targets;           // extrapolation generator only
    std::vector<std::size_t> group_sizes;           // rows per pattern group, in generation order
};

// Two continuous covariates z1, z2 and a scalar response.
CovariateSchema synthetic_schema();

// Tests 1-3: additive mean, non-additive mean, heterogeneous standard deviation.
// Hides z2 on the first n1 rows, z1 on the next n2, nothing on the last n3.
GeneratedData gen_missing_test(int test_id, std::size_t n1, std::size_t n2, std::size_t n3, std::size_t n_val,
                               std::uint64_t seed);

// I1: (z1, z2) with mean 4 z1 (1 - z1) + alpha (z2 - 1/2); I2: z1 only, mean 4 z1 (1 - z1).
// Validation rows follow the I1 law.
GeneratedData gen_structured(double alpha, std::size_t n1, std::size_t n2, std::size_t n_val, std::uint64_t seed);

// Structured law with alpha = 1 and z1 restricted to [0, 1/2] on I1. Targets z_a, z_b.
GeneratedData gen_extrapolation(std::size_t n1, std::size_t n2, std::size_t n_val, std::uint64_t seed);

// Response noise 0.2 eps with eps = label + N(0, 1/16), label = -1 w.p. 1/3 else +1.
GeneratedData gen_hidden_factor(std::size_t n1, std::size_t n2, std::size_t n_val, std::uint64_t seed);

// Draw of the hidden label: -1 with probability 1/3, +1 otherwise.
int draw_hidden_label(Rng& rng);

}  // namespace hbary
