#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hbary/dataset.hpp"
#include "hbary/kernels.hpp"
#include "hbary/random.hpp"
#include "hbary/solver.hpp"

namespace hbary::testing {

// Small random instance: N rows, one continuous covariate c1 observed on most rows,
// one categorical covariate g, scalar or vector response.
inline HeterogeneousDataset random_instance(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Row> rows;
    for (std::size_t i = 0; i < n; ++i) {
        Row r;
        const double c = rng.uniform();
        for (std::size_t d = 0; d < dim; ++d) r.x.push_back(std::sin(3.0 * c + d) + 0.3 * rng.normal());
        r.z.push_back(i % 4 == 3 ? CovariateCell() : CovariateCell(c));
        r.z.push_back(CovariateCell(std::string(rng.bernoulli(0.5) ? "a" : "b")));
        rows.push_back(std::move(r));
    }
    CovariateSchema schema({{"c1", CovariateKind::continuous}, {"g", CovariateKind::categorical}}, dim);
    return extend_covariates(HeterogeneousDataset(std::move(schema), std::move(rows)));
}

inline std::vector<CovariateSubset> weighted(const HeterogeneousDataset& d, std::size_t nmin, double base = 1.0) {
    auto subs = enumerate_subsets(d, 2, nmin);
    for (std::size_t k = 0; k < subs.size(); ++k) subs[k].penalty_weight = base * static_cast<double>(k + 1);
    return subs;
}

inline PointSet perturbed(const PointSet& x, double scale, std::uint64_t seed) {
    Rng rng(seed);
    PointSet y = x;
    for (auto& v : y.flat()) v += scale * rng.normal();
    return y;
}

}  // namespace hbary::testing
