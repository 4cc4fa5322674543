#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hbary/dataset.hpp"
#include "hbary/kernels.hpp"
#include "hbary/points.hpp"
#include "hbary/solver.hpp"

namespace hbary {

struct ConditionalSampleSet {
    CovariateRecord target;             // as supplied, plus the derived missingness factor
    PointSet samples;                   // raw response scale, one per barycenter point
    std::vector<std::string> subsets;   // labels of the subsets that conditioned the map
};

nlohmann::json to_json(const ConditionalSampleSet& set);

// Pull-back map for one fitted solution. Holds per-subset covariate kernels and the
// barycenter kernel matrix so many targets can be simulated cheaply.
class TransportMap {
public:
    explicit TransportMap(const BarycenterSolution& solution);

    // Target prepared against every subset; unusable subsets are dropped.
    struct Target {
        CovariateRecord record;
        std::vector<std::size_t> subsets;             // indices into solution subsets
        std::vector<std::vector<double>> log_kz;      // per applicable subset, over its support
    };

    // Throws ValidationError on unknown covariate names, UnsupportedTargetError if no subset applies.
    Target prepare(const CovariateRecord& z) const;

    // Standardized in, standardized out.
    std::vector<double> invert_standardized(std::span<const double> y, const Target& target) const;
    // Standardized y in, raw x out.
    std::vector<double> invert(std::span<const double> y, const Target& target) const;

    // Pulls back every barycenter point; raw scale.
    PointSet simulate(const Target& target) const;
    PointSet simulate_standardized(const Target& target) const;

    const BarycenterSolution& solution() const noexcept { return *solution_; }

private:
    const BarycenterSolution* solution_;
    std::vector<CovariateKernel> kernels_;
    std::vector<double> log_ky_;  // N x N exponents between barycenter points
};

std::string subset_label(const CovariateSubset& subset);

// The missingness factor value implied by the covariates present in `z` is added.
CovariateRecord complete_target(const CovariateSchema& schema, const CovariateRecord& z);

std::vector<double> invert_map(const BarycenterSolution& solution, std::span<const double> y,
                               const CovariateRecord& z_target);

ConditionalSampleSet simulate_conditional(const BarycenterSolution& solution, const CovariateRecord& z_target);

double kde_density(const PointSet& samples, const Bandwidth& h, std::span<const double> x);
// log of kde_density, computed without underflow.
double log_kde_density(const PointSet& samples, const Bandwidth& h, std::span<const double> x);

}  // namespace hbary
