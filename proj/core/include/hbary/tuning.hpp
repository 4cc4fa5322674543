#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hbary/dataset.hpp"
#include "hbary/kernels.hpp"
#include "hbary/solver.hpp"
#include "hbary/transport.hpp"

namespace hbary {

struct TuningGrid {
    std::vector<double> lambda_values;
    std::vector<double> h_y_multipliers;  // multiples of the Silverman width of standardized x

    static TuningGrid defaults();
    void validate() const;
};

struct TuningEntry {
    double lambda = 0.0;
    double h_y_multiplier = 1.0;
    double score = 0.0;  // mean validation log-likelihood; -inf if the fit did not converge
    Termination termination = Termination::converged;
};

struct TuningReport {
    std::vector<TuningEntry> table;  // lambda-major, grid order
    std::size_t best = 0;

    const TuningEntry& best_entry() const { return table.at(best); }
};

// r_k = N_k * max(0, MI(X_std restricted to I_k, Z_k)) at response width h_y0.
std::vector<double> lambda_weights(const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                                   const Bandwidth& h_y0);

// Copies of `subsets` with penalty_weight = r_k.
std::vector<CovariateSubset> with_weights(std::span<const CovariateSubset> subsets, std::span<const double> r);

// Mean log KDE density of each validation response under the simulation at its covariates.
double validation_log_likelihood(const TransportMap& map, const HeterogeneousDataset& validation);

// Subsets must carry r_k weights; each grid point multiplies them by lambda. The
// template's lambda_scale and h_y are overridden per grid point.
TuningReport cross_validate(const HeterogeneousDataset& train, const HeterogeneousDataset& validation,
                            std::span<const CovariateSubset> subsets, const TuningGrid& grid,
                            const SolverConfig& config, std::size_t jobs = 1);

void write_report_csv(std::ostream& out, const TuningReport& report);
nlohmann::json best_to_json(const TuningReport& report);

}  // namespace hbary
