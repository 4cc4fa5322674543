#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hbary/dataset.hpp"
#include "hbary/kernels.hpp"
#include "hbary/points.hpp"

namespace hbary {

// Per-dimension affine map x -> (x - mean) / scale.
struct Standardization {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardization fit(const PointSet& x);
    PointSet apply(const PointSet& x) const;
    std::vector<double> apply(std::span<const double> x) const;
    std::vector<double> invert(std::span<const double> s) const;
    PointSet invert(const PointSet& s) const;

    friend bool operator==(const Standardization&, const Standardization&) = default;
};

struct SolverConfig {
    double lambda_scale = 1.0;
    // On the standardized scale; empty means Silverman width of the standardized responses.
    std::optional<Bandwidth> h_y;
    double eta0 = 1e-2;
    double eta_max = 1e2;
    double grow = 1.1;
    double shrink = 0.5;
    std::size_t max_iters = 5000;
    double grad_tol = 1e-6;
    // A trial step whose full objective rises by more than this (relative) is rejected
    // and the step cap lowered; keeps the frozen-center iteration out of oscillation.
    double jump_tol = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

// Gradient and diagonal Hessian of the frozen-center objective, one row per sample.
struct GradientReport {
    PointSet gradient;
    PointSet hessian_diag;

    double max_norm() const noexcept;
};

enum class Termination { converged, max_iters, step_underflow };

std::string to_string(Termination t);

struct SolverDiagnostics {
    double objective = 0.0;
    double grad_norm = 0.0;  // max-norm of the final gradient
    std::size_t iterations = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    Termination termination = Termination::converged;

    bool converged() const noexcept { return termination == Termination::converged; }
};

struct IterationRecord {
    std::size_t iteration = 0;
    double objective = 0.0;  // full objective at the iterate
    double merit = 0.0;      // frozen-center objective of the accepted trial (NaN if none)
    double eta = 0.0;
    double grad_norm = 0.0;
    bool accepted = false;
};

struct BarycenterSolution {
    HeterogeneousDataset data;             // raw responses and covariates of the training rows
    PointSet y;                            // barycenter samples, standardized scale
    std::vector<CovariateSubset> subsets;  // penalty weights set
    Bandwidth h_y;
    Standardization standardization;
    SolverDiagnostics diagnostics;
    std::vector<IterationRecord> history;  // not serialized

    std::size_t size() const noexcept { return y.size(); }
    PointSet standardized_x() const { return standardization.apply(data.responses()); }
};

nlohmann::json to_json(const BarycenterSolution& solution);
// Throws CorruptInputError on any structural problem.
BarycenterSolution solution_from_json(const nlohmann::json& doc);

// Precomputed penalty structure for one dataset / subset list / response bandwidth.
class BarycenterProblem {
public:
    BarycenterProblem(const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets, Bandwidth h_y);

    std::size_t size() const noexcept { return x_.size(); }
    const PointSet& x() const noexcept { return x_; }
    const Standardization& standardization() const noexcept { return standardization_; }
    const Bandwidth& h_y() const noexcept { return h_y_; }

    // (1/N) sum 1/2 |y_i - x_i|^2 + sum_k lambda_k MI_k(Y).
    double objective(const PointSet& y) const;
    // As objective(y); also hands back the Gaussian kernel matrix of Y for reuse.
    double objective(const PointSet& y, std::vector<double>& kernel) const;
    // Same with the kernel centers held at `centers` (first kernel argument varies).
    double frozen_objective(const PointSet& y, const PointSet& centers) const;
    GradientReport gradient_and_hessian(const PointSet& y) const;
    // `kernel` must come from objective(y, kernel) at the same y.
    GradientReport gradient_and_hessian(const PointSet& y, const std::vector<double>& kernel) const;

private:
    struct Term {
        std::string name;
        double weight = 0.0;
        std::vector<std::size_t> rows;
        std::vector<double> kz;  // unnormalized covariate kernel, rows x rows
        double z_log_sum = 0.0;  // sum_a log sum_b kz(a, b)
    };

    double penalty(const std::vector<double>& kernel) const;
    void check_shape(const PointSet& y) const;

    Standardization standardization_;
    PointSet x_;
    Bandwidth h_y_;
    std::vector<Term> terms_;
};

double objective(const PointSet& y, const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                 const Bandwidth& h_y);
GradientReport gradient_and_hessian(const PointSet& y, const HeterogeneousDataset& data,
                                    std::span<const CovariateSubset> subsets, const Bandwidth& h_y);

// y' = y - eta G / (1 + eta Hd) per coordinate; nullopt when some 1 + eta Hd <= 0.
std::optional<PointSet> descent_step(const PointSet& y, const GradientReport& report, double eta);

// Penalty weights are taken from the subsets, multiplied by config.lambda_scale.
BarycenterSolution solve(const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                         const SolverConfig& config);

}  // namespace hbary
