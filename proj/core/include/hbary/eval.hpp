#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hbary/dataset.hpp"
#include "hbary/solver.hpp"
#include "hbary/synthgen.hpp"
#include "hbary/tuning.hpp"

namespace hbary {

// KL(N(mu_hat, sigma_hat^2) || N(mu, sigma^2)).
double gaussian_kl(double mu_hat, double sigma_hat, double mu, double sigma);

// Mean Gaussian KL between the simulated conditional and the truth over a lattice of
// cell midpoints of the truth's z support, `grid_resolution` cells per covariate.
double average_kl(const BarycenterSolution& solution, const SyntheticTruth& truth, std::size_t grid_resolution);

// Mean log KDE density of the validation responses under the simulated conditionals.
double avg_loglik(const BarycenterSolution& solution, const HeterogeneousDataset& validation);

// Fills each absent covariate from the row nearest in x (ties: lowest index). The
// missingness factor, if present, is recomputed.
HeterogeneousDataset impute_nearest_neighbor(const HeterogeneousDataset& dataset);

// Strict local maxima of a Gaussian KDE at the Silverman width, evaluated on a fine grid.
struct ModeSummary {
    std::size_t modes = 0;
    double mass_ratio = 0.0;  // larger/smaller side of the deepest antimode; NaN unless 2 modes
    double antimode = 0.0;
    double bandwidth = 0.0;
};
ModeSummary detect_modes(std::span<const double> values, std::size_t grid_points = 2001);

std::vector<double> zscore(std::span<const double> values);

struct FitOptions {
    std::size_t max_size = 2;
    std::size_t min_support = 5;
    TuningGrid grid = TuningGrid::defaults();
    SolverConfig solver;
    std::size_t jobs = 1;
};

struct TunedFit {
    BarycenterSolution solution;
    TuningReport report;
};

// Covariate extension, subset enumeration, r_k weights, cross-validation, final fit.
TunedFit fit_tuned(const HeterogeneousDataset& train, const HeterogeneousDataset& validation,
                   const FitOptions& options);

enum class Method { HB, B1, B2, B3 };
std::string to_string(Method m);
std::optional<Method> method_from_string(std::string_view s);

enum class Experiment { missing1, missing2, missing3, bone, structured, extrapolation, hidden };
std::string to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view s);

struct BenchmarkSpec {
    Experiment experiment = Experiment::missing1;
    double alpha = 0.0;                            // structured only
    std::optional<HeterogeneousDataset> bone_data;  // bone only
    std::size_t kl_resolution = 10;
    FitOptions fit;
};

struct BenchmarkResult {
    Method method = Method::HB;
    std::string metric;
    double value = 0.0;  // mean over the finite per-seed values
    std::vector<std::uint64_t> seeds;
    std::vector<double> per_seed;
    std::vector<Termination> terminations;  // final fit per seed
    // Hidden-factor experiment only: standardized barycenter samples per seed.
    std::vector<std::vector<double>> barycenters;
};

// Per-seed data for one experiment and method, reduced to one or more metrics.
std::vector<BenchmarkResult> run_benchmark(const BenchmarkSpec& spec, Method method,
                                           std::span<const std::uint64_t> seeds, std::size_t jobs = 1);

// Builds the two-covariate bone dataset (gender categorical, age continuous) from a CSV
// with arbitrary headers; `columns` maps age / gender / spnbmd to header names.
HeterogeneousDataset load_bone_csv(std::istream& in, const std::map<std::string, std::string>& columns);

// Hide-repetition of the bone protocol: rows shuffled, then 218 lose age, 218 lose
// gender, 24 stay complete and 25 are held out.
struct BoneSplit {
    HeterogeneousDataset train;
    HeterogeneousDataset complete;
    HeterogeneousDataset validation;
};
BoneSplit bone_split(const HeterogeneousDataset& data, std::uint64_t seed);

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkResult> results);
nlohmann::json benchmark_summary(std::span<const BenchmarkResult> results);

}  // namespace hbary
