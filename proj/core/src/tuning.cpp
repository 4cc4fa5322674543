#include "hbary/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hbary/error.hpp"
#include "hbary/parallel.hpp"

namespace hbary {

TuningGrid TuningGrid::defaults() {
    TuningGrid g;
    for (int k = 0; k <= 3; ++k) g.lambda_values.push_back(std::pow(10.0, -2.0 + 0.5 * k));
    g.h_y_multipliers = {1.0, 2.0, 4.0};
    return g;
}

void TuningGrid::validate() const {
    if (lambda_values.empty() || h_y_multipliers.empty()) throw ConfigError("tuning grid: empty axis");
    for (double l : lambda_values) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("tuning grid: lambda values must be >= 0");
    }
    for (double h : h_y_multipliers) {
        if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("tuning grid: h_y multipliers must be > 0");
    }
    if (!std::is_sorted(lambda_values.begin(), lambda_values.end()) ||
        !std::is_sorted(h_y_multipliers.begin(), h_y_multipliers.end())) {
        throw ConfigError("tuning grid: axes must be sorted ascending");
    }
}

std::vector<double> lambda_weights(const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                                   const Bandwidth& h_y0) {
    const PointSet x = Standardization::fit(data.responses()).apply(data.responses());
    std::vector<double> r;
    for (const auto& s : subsets) {
        const std::size_t nk = s.support.size();
        if (nk < 2) {
            r.push_back(0.0);
            continue;
        }
        PointSet xk(nk, x.dim());
        for (std::size_t a = 0; a < nk; ++a) std::copy_n(x.row(s.support[a]).begin(), x.dim(), xk.row(a).begin());
        const CovariateKernel kz(data, s);
        const double mi = mi_estimate(xk, kz, h_y0);
        r.push_back(static_cast<double>(nk) * std::max(0.0, mi));
    }
    return r;
}

std::vector<CovariateSubset> with_weights(std::span<const CovariateSubset> subsets, std::span<const double> r) {
    if (subsets.size() != r.size()) throw ValidationError("with_weights: size mismatch");
    std::vector<CovariateSubset> out(subsets.begin(), subsets.end());
    for (std::size_t k = 0; k < out.size(); ++k) out[k].penalty_weight = r[k];
    return out;
}

double validation_log_likelihood(const TransportMap& map, const HeterogeneousDataset& validation) {
    if (validation.size() == 0) throw ValidationError("validation set is empty");
    double total = 0.0;
    for (std::size_t i = 0; i < validation.size(); ++i) {
        const auto samples = map.simulate(map.prepare(validation.record(i)));
        const auto h = silverman_bandwidth(samples);
        total += log_kde_density(samples, h, validation.row(i).x);
    }
    return total / static_cast<double>(validation.size());
}

TuningReport cross_validate(const HeterogeneousDataset& train, const HeterogeneousDataset& validation,
                            std::span<const CovariateSubset> subsets, const TuningGrid& grid,
                            const SolverConfig& config, std::size_t jobs) {
    grid.validate();
    for (std::size_t i = 0; i < validation.size(); ++i) {
        if (!validation.fully_observed(i)) throw ValidationError("cross_validate: validation rows must be fully observed");
    }
    const Standardization st = Standardization::fit(train.responses());
    const Bandwidth h0 = silverman_bandwidth(st.apply(train.responses()));

    TuningReport report;
    for (double l : grid.lambda_values) {
        for (double m : grid.h_y_multipliers) report.table.push_back({l, m, 0.0, Termination::converged});
    }
    parallel_for(report.table.size(), jobs, [&](std::size_t k) {
        auto& e = report.table[k];
        SolverConfig c = config;
        c.lambda_scale = e.lambda;
        c.h_y = h0.scaled(e.h_y_multiplier);
        BarycenterSolution sol;
        try {
            sol = solve(train, subsets, c);
        } catch (const NumericalError&) {
            e.termination = Termination::step_underflow;
            e.score = -std::numeric_limits<double>::infinity();
            return;
        }
        e.termination = sol.diagnostics.termination;
        if (!sol.diagnostics.converged()) {
            e.score = -std::numeric_limits<double>::infinity();
            return;
        }
        const TransportMap map(sol);
        const double s = validation_log_likelihood(map, validation);
        e.score = std::isfinite(s) ? s : -std::numeric_limits<double>::infinity();
    });
    // Table is ordered by lambda then h_y, so the first maximum wins ties.
    for (std::size_t k = 1; k < report.table.size(); ++k) {
        if (report.table[k].score > report.table[report.best].score) report.best = k;
    }
    return report;
}

void write_report_csv(std::ostream& out, const TuningReport& report) {
    out << "lambda,h_y_multiplier,score\n";
    for (const auto& e : report.table) {
        out << format_double(e.lambda) << ',' << format_double(e.h_y_multiplier) << ',' << format_double(e.score)
            << '\n';
    }
}

nlohmann::json best_to_json(const TuningReport& report) {
    const auto& b = report.best_entry();
    return {{"lambda", b.lambda},
            {"h_y_multiplier", b.h_y_multiplier},
            {"score", std::isfinite(b.score) ? nlohmann::json(b.score) : nlohmann::json(nullptr)},
            {"termination", to_string(b.termination)}};
}

}  // namespace hbary
