#include "hbary/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "hbary/error.hpp"

namespace hbary {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> v) {
    double m = kNegInf;
    for (double a : v) m = std::max(m, a);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double a : v) s += std::exp(a - m);
    return m + std::log(s);
}

}  // namespace

std::string subset_label(const CovariateSubset& subset) {
    std::string s;
    for (const auto& id : subset.covariate_ids) s += (s.empty() ? "" : "+") + id;
    return s;
}

CovariateRecord complete_target(const CovariateSchema& schema, const CovariateRecord& z) {
    CovariateRecord out;
    std::vector<std::string> present;
    for (const auto& [name, value] : z) {
        if (name == kMissingnessCovariate) continue;
        if (!schema.index_of(name)) throw ValidationError("unknown covariate '" + name + "'");
        present.push_back(name);
        out.emplace(name, value);
    }
    if (schema.index_of(kMissingnessCovariate)) out.emplace(std::string(kMissingnessCovariate), pattern_label(present));
    return out;
}

TransportMap::TransportMap(const BarycenterSolution& solution) : solution_(&solution) {
    const std::size_t n = solution.size();
    for (const auto& s : solution.subsets) kernels_.emplace_back(solution.data, s);
    log_ky_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double q = gaussian_exponent(solution.y.row(i), solution.y.row(j), solution.h_y);
            log_ky_[i * n + j] = q;
            log_ky_[j * n + i] = q;
        }
    }
}

TransportMap::Target TransportMap::prepare(const CovariateRecord& z) const {
    const auto& sol = *solution_;
    Target t;
    t.record = complete_target(sol.data.schema(), z);
    for (std::size_t k = 0; k < sol.subsets.size(); ++k) {
        const auto& sub = sol.subsets[k];
        const bool present = std::all_of(sub.covariate_ids.begin(), sub.covariate_ids.end(),
                                         [&](const std::string& id) { return t.record.count(id) > 0; });
        if (!present) continue;
        const auto enc = kernels_[k].encode(t.record);
        if (std::any_of(enc.codes.begin(), enc.codes.end(), [](int c) { return c < 0; })) continue;
        std::vector<double> lk(kernels_[k].size());
        for (std::size_t j = 0; j < lk.size(); ++j) lk[j] = kernels_[k].log_shape(enc, j);
        t.subsets.push_back(k);
        t.log_kz.push_back(std::move(lk));
    }
    if (t.subsets.empty()) throw UnsupportedTargetError("target covariates unsupported");
    return t;
}

std::vector<double> TransportMap::invert_standardized(std::span<const double> y, const Target& target) const {
    const auto& sol = *solution_;
    const std::size_t dim = sol.y.dim();
    if (y.size() != dim) throw ValidationError("invert_map: dimension mismatch");
    const double n = static_cast<double>(sol.size());
    std::vector<double> x(y.begin(), y.end());
    std::vector<double> ay, ayz, my(dim), myz(dim);
    for (std::size_t t = 0; t < target.subsets.size(); ++t) {
        const auto& sub = sol.subsets[target.subsets[t]];
        const double lambda = sub.penalty_weight.value_or(0.0);
        if (lambda == 0.0) continue;
        const auto& rows = sub.support;
        const auto& lkz = target.log_kz[t];
        ay.resize(rows.size());
        ayz.resize(rows.size());
        for (std::size_t b = 0; b < rows.size(); ++b) {
            ay[b] = gaussian_exponent(y, sol.y.row(rows[b]), sol.h_y);
            ayz[b] = ay[b] + lkz[b];
        }
        const double ly = log_sum_exp(ay), lyz = log_sum_exp(ayz);
        if (!std::isfinite(ly) || !std::isfinite(lyz)) continue;
        std::fill(my.begin(), my.end(), 0.0);
        std::fill(myz.begin(), myz.end(), 0.0);
        for (std::size_t b = 0; b < rows.size(); ++b) {
            const double wy = std::exp(ay[b] - ly), wyz = std::exp(ayz[b] - lyz);
            const auto yb = sol.y.row(rows[b]);
            for (std::size_t d = 0; d < dim; ++d) {
                my[d] += wy * (yb[d] - y[d]);
                myz[d] += wyz * (yb[d] - y[d]);
            }
        }
        const double c = lambda * n / static_cast<double>(rows.size());
        for (std::size_t d = 0; d < dim; ++d) x[d] += c * (myz[d] - my[d]) / (sol.h_y[d] * sol.h_y[d]);
    }
    return x;
}

std::vector<double> TransportMap::invert(std::span<const double> y, const Target& target) const {
    return solution_->standardization.invert(invert_standardized(y, target));
}

PointSet TransportMap::simulate_standardized(const Target& target) const {
    const auto& sol = *solution_;
    const std::size_t n = sol.size(), dim = sol.y.dim();
    PointSet out = sol.y;
    std::vector<double> ay, ayz, my(dim), myz(dim);
    for (std::size_t t = 0; t < target.subsets.size(); ++t) {
        const auto& sub = sol.subsets[target.subsets[t]];
        const double lambda = sub.penalty_weight.value_or(0.0);
        if (lambda == 0.0) continue;
        const auto& rows = sub.support;
        const auto& lkz = target.log_kz[t];
        const double c = lambda * static_cast<double>(n) / static_cast<double>(rows.size());
        ay.resize(rows.size());
        ayz.resize(rows.size());
        for (std::size_t i = 0; i < n; ++i) {
            const double* lrow = log_ky_.data() + i * n;
            for (std::size_t b = 0; b < rows.size(); ++b) {
                ay[b] = lrow[rows[b]];
                ayz[b] = ay[b] + lkz[b];
            }
            const double ly = log_sum_exp(ay), lyz = log_sum_exp(ayz);
            if (!std::isfinite(ly) || !std::isfinite(lyz)) continue;
            std::fill(my.begin(), my.end(), 0.0);
            std::fill(myz.begin(), myz.end(), 0.0);
            const auto yi = sol.y.row(i);
            for (std::size_t b = 0; b < rows.size(); ++b) {
                const double wy = std::exp(ay[b] - ly), wyz = std::exp(ayz[b] - lyz);
                const auto yb = sol.y.row(rows[b]);
                for (std::size_t d = 0; d < dim; ++d) {
                    my[d] += wy * (yb[d] - yi[d]);
                    myz[d] += wyz * (yb[d] - yi[d]);
                }
            }
            for (std::size_t d = 0; d < dim; ++d) out(i, d) += c * (myz[d] - my[d]) / (sol.h_y[d] * sol.h_y[d]);
        }
    }
    return out;
}

PointSet TransportMap::simulate(const Target& target) const {
    return solution_->standardization.invert(simulate_standardized(target));
}

std::vector<double> invert_map(const BarycenterSolution& solution, std::span<const double> y,
                               const CovariateRecord& z_target) {
    const TransportMap map(solution);
    return map.invert(y, map.prepare(z_target));
}

ConditionalSampleSet simulate_conditional(const BarycenterSolution& solution, const CovariateRecord& z_target) {
    const TransportMap map(solution);
    const auto target = map.prepare(z_target);
    ConditionalSampleSet out{target.record, map.simulate(target), {}};
    for (auto k : target.subsets) out.subsets.push_back(subset_label(solution.subsets[k]));
    return out;
}

nlohmann::json to_json(const ConditionalSampleSet& set) {
    nlohmann::json target = nlohmann::json::object();
    for (const auto& [name, value] : set.target) {
        if (const double* d = std::get_if<double>(&value)) {
            target[name] = *d;
        } else {
            target[name] = std::get<std::string>(value);
        }
    }
    return {{"target", target}, {"subsets", set.subsets}, {"samples", set.samples.size()}};
}

double log_kde_density(const PointSet& samples, const Bandwidth& h, std::span<const double> x) {
    if (samples.size() < 1) throw ValidationError("kde_density: no samples");
    if (samples.dim() != h.dim() || x.size() != h.dim()) throw ValidationError("kde_density: dimension mismatch");
    std::vector<double> a(samples.size());
    for (std::size_t j = 0; j < samples.size(); ++j) a[j] = gaussian_exponent(x, samples.row(j), h);
    return log_sum_exp(a) + h.log_normalizer() - std::log(static_cast<double>(samples.size()));
}

double kde_density(const PointSet& samples, const Bandwidth& h, std::span<const double> x) {
    return std::exp(log_kde_density(samples, h, x));
}

}  // namespace hbary
