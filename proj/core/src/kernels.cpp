#include "hbary/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "hbary/error.hpp"
#include "hbary/log.hpp"

namespace hbary {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2 pi) / 2
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> a) {
    double m = kNegInf;
    for (double v : a) m = std::max(m, v);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    return m + std::log(s);
}

}  // namespace

// ---------------------------------------------------------------------------

Bandwidth::Bandwidth(std::vector<double> widths) : widths_(std::move(widths)) {
    if (widths_.empty()) throw ValidationError("bandwidth: empty");
    for (double h : widths_) {
        if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("bandwidth: entries must be positive and finite");
    }
}

Bandwidth Bandwidth::scaled(double factor) const {
    auto w = widths_;
    for (auto& h : w) h *= factor;
    return Bandwidth(std::move(w));
}

double Bandwidth::log_normalizer() const noexcept {
    double s = 0.0;
    for (double h : widths_) s -= kHalfLog2Pi + std::log(h);
    return s;
}

double gaussian_exponent(std::span<const double> u, std::span<const double> v, const Bandwidth& h) noexcept {
    double q = 0.0;
    for (std::size_t d = 0; d < u.size(); ++d) {
        const double t = (u[d] - v[d]) / h[d];
        q += t * t;
    }
    return -0.5 * q;
}

double gaussian_kernel(std::span<const double> u, std::span<const double> v, const Bandwidth& h) {
    if (u.size() != v.size() || u.size() != h.dim()) throw ValidationError("gaussian_kernel: dimension mismatch");
    return std::exp(h.log_normalizer() + gaussian_exponent(u, v, h));
}

double categorical_kernel(std::string_view a, std::string_view b) noexcept { return a == b ? 1.0 : 0.0; }

double silverman_bandwidth(std::span<const double> values, std::size_t d, std::size_t n) {
    if (n < 2) throw ConfigError("silverman_bandwidth: need n >= 2");
    if (d < 1) throw ConfigError("silverman_bandwidth: need d >= 1");
    if (values.size() < 2) throw ConfigError("silverman_bandwidth: need at least two values");
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / static_cast<double>(values.size() - 1));
    const double floor = 1e-3 * (1.0 + std::abs(mean));
    if (!(sigma > 0.0)) {
        warn("silverman_bandwidth: constant values, using floor width");
        return floor;
    }
    const double dd = static_cast<double>(d);
    const double h =
        sigma * std::pow(4.0 / (dd + 2.0), 1.0 / (dd + 4.0)) * std::pow(static_cast<double>(n), -1.0 / (dd + 4.0));
    return std::max(h, floor * 1e-6);
}

Bandwidth silverman_bandwidth(const PointSet& points) {
    std::vector<double> widths;
    std::vector<double> column(points.size());
    for (std::size_t d = 0; d < points.dim(); ++d) {
        for (std::size_t i = 0; i < points.size(); ++i) column[i] = points(i, d);
        widths.push_back(silverman_bandwidth(column, points.dim(), points.size()));
    }
    return Bandwidth(std::move(widths));
}

// ---------------------------------------------------------------------------

CovariateKernel::CovariateKernel(const HeterogeneousDataset& dataset, const CovariateSubset& subset)
    : bandwidths_(subset.z_bandwidths) {
    for (const auto& id : subset.covariate_ids) specs_.push_back(dataset.schema().at(id));
    std::vector<CovariateRecord> records;
    records.reserve(subset.support.size());
    for (auto i : subset.support) records.push_back(dataset.record(i));
    build(records);
}

CovariateKernel::CovariateKernel(std::vector<CovariateSpec> specs, std::vector<std::optional<double>> bandwidths,
                                 std::span<const CovariateRecord> records)
    : specs_(std::move(specs)), bandwidths_(std::move(bandwidths)) {
    build(records);
}

void CovariateKernel::build(std::span<const CovariateRecord> records) {
    if (specs_.empty()) throw ValidationError("covariate kernel: no covariates");
    if (bandwidths_.size() != specs_.size()) throw ValidationError("covariate kernel: bandwidth count mismatch");
    n_ = records.size();
    log_norm_ = 0.0;
    for (std::size_t c = 0; c < specs_.size(); ++c) {
        if (specs_[c].kind == CovariateKind::continuous) {
            const auto& h = bandwidths_[c];
            if (!h || !(*h > 0.0) || !std::isfinite(*h)) {
                throw ValidationError("covariate kernel: '" + specs_[c].name + "' needs a positive bandwidth");
            }
            continuous_idx_.push_back(c);
            log_norm_ -= kHalfLog2Pi + std::log(*h);
        } else {
            categorical_idx_.push_back(c);
        }
    }
    categories_.assign(categorical_idx_.size(), {});
    values_.resize(n_ * continuous_idx_.size());
    codes_.resize(n_ * categorical_idx_.size());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t k = 0; k < continuous_idx_.size(); ++k) {
            const auto& name = specs_[continuous_idx_[k]].name;
            const auto it = records[i].find(name);
            if (it == records[i].end()) throw ValidationError("covariate kernel: record lacks '" + name + "'");
            values_[i * continuous_idx_.size() + k] = std::get<double>(it->second);
        }
        for (std::size_t k = 0; k < categorical_idx_.size(); ++k) {
            const auto& name = specs_[categorical_idx_[k]].name;
            const auto it = records[i].find(name);
            if (it == records[i].end()) throw ValidationError("covariate kernel: record lacks '" + name + "'");
            const auto& label = std::get<std::string>(it->second);
            auto& cats = categories_[k];
            auto pos = std::find(cats.begin(), cats.end(), label);
            if (pos == cats.end()) pos = cats.insert(cats.end(), label);
            codes_[i * categorical_idx_.size() + k] = static_cast<int>(pos - cats.begin());
        }
    }
}

double CovariateKernel::log_shape(std::size_t i, std::size_t j) const noexcept {
    const std::size_t nc = categorical_idx_.size();
    for (std::size_t k = 0; k < nc; ++k) {
        if (codes_[i * nc + k] != codes_[j * nc + k]) return kNegInf;
    }
    const std::size_t nd = continuous_idx_.size();
    double q = 0.0;
    for (std::size_t k = 0; k < nd; ++k) {
        const double t = (values_[i * nd + k] - values_[j * nd + k]) / *bandwidths_[continuous_idx_[k]];
        q += t * t;
    }
    return -0.5 * q;
}

double CovariateKernel::shape(std::size_t i, std::size_t j) const noexcept { return std::exp(log_shape(i, j)); }

double CovariateKernel::operator()(std::size_t i, std::size_t j) const noexcept {
    return std::exp(log_norm_) * shape(i, j);
}

CovariateKernel::Encoded CovariateKernel::encode(const CovariateRecord& record) const {
    Encoded e;
    for (auto c : continuous_idx_) {
        const auto it = record.find(specs_[c].name);
        if (it == record.end()) throw UnsupportedTargetError("target lacks covariate '" + specs_[c].name + "'");
        const double* v = std::get_if<double>(&it->second);
        if (!v || !std::isfinite(*v)) throw ValidationError("covariate '" + specs_[c].name + "' must be numeric");
        e.continuous.push_back(*v);
    }
    for (std::size_t k = 0; k < categorical_idx_.size(); ++k) {
        const auto& name = specs_[categorical_idx_[k]].name;
        const auto it = record.find(name);
        if (it == record.end()) throw UnsupportedTargetError("target lacks covariate '" + name + "'");
        const auto* s = std::get_if<std::string>(&it->second);
        if (!s) throw ValidationError("covariate '" + name + "' must be categorical");
        const auto& cats = categories_[k];
        const auto pos = std::find(cats.begin(), cats.end(), *s);
        e.codes.push_back(pos == cats.end() ? -1 : static_cast<int>(pos - cats.begin()));
    }
    return e;
}

double CovariateKernel::log_shape(const Encoded& target, std::size_t j) const noexcept {
    const std::size_t nc = categorical_idx_.size();
    for (std::size_t k = 0; k < nc; ++k) {
        if (target.codes[k] != codes_[j * nc + k]) return kNegInf;
    }
    const std::size_t nd = continuous_idx_.size();
    double q = 0.0;
    for (std::size_t k = 0; k < nd; ++k) {
        const double t = (target.continuous[k] - values_[j * nd + k]) / *bandwidths_[continuous_idx_[k]];
        q += t * t;
    }
    return -0.5 * q;
}

// ---------------------------------------------------------------------------

Gram response_gram(const PointSet& y, const Bandwidth& h) {
    if (y.dim() != h.dim()) throw ValidationError("response_gram: dimension mismatch");
    Gram g{y.size(), std::vector<double>(y.size() * y.size())};
    const double c = std::exp(h.log_normalizer());
    for (std::size_t i = 0; i < y.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) g.values[i * g.n + j] = c * std::exp(gaussian_exponent(y.row(i), y.row(j), h));
    }
    return g;
}

Gram covariate_gram(const CovariateKernel& z) {
    Gram g{z.size(), std::vector<double>(z.size() * z.size())};
    for (std::size_t i = 0; i < z.size(); ++i) {
        for (std::size_t j = 0; j < z.size(); ++j) g.values[i * g.n + j] = z(i, j);
    }
    return g;
}

double mi_from_grams(const Gram& ky, const Gram& kz) {
    if (ky.n != kz.n) throw ValidationError("mi_from_grams: size mismatch");
    const std::size_t n = ky.n;
    if (n < 2) throw ValidationError("mi_from_grams: need at least two points");
    const double log_n = std::log(static_cast<double>(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double joint = 0.0, sy = 0.0, sz = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            joint += ky(i, j) * kz(i, j);
            sy += ky(i, j);
            sz += kz(i, j);
        }
        if (!(joint > 0.0) || !(sy > 0.0) || !(sz > 0.0)) {
            throw std::logic_error("mi_from_grams: vanishing kernel sum despite self term");
        }
        total += (std::log(joint) - log_n) - (std::log(sy) - log_n) - (std::log(sz) - log_n);
    }
    return total / static_cast<double>(n);
}

double mi_estimate(const PointSet& y, const CovariateKernel& z, const Bandwidth& hy) {
    const std::size_t n = y.size();
    if (n != z.size()) throw ValidationError("mi_estimate: |Y| != |Z|");
    if (n < 2) throw ValidationError("mi_estimate: need N_k >= 2");
    if (y.dim() != hy.dim()) throw ValidationError("mi_estimate: bandwidth dimension mismatch");
    const double log_n = std::log(static_cast<double>(n));
    const double ly = hy.log_normalizer();
    const double lz = z.log_normalizer();
    std::vector<double> joint(n), ky(n), kz(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double a = ly + gaussian_exponent(y.row(i), y.row(j), hy);
            const double b = lz + z.log_shape(i, j);
            ky[j] = a;
            kz[j] = b;
            joint[j] = a + b;
        }
        const double t1 = log_sum_exp(joint), t2 = log_sum_exp(ky), t3 = log_sum_exp(kz);
        if (!std::isfinite(t1) || !std::isfinite(t2) || !std::isfinite(t3)) {
            throw std::logic_error("mi_estimate: vanishing kernel sum despite self term");
        }
        total += (t1 - log_n) - (t2 - log_n) - (t3 - log_n);
    }
    return total / static_cast<double>(n);
}

}  // namespace hbary
