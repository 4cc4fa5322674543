#pragma once

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hbary/dataset.hpp"
#include "hbary/points.hpp"

namespace hbary {

// Diagonal kernel scaling: one positive width per dimension.
class Bandwidth {
public:
    Bandwidth() = default;
    explicit Bandwidth(std::vector<double> widths);
    Bandwidth(std::initializer_list<double> widths) : Bandwidth(std::vector<double>(widths)) {}
    static Bandwidth uniform(std::size_t dim, double width) { return Bandwidth(std::vector<double>(dim, width)); }

    std::size_t dim() const noexcept { return widths_.size(); }
    double operator[](std::size_t d) const noexcept { return widths_[d]; }
    const std::vector<double>& widths() const noexcept { return widths_; }
    Bandwidth scaled(double factor) const;

    // log of the Gaussian normalizer prod_d (2 pi h_d^2)^{-1/2}.
    double log_normalizer() const noexcept;

    friend bool operator==(const Bandwidth&, const Bandwidth&) = default;

private:
    std::vector<double> widths_;
};

// Normalized product Gaussian kernel.
double gaussian_kernel(std::span<const double> u, std::span<const double> v, const Bandwidth& h);

// -1/2 sum_d ((u_d - v_d)/h_d)^2, the exponent of gaussian_kernel.
double gaussian_exponent(std::span<const double> u, std::span<const double> v, const Bandwidth& h) noexcept;

double categorical_kernel(std::string_view a, std::string_view b) noexcept;

// Rule-of-thumb width sigma * (4/(d+2))^{1/(d+4)} * n^{-1/(d+4)}, sigma the sample
// standard deviation of values. Constant input yields the floor 1e-3 * (1 + |mean|).
double silverman_bandwidth(std::span<const double> values, std::size_t d, std::size_t n);

// Silverman width per response dimension.
Bandwidth silverman_bandwidth(const PointSet& points);

// Product kernel over the covariates of one subset, evaluated on a fixed list of
// records: Gaussian factors for continuous entries, indicators for categorical ones.
class CovariateKernel {
public:
    // Rows of `subset.support` in `dataset`.
    CovariateKernel(const HeterogeneousDataset& dataset, const CovariateSubset& subset);
    CovariateKernel(std::vector<CovariateSpec> specs, std::vector<std::optional<double>> bandwidths,
                    std::span<const CovariateRecord> records);

    // A target record encoded against this kernel's categories.
    struct Encoded {
        std::vector<double> continuous;
        std::vector<int> codes;  // -1 = category never seen
    };

    std::size_t size() const noexcept { return n_; }
    double log_normalizer() const noexcept { return log_norm_; }

    // Unnormalized kernel value in [0, 1]; exp(log_normalizer()) * shape(i, j) is K^z.
    double shape(std::size_t i, std::size_t j) const noexcept;
    double log_shape(std::size_t i, std::size_t j) const noexcept;
    double operator()(std::size_t i, std::size_t j) const noexcept;

    // Throws UnsupportedTargetError if the record lacks one of the covariates.
    Encoded encode(const CovariateRecord& record) const;
    // log shape between an encoded target and stored record j; -inf on category mismatch.
    double log_shape(const Encoded& target, std::size_t j) const noexcept;

    const std::vector<CovariateSpec>& specs() const noexcept { return specs_; }

private:
    void build(std::span<const CovariateRecord> records);

    std::vector<CovariateSpec> specs_;
    std::vector<std::optional<double>> bandwidths_;
    std::size_t n_ = 0;
    std::vector<std::size_t> continuous_idx_;  // into specs_
    std::vector<std::size_t> categorical_idx_;
    std::vector<double> values_;  // n_ x continuous, row-major
    std::vector<int> codes_;      // n_ x categorical, row-major
    std::vector<std::vector<std::string>> categories_;
    double log_norm_ = 0.0;
};

// Square matrix of kernel values, row-major.
struct Gram {
    std::size_t n = 0;
    std::vector<double> values;
    double operator()(std::size_t i, std::size_t j) const noexcept { return values[i * n + j]; }
};

Gram response_gram(const PointSet& y, const Bandwidth& h);
Gram covariate_gram(const CovariateKernel& z);

// Kernel mutual-information estimate from the two kernel matrices (self terms included).
double mi_from_grams(const Gram& ky, const Gram& kz);

// Kernel mutual-information estimate between responses y and the covariate records held by z.
double mi_estimate(const PointSet& y, const CovariateKernel& z, const Bandwidth& hy);

}  // namespace hbary
