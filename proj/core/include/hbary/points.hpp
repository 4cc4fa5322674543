#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace hbary {

// Dense row-major set of n points in R^dim.
class PointSet {
public:
    PointSet() = default;
    PointSet(std::size_t n, std::size_t dim, double fill = 0.0) : n_(n), dim_(dim), data_(n * dim, fill) {}
    PointSet(std::size_t n, std::size_t dim, std::vector<double> data)
        : n_(n), dim_(dim), data_(std::move(data)) {
        assert(data_.size() == n_ * dim_);
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t dim() const noexcept { return dim_; }
    bool empty() const noexcept { return n_ == 0; }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * dim_, dim_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * dim_, dim_}; }
    double& operator()(std::size_t i, std::size_t d) noexcept { return data_[i * dim_ + d]; }
    double operator()(std::size_t i, std::size_t d) const noexcept { return data_[i * dim_ + d]; }

    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

    friend bool operator==(const PointSet&, const PointSet&) = default;

private:
    std::size_t n_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

}  // namespace hbary
