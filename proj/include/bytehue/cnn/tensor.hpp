// bytehue: color-encoded smart-contract bytecode inspection
// Copyright 2026 The bytehue Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <new>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "bytehue/error.hpp"

namespace bytehue::cnn {

using Shape = std::vector<std::size_t>;

// Cache-line aligned storage. Vectorized kernels pick their loop split from
// the buffer address, so fixed alignment keeps results bit-reproducible.
template <class T>
struct AlignedAllocator
{
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept
    {
    }

    T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    friend bool operator==(const AlignedAllocator&, const AlignedAllocator<U>&) noexcept
    {
        return true;
    }
};

using AlignedDoubles = std::vector<double, AlignedAllocator<double>>;

inline std::size_t shape_size(const Shape& shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape)
{
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i)
        out += (i ? "," : "") + std::to_string(shape[i]);
    return out + ")";
}

/// Dense row-major array of doubles.
class Tensor
{
public:
    Tensor() = default;

    explicit Tensor(Shape shape, double fill = 0.0) : shape_(std::move(shape))
    {
        for (const auto d : shape_)
            if (d == 0)
                throw Error(ErrorCode::ShapeMismatch, "tensor dimensions must be positive: " + shape_string(shape_));
        data_.assign(shape_size(shape_), fill);
    }

    Tensor(Shape shape, const std::vector<double>& data)
      : shape_(std::move(shape)), data_(data.begin(), data.end())
    {
        check_length();
    }

    Tensor(Shape shape, std::initializer_list<double> data)
      : shape_(std::move(shape)), data_(data.begin(), data.end())
    {
        check_length();
    }

    Tensor(Shape shape, AlignedDoubles data) : shape_(std::move(shape)), data_(std::move(data))
    {
        check_length();
    }

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    /// (c, y, x) access for rank-3 tensors.
    double& at(std::size_t c, std::size_t y, std::size_t x) noexcept
    {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }
    double at(std::size_t c, std::size_t y, std::size_t x) const noexcept
    {
        return data_[(c * shape_[1] + y) * shape_[2] + x];
    }

    /// Same data, new shape of equal element count.
    Tensor reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

    bool all_finite() const noexcept
    {
        for (const auto v : data_)
            if (!std::isfinite(v))
                return false;
        return true;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    AlignedDoubles data_;

    void check_length() const
    {
        if (data_.size() != shape_size(shape_))
            throw Error(ErrorCode::ShapeMismatch, "data length " + std::to_string(data_.size()) +
                                                      " does not match shape " + shape_string(shape_));
    }
};

}  // namespace bytehue::cnn
