// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "splitcomp/error.hpp"

namespace splitcomp {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

std::string shape_to_string(const Shape& shape);

/// Dense row-major tensor backed by an Eigen column vector.
///
/// The flat layout is the canonical row-major order: for a [C,H,W] tensor
/// element (c,h,w) lives at (c*H + h)*W + w. Wire formats and the
/// bitstream rely on this order.
template <typename Scalar>
class BasicTensor {
public:
    using Storage = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    BasicTensor() = default;

    explicit BasicTensor(Shape shape)
        : shape_(std::move(shape)), data_(Storage::Zero(shape_numel(shape_))) {
        check_shape();
    }

    BasicTensor(Shape shape, Storage data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_shape();
        if (data_.size() != shape_numel(shape_)) {
            throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                                 " does not match shape " + shape_to_string(shape_));
        }
    }

    BasicTensor(Shape shape, std::initializer_list<Scalar> values)
        : BasicTensor(std::move(shape), Eigen::Map<const Storage>(values.begin(),
                                                                  static_cast<Index>(values.size()))) {}

    static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }

    static BasicTensor constant(Shape shape, Scalar value) {
        BasicTensor t(std::move(shape));
        t.data_.setConstant(value);
        return t;
    }

    const Shape& shape() const noexcept { return shape_; }
    Index rank() const noexcept { return static_cast<Index>(shape_.size()); }
    Index dim(Index axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
    Index size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.size() == 0; }

    const Storage& values() const noexcept { return data_; }
    Storage& values() noexcept { return data_; }
    std::span<const Scalar> span() const noexcept { return {data_.data(), static_cast<std::size_t>(data_.size())}; }

    Scalar operator[](Index i) const { return data_[i]; }
    Scalar& operator[](Index i) { return data_[i]; }

    Scalar operator()(Index c, Index h, Index w) const { return data_[(c * shape_[1] + h) * shape_[2] + w]; }
    Scalar& operator()(Index c, Index h, Index w) { return data_[(c * shape_[1] + h) * shape_[2] + w]; }

    /// Contiguous view of the [H,W] plane of channel c of a rank-3 tensor.
    auto channel(Index c) const { return data_.segment(c * shape_[1] * shape_[2], shape_[1] * shape_[2]); }

    BasicTensor reshaped(Shape shape) const { return BasicTensor(std::move(shape), data_); }

    bool all_finite() const { return data_.allFinite(); }

    friend bool operator==(const BasicTensor& a, const BasicTensor& b) {
        return a.shape_ == b.shape_ && a.data_ == b.data_;
    }

private:
    void check_shape() const {
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (shape_[i] < 0) throw DimensionError("negative extent on axis " + std::to_string(i));
        }
    }

    Shape shape_;
    Storage data_;
};

using Tensor = BasicTensor<double>;

/// Throws DimensionError unless `t` has the given rank.
template <typename Scalar>
void require_rank(const BasicTensor<Scalar>& t, Index rank, const char* what) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             shape_to_string(t.shape()));
    }
}

}  // namespace splitcomp
