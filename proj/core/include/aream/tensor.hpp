#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace aream {

// Dense row-major array of 64-bit floats. All numeric modules in this
// library compose a handful of primitives on top of it; there is no
// broadcasting, no views, no dtype zoo.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

    // Takes ownership of `data`; throws if the length does not match the shape.
    static Tensor from_data(std::vector<std::size_t> shape, std::vector<double> data);

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t extent(std::size_t axis) const;

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    // Row-major multi-index access, e.g. t(c, h, w) on a rank-3 tensor.
    template <typename... Index>
    double& operator()(Index... idx) {
        return data_[offset({static_cast<std::size_t>(idx)...})];
    }
    template <typename... Index>
    double operator()(Index... idx) const {
        return data_[offset({static_cast<std::size_t>(idx)...})];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

private:
    std::size_t offset(std::initializer_list<std::size_t> idx) const;

    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

// Softmax along one axis with max-subtraction; every slice along `axis`
// sums to 1 within 1e-12 regardless of input magnitude.
Tensor softmax_over_axis(const Tensor& x, std::size_t axis);

// Maps min -> 0 and max -> 1. A constant input maps to all zeros: a flat
// map carries no localization evidence, so it is treated as inactive.
Tensor minmax_normalize(const Tensor& x);

// Entropy of a probability vector divided by ln(N), so the result lies in
// [0,1]: 0 for one-hot, 1 for uniform. Zero entries contribute 0.
double normalized_entropy(std::span<const double> p);
double normalized_entropy(const Tensor& p);

// Plain dense matrix product for rank-2 tensors.
Tensor matmul(const Tensor& a, const Tensor& b);

// Order-stable pairwise (cascade) summation; used for every reduction whose
// result feeds a tolerance check, so accumulation error stays ~eps*log(n).
double pairwise_sum(std::span<const double> values);

}  // namespace aream
