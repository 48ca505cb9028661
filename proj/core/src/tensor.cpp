#include "aream/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace aream {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t e : shape) n *= e;
    return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor Tensor::from_data(std::vector<std::size_t> shape, std::vector<double> data) {
    if (data.size() != shape_product(shape)) {
        throw std::invalid_argument("Tensor::from_data: data length " +
                                    std::to_string(data.size()) +
                                    " does not match shape product " +
                                    std::to_string(shape_product(shape)));
    }
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = std::move(data);
    return t;
}

std::size_t Tensor::extent(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw std::invalid_argument("Tensor::extent: axis " + std::to_string(axis) +
                                    " out of range for rank " + std::to_string(shape_.size()));
    }
    return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> idx) const {
    std::size_t off = 0;
    std::size_t axis = 0;
    for (std::size_t i : idx) {
        off = off * shape_[axis] + i;
        ++axis;
    }
    return off;
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

double pairwise_sum(std::span<const double> values) {
    // Cascade down to small blocks; 8-element base case keeps recursion shallow.
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Tensor softmax_over_axis(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw std::invalid_argument("softmax_over_axis: axis " + std::to_string(axis) +
                                    " out of range for rank " + std::to_string(x.rank()));
    }
    if (x.extent(axis) == 0) {
        throw std::invalid_argument("softmax_over_axis: extent along axis is zero");
    }

    // Iterate slices as (outer, axis, inner) with inner = product of trailing extents.
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < x.rank(); ++a) inner *= x.extent(a);
    const std::size_t n = x.extent(axis);
    const std::size_t outer = x.size() / (n * inner);

    Tensor out = x;
    auto src = x.data();
    auto dst = out.data();
    std::vector<double> slice(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * n * inner + i;
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < n; ++k) mx = std::max(mx, src[base + k * inner]);
            for (std::size_t k = 0; k < n; ++k) slice[k] = std::exp(src[base + k * inner] - mx);
            const double denom = pairwise_sum(slice);
            for (std::size_t k = 0; k < n; ++k) dst[base + k * inner] = slice[k] / denom;
        }
    }
    return out;
}

Tensor minmax_normalize(const Tensor& x) {
    if (x.size() == 0) return x;
    auto src = x.data();
    const auto [mn_it, mx_it] = std::minmax_element(src.begin(), src.end());
    const double mn = *mn_it, mx = *mx_it;
    Tensor out(x.shape());
    if (mx == mn) return out;  // constant input -> all zeros
    auto dst = out.data();
    const double range = mx - mn;
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - mn) / range;
    return out;
}

double normalized_entropy(std::span<const double> p) {
    if (p.size() < 2) {
        throw std::invalid_argument("normalized_entropy: need at least 2 entries");
    }
    for (double v : p) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("normalized_entropy: negative or NaN entry");
        }
    }
    std::vector<double> copy(p.begin(), p.end());
    const double total = pairwise_sum(copy);
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument("normalized_entropy: entries sum to " +
                                    std::to_string(total) + ", not 1");
    }
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        terms[i] = p[i] > 0.0 ? -p[i] * std::log(p[i]) : 0.0;  // 0*ln 0 := 0
    }
    const double h = pairwise_sum(terms) / std::log(static_cast<double>(p.size()));
    return std::clamp(h, 0.0, 1.0);
}

double normalized_entropy(const Tensor& p) { return normalized_entropy(p.data()); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2) {
        throw std::invalid_argument("matmul: both operands must be rank-2");
    }
    const std::size_t m = a.extent(0), k = a.extent(1);
    if (b.extent(0) != k) {
        throw std::invalid_argument("matmul: inner extents differ (" + std::to_string(k) +
                                    " vs " + std::to_string(b.extent(0)) + ")");
    }
    const std::size_t n = b.extent(1);
    Tensor c({m, n});
    auto pa = a.data(), pb = b.data();
    auto pc = c.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = pa[i * k + kk];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) pc[i * n + j] += av * pb[kk * n + j];
        }
    }
    return c;
}

}  // namespace aream
