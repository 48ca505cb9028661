#include "aream/par.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aream {

namespace {

constexpr double kVarianceFloor = 1e-8;  // guards locally constant patches

void check_image(const Tensor& image) {
    if (image.rank() != 3 || (image.extent(0) != 1 && image.extent(0) != 3)) {
        throw std::invalid_argument("par: image must be 1xHxW or 3xHxW");
    }
}

std::vector<std::array<int, 2>> neighbor_offsets(const std::vector<int>& dilations) {
    std::vector<std::array<int, 2>> offsets;
    for (int d : dilations) {
        for (int dr : {-d, 0, d}) {
            for (int dc : {-d, 0, d}) {
                const std::array<int, 2> off{dr, dc};
                if (std::find(offsets.begin(), offsets.end(), off) == offsets.end()) {
                    offsets.push_back(off);
                }
            }
        }
    }
    return offsets;
}

// Softmax with max subtraction over a small scratch vector, in place.
void softmax_inplace(std::vector<double>& v) {
    const double mx = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - mx);
        sum += x;
    }
    for (double& x : v) x /= sum;
}

PixelKernel kernel_at(const Tensor& image, std::size_t row, std::size_t col,
                      const ParConfig& config,
                      const std::vector<std::array<int, 2>>& offsets) {
    const std::size_t channels = image.extent(0);
    const std::size_t height = image.extent(1);
    const std::size_t width = image.extent(2);

    PixelKernel kernel;
    for (const auto& [dr, dc] : offsets) {
        const long r = static_cast<long>(row) + dr;
        const long c = static_cast<long>(col) + dc;
        if (r < 0 || c < 0 || r >= static_cast<long>(height) || c >= static_cast<long>(width)) {
            continue;  // clipped at the border, kernel renormalizes over survivors
        }
        kernel.positions.push_back({static_cast<int>(r), static_cast<int>(c)});
    }
    const std::size_t m = kernel.positions.size();

    // Local variance of intensities (mean over channels) and of positions
    // over the surviving neighbor set.
    double var_intensity = 0.0;
    for (std::size_t ch = 0; ch < channels; ++ch) {
        double mean = 0.0, mean_sq = 0.0;
        for (const auto& [r, c] : kernel.positions) {
            const double v = image(ch, static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            mean += v;
            mean_sq += v * v;
        }
        mean /= static_cast<double>(m);
        mean_sq /= static_cast<double>(m);
        var_intensity += std::max(0.0, mean_sq - mean * mean);
    }
    var_intensity /= static_cast<double>(channels);

    double var_position = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
        double mean = 0.0, mean_sq = 0.0;
        for (const auto& pos : kernel.positions) {
            const double v = pos[axis];
            mean += v;
            mean_sq += v * v;
        }
        mean /= static_cast<double>(m);
        mean_sq /= static_cast<double>(m);
        var_position += std::max(0.0, mean_sq - mean * mean);
    }
    var_position /= 2.0;

    const double sigma_i = std::max(var_intensity, kVarianceFloor);
    const double sigma_l = std::max(var_position, kVarianceFloor);

    std::vector<double> intensity_term(m), position_term(m);
    for (std::size_t k = 0; k < m; ++k) {
        const auto& [r, c] = kernel.positions[k];
        double di2 = 0.0;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const double d = image(ch, row, col) -
                             image(ch, static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            di2 += d * d;
        }
        di2 /= static_cast<double>(channels);
        const double drr = static_cast<double>(r) - static_cast<double>(row);
        const double dcc = static_cast<double>(c) - static_cast<double>(col);
        const double dl2 = (drr * drr + dcc * dcc) / 2.0;
        intensity_term[k] = -di2 / (config.intensity_scale * sigma_i);
        position_term[k] = -dl2 / (config.position_scale * sigma_l);
    }
    softmax_inplace(intensity_term);
    softmax_inplace(position_term);

    kernel.weights.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        kernel.weights[k] = config.intensity_weight * intensity_term[k] +
                            config.position_weight * position_term[k];
    }
    return kernel;
}

}  // namespace

void ParConfig::validate() const {
    if (intensity_weight < 0.0 || position_weight < 0.0 ||
        std::abs(intensity_weight + position_weight - 1.0) > 1e-12) {
        throw std::invalid_argument("ParConfig: kernel weights must be nonnegative and sum to 1");
    }
    if (intensity_scale <= 0.0 || position_scale <= 0.0) {
        throw std::invalid_argument("ParConfig: scales must be positive");
    }
    if (dilations.empty()) {
        throw std::invalid_argument("ParConfig: dilation list is empty");
    }
    for (int d : dilations) {
        if (d <= 0) throw std::invalid_argument("ParConfig: dilations must be positive");
    }
    if (iterations < 0) {
        throw std::invalid_argument("ParConfig: iterations must be >= 0");
    }
}

PixelKernel build_kernel(const Tensor& image, std::size_t row, std::size_t col,
                         const ParConfig& config) {
    config.validate();
    check_image(image);
    if (row >= image.extent(1) || col >= image.extent(2)) {
        throw std::invalid_argument("build_kernel: pixel (" + std::to_string(row) + "," +
                                    std::to_string(col) + ") out of bounds");
    }
    return kernel_at(image, row, col, config, neighbor_offsets(config.dilations));
}

Tensor refine(const Tensor& maps, const Tensor& image, const ParConfig& config) {
    config.validate();
    check_image(image);
    if (maps.rank() != 3 || maps.extent(1) != image.extent(1) ||
        maps.extent(2) != image.extent(2)) {
        throw std::invalid_argument("refine: maps must be CxHxW matching the image plane");
    }
    if (config.iterations == 0) return maps;

    const std::size_t channels = maps.extent(0);
    const std::size_t height = maps.extent(1);
    const std::size_t width = maps.extent(2);
    const std::size_t plane = height * width;

    // Kernels depend only on the image; build them once.
    const auto offsets = neighbor_offsets(config.dilations);
    std::vector<PixelKernel> kernels;
    kernels.reserve(plane);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            kernels.push_back(kernel_at(image, r, c, config, offsets));
        }
    }

    Tensor current = maps;
    Tensor next(maps.shape());
    for (int it = 0; it < config.iterations; ++it) {
        auto src = current.data();
        auto dst = next.data();
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const std::size_t base = ch * plane;
            const auto [mn_it, mx_it] =
                std::minmax_element(src.begin() + base, src.begin() + base + plane);
            const double lo = *mn_it, hi = *mx_it;
            for (std::size_t p = 0; p < plane; ++p) {
                const PixelKernel& kernel = kernels[p];
                const double center = src[base + p];
                // Accumulating weighted deltas keeps constant regions
                // bitwise unchanged even though the weights only sum to 1
                // up to rounding.
                double acc = 0.0;
                for (std::size_t k = 0; k < kernel.positions.size(); ++k) {
                    const auto& [r, c] = kernel.positions[k];
                    const double v = src[base + static_cast<std::size_t>(r) * width +
                                         static_cast<std::size_t>(c)];
                    acc += kernel.weights[k] * (v - center);
                }
                dst[base + p] = std::clamp(center + acc, lo, hi);
            }
        }
        std::swap(current, next);
    }
    return current;
}

}  // namespace aream
