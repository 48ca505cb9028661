#pragma once

#include <array>
#include <vector>

#include "aream/tensor.hpp"

namespace aream {

// Kernel hyper-parameters for pixel-adaptive refinement. The intensity and
// position weights must sum to 1 so every kernel is a convex combination
// and constant maps are exact fixpoints.
struct ParConfig {
    double intensity_weight = 0.8;   // w_I
    double position_weight = 0.2;    // w_L
    double intensity_scale = 0.3;    // c_I
    double position_scale = 0.01;    // c_L
    std::vector<int> dilations = {1, 2, 4, 8};
    int iterations = 10;

    void validate() const;
};

// One pixel's refinement kernel: neighbor coordinates (row, col) and their
// convex weights. The pixel itself is part of its neighbor set.
struct PixelKernel {
    std::vector<std::array<int, 2>> positions;
    std::vector<double> weights;
};

// Builds the kernel at (row, col) from an image of shape {1|3} x H x W.
// Neighbors are the union of 3x3 rings at each dilation, clipped at the
// borders; intensity and position terms use locally estimated variances
// and are softmax-normalized over the surviving neighbors.
PixelKernel build_kernel(const Tensor& image, std::size_t row, std::size_t col,
                         const ParConfig& config);

// Applies the kernels to C x H x W maps for config.iterations rounds.
// Each round is a convex combination read from the previous buffer, so the
// output is independent of pixel visitation order and stays inside the
// per-channel range of the input.
Tensor refine(const Tensor& maps, const Tensor& image, const ParConfig& config);

}  // namespace aream
