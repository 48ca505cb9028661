#pragma once

#include <vector>

#include "aream/tensor.hpp"

namespace aream {

// Per-class activation maps, shape C x H x W, each present channel scaled
// to [0,1]. Channels whose class is absent from the image-level labels are
// kept (shapes stay static) but identically zero.
struct CamStack {
    Tensor maps;
    std::vector<bool> present;

    std::size_t classes() const { return maps.extent(0); }
    std::size_t height() const { return maps.extent(1); }
    std::size_t width() const { return maps.extent(2); }
};

// Projects D x H x W features through D x C classifier weights and clamps
// negative activations to zero. Absent-class channels are zeroed.
Tensor compute_raw_cam(const Tensor& features, const Tensor& classifier,
                       const std::vector<bool>& present);

// Min-Max normalizes each present channel independently (absent channels
// stay zero). `raw` must be nonnegative.
CamStack normalize_cam(const Tensor& raw, const std::vector<bool>& present);

}  // namespace aream
