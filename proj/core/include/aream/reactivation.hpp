#pragma once

#include <span>
#include <vector>

#include "aream/affinity.hpp"
#include "aream/cam.hpp"
#include "aream/tensor.hpp"

namespace aream {

// Per-layer weights of the re-activation mechanism. `raw` is the inverse
// normalized entropy of each layer's enhanced distribution; `fuse` is raw
// rescaled to sum 1 and drives the forward fusion; `supervise` = 1 - raw
// drives the backward affinity loss, so layers whose propagated maps are
// diffuse get little fusion weight but strong supervision.
struct LayerWeights {
    std::vector<double> fuse;
    std::vector<double> supervise;
    std::vector<double> raw;

    std::size_t layers() const { return fuse.size(); }

    static LayerWeights uniform(std::size_t layers);
    // fuse = raw / sum(raw), or uniform when every raw weight is 0;
    // supervise = 1 - raw, elementwise.
    static LayerWeights from_raw(std::vector<double> raw);
};

// Propagates the class-summed CAM through one affinity matrix and softmaxes
// the result over all positions: an H x W probability map whose entropy
// tells how much localization evidence the layer preserves.
Tensor enhanced_distribution(const CamStack& cams, const RowStochasticAffinity& aff);

// 1 - normalized entropy of a probability map: 0 for uniform, 1 for one-hot.
double layer_weight(const Tensor& p_hat);

// Propagates every present channel through one affinity matrix, then
// Min-Max renormalizes each channel back to [0,1].
CamStack propagate_single(const CamStack& cams, const RowStochasticAffinity& aff);

// Propagates through the convex combination sum_l fuse[l] * A^(l).
CamStack fuse_layers(const CamStack& cams, std::span<const RowStochasticAffinity> layers,
                     const LayerWeights& weights);

// raw[l] = layer_weight(enhanced_distribution(cams, layers[l])),
// fuse = raw / sum(raw) (uniform when all raw are 0), supervise = 1 - raw.
LayerWeights compute_layer_weights(const CamStack& cams,
                                   std::span<const RowStochasticAffinity> layers);

}  // namespace aream
