#pragma once

#include <vector>

#include "aream/affinity.hpp"
#include "aream/cam.hpp"
#include "aream/config.hpp"
#include "aream/labels.hpp"
#include "aream/loss.hpp"
#include "aream/reactivation.hpp"
#include "aream/tensor.hpp"

namespace aream {

// Head-averages every layer of raw logits into row-stochastic matrices.
std::vector<RowStochasticAffinity> head_averaged_layers(const AffinityStack& stack);

// Zeroes the supervise weights of layers not listed in `mask` (empty mask
// keeps them all).
LayerWeights apply_supervise_mask(LayerWeights weights, const std::vector<std::size_t>& mask);

struct RefineResult {
    CamStack cams;         // normalized activation maps
    LayerWeights weights;  // entropy weights (raw/fuse/supervise)
    CamStack fused;        // propagated through the weighted affinity mix
    Tensor refined;        // fused maps after pixel-adaptive refinement
    LabelMap labels;
};

// cam -> layer weights -> fusion -> pixel-adaptive refinement -> labels.
// With uniform_weights the fusion uses 1/L per layer, while the entropy
// weights are still computed and reported for supervision.
RefineResult run_refine(const Tensor& features, const Tensor& classifier,
                        const std::vector<bool>& present, const AffinityStack& stack,
                        const Tensor& image, const Config& config, bool uniform_weights);

// Per-layer sigmoid losses of the head-averaged logits against the labels,
// aggregated with the supervise weights.
AggregatedLoss evaluate_affinity_loss(const AffinityStack& stack, const AffinityLabels& labels,
                                      const LayerWeights& weights);

}  // namespace aream
