#pragma once

#include <span>
#include <vector>

#include "aream/affinity.hpp"
#include "aream/labels.hpp"
#include "aream/reactivation.hpp"
#include "aream/tensor.hpp"

namespace aream {

// Loss and analytic gradient of one layer's affinity supervision term.
struct LayerLoss {
    double loss = 0.0;
    Tensor grad;  // N x N, zero on ignored pairs
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
};

struct LossReport {
    std::vector<double> per_layer;
    std::vector<std::size_t> n_pos;
    std::vector<std::size_t> n_neg;
    double total = 0.0;
};

struct AggregatedLoss {
    LossReport report;
    std::vector<Tensor> layer_grads;  // supervise[l] * per-layer gradient
};

struct OptimizeResult {
    AffinityStack stack;
    // loss_history[0] is the pre-optimization aggregated loss and
    // loss_history[steps] the final one.
    std::vector<double> loss_history;
};

// Sigmoid-gated pairwise loss on raw logits: mean (1 - sigmoid) over
// positive pairs plus mean sigmoid over negative pairs. A side with no
// pairs is dropped rather than dividing by zero, so the value stays in
// [0, 2]. The gradient is -s(1-s)/N+ on positive pairs, +s(1-s)/N- on
// negative pairs and exactly zero on ignored ones.
LayerLoss affinity_loss(const Tensor& logits, const AffinityLabels& labels);

// total = sum_l supervise[l] * loss[l]; gradients are scaled the same way.
AggregatedLoss aggregate_loss(std::span<const LayerLoss> per_layer, const LayerWeights& weights);

// Fixed-step descent of the aggregated loss over the head-averaged logits
// of every layer; each head receives the same update, so the head mean
// moves exactly along the step. Steps use the per-pair sigmoid gradient
// scaled by supervise[l], without the 1/N+ and 1/N- factors. Every
// per-pair term is monotone in its own logit, so the recorded aggregated
// loss is non-increasing at any step size.
OptimizeResult optimize_logits(const AffinityStack& stack, const AffinityLabels& labels,
                               const LayerWeights& weights, double step_size,
                               std::size_t steps);

}  // namespace aream
