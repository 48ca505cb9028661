#include "aream/pipeline.hpp"

#include <stdexcept>

#include "aream/par.hpp"

namespace aream {

std::vector<RowStochasticAffinity> head_averaged_layers(const AffinityStack& stack) {
    stack.validate();
    std::vector<RowStochasticAffinity> layers;
    layers.reserve(stack.layers());
    for (std::size_t l = 0; l < stack.layers(); ++l) {
        layers.push_back(head_average(stack.layer_logits(l)));
    }
    return layers;
}

LayerWeights apply_supervise_mask(LayerWeights weights, const std::vector<std::size_t>& mask) {
    if (mask.empty()) return weights;
    std::vector<double> masked(weights.supervise.size(), 0.0);
    for (std::size_t l : mask) {
        if (l >= weights.supervise.size()) {
            throw std::invalid_argument("supervise_layers: layer index " + std::to_string(l) +
                                        " out of range");
        }
        masked[l] = weights.supervise[l];
    }
    weights.supervise = std::move(masked);
    return weights;
}

RefineResult run_refine(const Tensor& features, const Tensor& classifier,
                        const std::vector<bool>& present, const AffinityStack& stack,
                        const Tensor& image, const Config& config, bool uniform_weights) {
    RefineResult out;
    out.cams = normalize_cam(compute_raw_cam(features, classifier, present), present);

    const std::vector<RowStochasticAffinity> layers = head_averaged_layers(stack);
    out.weights = compute_layer_weights(out.cams, layers);

    const LayerWeights fusion =
        uniform_weights ? LayerWeights::uniform(layers.size()) : out.weights;
    out.fused = fuse_layers(out.cams, layers, fusion);

    // The smoothing contracts the per-channel range; rescale to [0,1] so the
    // fixed thresholds keep their meaning.
    out.refined = normalize_cam(refine(out.fused.maps, image, config.par), present).maps;
    out.labels = make_segmentation_labels(out.refined, config.alpha_low, config.alpha_high,
                                          config.threshold_mode);
    return out;
}

AggregatedLoss evaluate_affinity_loss(const AffinityStack& stack, const AffinityLabels& labels,
                                      const LayerWeights& weights) {
    stack.validate();
    std::vector<LayerLoss> per_layer;
    per_layer.reserve(stack.layers());
    for (std::size_t l = 0; l < stack.layers(); ++l) {
        const Tensor head_logits = stack.layer_logits(l);
        const std::size_t n = stack.tokens();
        Tensor mean({n, n});
        auto dst = mean.data();
        auto src = head_logits.data();
        const double inv = 1.0 / static_cast<double>(stack.heads());
        for (std::size_t h = 0; h < stack.heads(); ++h) {
            for (std::size_t i = 0; i < n * n; ++i) dst[i] += src[h * n * n + i] * inv;
        }
        per_layer.push_back(affinity_loss(mean, labels));
    }
    return aggregate_loss(per_layer, weights);
}

}  // namespace aream
