#include "aream/reactivation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aream {

namespace {

void check_geometry(const CamStack& cams, const RowStochasticAffinity& aff) {
    const std::size_t n = cams.height() * cams.width();
    if (aff.tokens() != n) {
        throw std::invalid_argument("affinity tokens " + std::to_string(aff.tokens()) +
                                    " != CAM positions " + std::to_string(n));
    }
}

// y_i = sum_j aff[i,j] * m_j for the flattened map m; row i of the affinity
// is the attention distribution of position i.
std::vector<double> propagate(const RowStochasticAffinity& aff,
                              std::span<const double> flat_map) {
    const std::size_t n = aff.tokens();
    std::vector<double> out(n, 0.0);
    auto a = aff.probs().data();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        const std::size_t base = i * n;
        for (std::size_t j = 0; j < n; ++j) acc += a[base + j] * flat_map[j];
        out[i] = acc;
    }
    return out;
}

CamStack propagate_and_renormalize(const CamStack& cams, const RowStochasticAffinity& aff) {
    check_geometry(cams, aff);
    const std::size_t n = aff.tokens();
    const std::size_t c = cams.classes();

    CamStack out{Tensor(cams.maps.shape()), cams.present};
    auto src = cams.maps.data();
    auto dst = out.maps.data();
    for (std::size_t cls = 0; cls < c; ++cls) {
        if (!cams.present[cls]) continue;
        std::vector<double> propagated = propagate(aff, src.subspan(cls * n, n));
        Tensor channel = Tensor::from_data({n}, std::move(propagated));
        Tensor norm = minmax_normalize(channel);
        std::copy(norm.data().begin(), norm.data().end(), dst.begin() + cls * n);
    }
    return out;
}

}  // namespace

LayerWeights LayerWeights::uniform(std::size_t layers) {
    LayerWeights w;
    w.fuse.assign(layers, 1.0 / static_cast<double>(layers));
    w.supervise.assign(layers, 1.0);
    w.raw.assign(layers, 0.0);
    return w;
}

LayerWeights LayerWeights::from_raw(std::vector<double> raw) {
    if (raw.empty()) {
        throw std::invalid_argument("LayerWeights::from_raw: no layers");
    }
    LayerWeights w;
    w.raw = std::move(raw);
    const double total = pairwise_sum(w.raw);
    w.fuse.resize(w.raw.size());
    if (total > 0.0) {
        for (std::size_t l = 0; l < w.raw.size(); ++l) w.fuse[l] = w.raw[l] / total;
    } else {
        // No layer carries evidence; nothing to prefer.
        w.fuse.assign(w.raw.size(), 1.0 / static_cast<double>(w.raw.size()));
    }
    w.supervise.resize(w.raw.size());
    for (std::size_t l = 0; l < w.raw.size(); ++l) w.supervise[l] = 1.0 - w.raw[l];
    return w;
}

Tensor enhanced_distribution(const CamStack& cams, const RowStochasticAffinity& aff) {
    check_geometry(cams, aff);
    const std::size_t n = aff.tokens();

    // Propagation is linear, so summing channels first is equivalent to
    // propagating each present channel and summing afterwards.
    std::vector<double> class_sum(n, 0.0);
    auto src = cams.maps.data();
    for (std::size_t cls = 0; cls < cams.classes(); ++cls) {
        if (!cams.present[cls]) continue;
        for (std::size_t p = 0; p < n; ++p) class_sum[p] += src[cls * n + p];
    }

    Tensor flat = Tensor::from_data({n}, propagate(aff, class_sum));
    Tensor soft = softmax_over_axis(flat, 0);
    return Tensor::from_data({cams.height(), cams.width()},
                             std::vector<double>(soft.data().begin(), soft.data().end()));
}

double layer_weight(const Tensor& p_hat) {
    return 1.0 - normalized_entropy(p_hat.data());
}

CamStack propagate_single(const CamStack& cams, const RowStochasticAffinity& aff) {
    return propagate_and_renormalize(cams, aff);
}

CamStack fuse_layers(const CamStack& cams, std::span<const RowStochasticAffinity> layers,
                     const LayerWeights& weights) {
    if (layers.empty()) {
        throw std::invalid_argument("fuse_layers: empty layer list");
    }
    if (weights.fuse.size() != layers.size()) {
        throw std::invalid_argument("fuse_layers: " + std::to_string(weights.fuse.size()) +
                                    " weights for " + std::to_string(layers.size()) +
                                    " layers");
    }
    const std::size_t n = layers.front().tokens();
    Tensor fused({n, n});
    auto dst = fused.data();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].tokens() != n) {
            throw std::invalid_argument("fuse_layers: token counts differ across layers");
        }
        const double w = weights.fuse[l];
        auto src = layers[l].probs().data();
        for (std::size_t i = 0; i < n * n; ++i) dst[i] += w * src[i];
    }
    return propagate_and_renormalize(cams, RowStochasticAffinity(std::move(fused)));
}

LayerWeights compute_layer_weights(const CamStack& cams,
                                   std::span<const RowStochasticAffinity> layers) {
    if (layers.empty()) {
        throw std::invalid_argument("compute_layer_weights: empty layer list");
    }
    std::vector<double> raw;
    raw.reserve(layers.size());
    for (const auto& layer : layers) {
        raw.push_back(layer_weight(enhanced_distribution(cams, layer)));
    }
    return LayerWeights::from_raw(std::move(raw));
}

}  // namespace aream
