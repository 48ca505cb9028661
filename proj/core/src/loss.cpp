#include "aream/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace aream {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LayerLoss affinity_loss(const Tensor& logits, const AffinityLabels& labels) {
    if (logits.rank() != 2 || logits.extent(0) != logits.extent(1)) {
        throw std::invalid_argument("affinity_loss: logits must be square N x N");
    }
    const std::size_t n = logits.extent(0);
    if (labels.tokens != n) {
        throw std::invalid_argument("affinity_loss: " + std::to_string(labels.tokens) +
                                    " label tokens for " + std::to_string(n) + " logit rows");
    }

    LayerLoss out;
    out.grad = Tensor(logits.shape());
    auto a = logits.data();
    auto g = out.grad.data();

    std::vector<double> pos_terms, neg_terms;
    for (std::size_t i = 0; i < n * n; ++i) {
        switch (labels.pairs[i]) {
            case PairLabel::kPositive:
                pos_terms.push_back(1.0 - sigmoid(a[i]));
                break;
            case PairLabel::kNegative:
                neg_terms.push_back(sigmoid(a[i]));
                break;
            case PairLabel::kIgnored:
                break;
        }
    }
    out.n_pos = pos_terms.size();
    out.n_neg = neg_terms.size();

    double loss = 0.0;
    if (out.n_pos > 0) loss += pairwise_sum(pos_terms) / static_cast<double>(out.n_pos);
    if (out.n_neg > 0) loss += pairwise_sum(neg_terms) / static_cast<double>(out.n_neg);
    out.loss = loss;

    for (std::size_t i = 0; i < n * n; ++i) {
        const double s = sigmoid(a[i]);
        const double gate = s * (1.0 - s);
        switch (labels.pairs[i]) {
            case PairLabel::kPositive:
                g[i] = -gate / static_cast<double>(out.n_pos);
                break;
            case PairLabel::kNegative:
                g[i] = gate / static_cast<double>(out.n_neg);
                break;
            case PairLabel::kIgnored:
                g[i] = 0.0;
                break;
        }
    }
    return out;
}

AggregatedLoss aggregate_loss(std::span<const LayerLoss> per_layer, const LayerWeights& weights) {
    if (per_layer.size() != weights.supervise.size()) {
        throw std::invalid_argument("aggregate_loss: " + std::to_string(per_layer.size()) +
                                    " layer losses for " +
                                    std::to_string(weights.supervise.size()) + " weights");
    }
    AggregatedLoss out;
    std::vector<double> weighted;
    weighted.reserve(per_layer.size());
    for (std::size_t l = 0; l < per_layer.size(); ++l) {
        const double w = weights.supervise[l];
        out.report.per_layer.push_back(per_layer[l].loss);
        out.report.n_pos.push_back(per_layer[l].n_pos);
        out.report.n_neg.push_back(per_layer[l].n_neg);
        weighted.push_back(w * per_layer[l].loss);

        Tensor grad = per_layer[l].grad;
        for (double& v : grad.data()) v *= w;
        out.layer_grads.push_back(std::move(grad));
    }
    out.report.total = pairwise_sum(weighted);
    return out;
}

OptimizeResult optimize_logits(const AffinityStack& stack, const AffinityLabels& labels,
                               const LayerWeights& weights, double step_size,
                               std::size_t steps) {
    if (step_size <= 0.0) {
        throw std::invalid_argument("optimize_logits: step_size must be positive");
    }
    stack.validate();
    const std::size_t layers = stack.layers();
    const std::size_t heads = stack.heads();
    const std::size_t n = stack.tokens();
    if (weights.supervise.size() != layers) {
        throw std::invalid_argument("optimize_logits: weight count != layer count");
    }
    if (labels.tokens != n) {
        throw std::invalid_argument("optimize_logits: label tokens != stack tokens");
    }

    OptimizeResult result{stack, {}};
    result.loss_history.reserve(steps + 1);

    const std::size_t plane = n * n;
    const std::size_t layer_block = heads * plane;
    const double inv_heads = 1.0 / static_cast<double>(heads);
    auto data = result.stack.logits.data();

    // The loss only sees the head mean and every head receives the same
    // update, so the descent runs on per-layer mean buffers; accumulated
    // deltas are written back to the heads once at the end.
    std::vector<std::size_t> active;
    std::vector<std::vector<double>> mean(layers), delta_acc(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        if (weights.supervise[l] == 0.0) continue;  // never moves, weight 0 in the total
        active.push_back(l);
        mean[l].assign(plane, 0.0);
        delta_acc[l].assign(plane, 0.0);
        auto block = data.subspan(l * layer_block, layer_block);
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t i = 0; i < plane; ++i) mean[l][i] += block[h * plane + i] * inv_heads;
        }
    }

    std::vector<double> pos_terms, neg_terms;
    pos_terms.reserve(plane);
    neg_terms.reserve(plane);
    std::vector<double> layer_losses(layers, 0.0);

    for (std::size_t step = 0; step <= steps; ++step) {
        const bool update = step < steps;
        for (std::size_t l : active) {
            const double supervise = weights.supervise[l];
            pos_terms.clear();
            neg_terms.clear();
            for (std::size_t i = 0; i < plane; ++i) {
                const PairLabel label = labels.pairs[i];
                if (label == PairLabel::kIgnored) continue;
                const double s = sigmoid(mean[l][i]);
                double delta = 0.0;
                if (label == PairLabel::kPositive) {
                    pos_terms.push_back(1.0 - s);
                    delta = step_size * supervise * s * (1.0 - s);
                } else {
                    neg_terms.push_back(s);
                    delta = -step_size * supervise * s * (1.0 - s);
                }
                if (update && delta != 0.0) {
                    mean[l][i] += delta;
                    delta_acc[l][i] += delta;
                }
            }
            double loss = 0.0;
            if (!pos_terms.empty()) loss += pairwise_sum(pos_terms) / static_cast<double>(pos_terms.size());
            if (!neg_terms.empty()) loss += pairwise_sum(neg_terms) / static_cast<double>(neg_terms.size());
            layer_losses[l] = supervise * loss;
        }
        result.loss_history.push_back(pairwise_sum(layer_losses));
    }

    for (std::size_t l : active) {
        auto block = data.subspan(l * layer_block, layer_block);
        for (std::size_t h = 0; h < heads; ++h) {
            for (std::size_t i = 0; i < plane; ++i) block[h * plane + i] += delta_acc[l][i];
        }
    }
    return result;
}

}  // namespace aream
