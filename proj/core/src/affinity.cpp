#include "aream/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aream/rng.hpp"

namespace aream {

namespace {

void check_probability_vector(std::span<const double> p, const char* who) {
    for (double v : p) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument(std::string(who) + ": negative or NaN entry");
        }
    }
    std::vector<double> copy(p.begin(), p.end());
    const double total = pairwise_sum(copy);
    if (std::abs(total - 1.0) > 1e-9) {
        throw std::invalid_argument(std::string(who) + ": entries sum to " +
                                    std::to_string(total) + ", not 1");
    }
}

}  // namespace

Tensor AffinityStack::layer_logits(std::size_t layer) const {
    if (layer >= layers()) {
        throw std::invalid_argument("AffinityStack: layer " + std::to_string(layer) +
                                    " out of range");
    }
    const std::size_t block = heads() * tokens() * tokens();
    auto src = logits.data().subspan(layer * block, block);
    return Tensor::from_data({heads(), tokens(), tokens()},
                             std::vector<double>(src.begin(), src.end()));
}

void AffinityStack::validate() const {
    if (logits.rank() != 4) {
        throw std::invalid_argument("AffinityStack: logits must be L x H_d x N x N");
    }
    if (logits.extent(2) != logits.extent(3)) {
        throw std::invalid_argument("AffinityStack: affinity matrices must be square");
    }
    if (!logits.all_finite()) {
        throw std::invalid_argument("AffinityStack: non-finite logit");
    }
}

RowStochasticAffinity::RowStochasticAffinity(Tensor probs) : probs_(std::move(probs)) {
    if (probs_.rank() != 2 || probs_.extent(0) != probs_.extent(1)) {
        throw std::invalid_argument("RowStochasticAffinity: matrix must be square N x N");
    }
    const std::size_t n = probs_.extent(0);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = probs_.data().subspan(i * n, n);
        for (double v : r) {
            if (!(v >= 0.0) || v > 1.0) {
                throw std::invalid_argument("RowStochasticAffinity: entry outside [0,1]");
            }
        }
        const double s = pairwise_sum(r);
        if (std::abs(s - 1.0) > 1e-9) {
            throw std::invalid_argument("RowStochasticAffinity: row " + std::to_string(i) +
                                        " sums to " + std::to_string(s));
        }
    }
}

Tensor build_affinity_logits(const Tensor& q, const Tensor& k) {
    if (q.rank() != 2 || k.rank() != 2 || q.extent(1) != k.extent(1) ||
        q.extent(0) != k.extent(0)) {
        throw std::invalid_argument("build_affinity_logits: q and k must both be N x D_k");
    }
    if (q.extent(1) < 1) {
        throw std::invalid_argument("build_affinity_logits: D_k must be >= 1");
    }
    const std::size_t n = q.extent(0), dk = q.extent(1);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    Tensor out({n, n});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t d = 0; d < dk; ++d) dot += q(i, d) * k(j, d);
            out(i, j) = dot * scale;
        }
    }
    return out;
}

RowStochasticAffinity head_average(const Tensor& head_logits) {
    if (head_logits.rank() != 3 || head_logits.extent(1) != head_logits.extent(2)) {
        throw std::invalid_argument("head_average: expected H_d x N x N logits");
    }
    const std::size_t heads = head_logits.extent(0);
    if (heads < 1) {
        throw std::invalid_argument("head_average: need at least one head");
    }
    const std::size_t n = head_logits.extent(1);

    const Tensor soft = softmax_over_axis(head_logits, 2);
    Tensor mean({n, n});
    auto src = soft.data();
    auto dst = mean.data();
    const double inv = 1.0 / static_cast<double>(heads);
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t base = h * n * n;
        for (std::size_t i = 0; i < n * n; ++i) dst[i] += src[base + i] * inv;
    }
    return RowStochasticAffinity(std::move(mean));
}

RowStochasticAffinity layer_average(std::span<const RowStochasticAffinity> layers) {
    if (layers.empty()) {
        throw std::invalid_argument("layer_average: empty layer list");
    }
    const std::size_t n = layers.front().tokens();
    for (const auto& l : layers) {
        if (l.tokens() != n) {
            throw std::invalid_argument("layer_average: token counts differ across layers");
        }
    }
    Tensor mean({n, n});
    auto dst = mean.data();
    const double inv = 1.0 / static_cast<double>(layers.size());
    for (const auto& l : layers) {
        auto src = l.probs().data();
        for (std::size_t i = 0; i < n * n; ++i) dst[i] += src[i] * inv;
    }
    return RowStochasticAffinity(std::move(mean));
}

double hellinger(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("hellinger: length mismatch");
    }
    check_probability_vector(p, "hellinger");
    check_probability_vector(q, "hellinger");
    std::vector<double> terms(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
        terms[i] = d * d;
    }
    const double dist = std::sqrt(pairwise_sum(terms)) / std::sqrt(2.0);
    return std::min(dist, 1.0);
}

double oversmoothing_score(const RowStochasticAffinity& aff, std::size_t sample_pairs,
                           std::uint64_t seed) {
    const std::size_t n = aff.tokens();
    if (n < 2) {
        throw std::invalid_argument("oversmoothing_score: need at least 2 tokens");
    }
    if (sample_pairs < 1) {
        throw std::invalid_argument("oversmoothing_score: sample_pairs must be >= 1");
    }

    std::vector<double> dists;
    const std::size_t total_pairs = n * (n - 1) / 2;
    if (total_pairs <= sample_pairs) {
        dists.reserve(total_pairs);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                dists.push_back(hellinger(aff.row(i), aff.row(j)));
            }
        }
    } else {
        Rng rng(seed);
        dists.reserve(sample_pairs);
        for (std::size_t s = 0; s < sample_pairs; ++s) {
            const std::size_t i = rng.next_index(n);
            std::size_t j = rng.next_index(n - 1);
            if (j >= i) ++j;
            dists.push_back(hellinger(aff.row(i), aff.row(j)));
        }
    }
    return pairwise_sum(dists) / static_cast<double>(dists.size());
}

}  // namespace aream
