#pragma once

#include <cstdint>
#include <span>

#include "aream/tensor.hpp"

namespace aream {

// Raw scaled dot-product logits for every layer and head, shape
// L x H_d x N x N, where N is the token count (image height * width).
struct AffinityStack {
    Tensor logits;
    std::size_t d_k = 1;

    std::size_t layers() const { return logits.extent(0); }
    std::size_t heads() const { return logits.extent(1); }
    std::size_t tokens() const { return logits.extent(2); }

    // Copy of one layer's head logits, shape H_d x N x N.
    Tensor layer_logits(std::size_t layer) const;

    void validate() const;
};

// N x N matrix whose rows are attention distributions: entries in [0,1],
// each row summing to 1 within 1e-9. Constructed only through operations
// that guarantee it (softmax, convex combinations); the constructor checks.
class RowStochasticAffinity {
public:
    explicit RowStochasticAffinity(Tensor probs);

    const Tensor& probs() const { return probs_; }
    std::size_t tokens() const { return probs_.extent(0); }
    std::span<const double> row(std::size_t i) const {
        return probs_.data().subspan(i * tokens(), tokens());
    }

private:
    Tensor probs_;
};

// q k^T / sqrt(D_k) for q, k of shape N x D_k.
Tensor build_affinity_logits(const Tensor& q, const Tensor& k);

// Row-softmax each head of an H_d x N x N logit block, then average the
// heads arithmetically.
RowStochasticAffinity head_average(const Tensor& head_logits);

// Elementwise mean of already row-stochastic per-layer matrices.
RowStochasticAffinity layer_average(std::span<const RowStochasticAffinity> layers);

// Hellinger distance between two probability vectors, in [0,1].
double hellinger(std::span<const double> p, std::span<const double> q);

// Mean Hellinger distance between distinct rows of one affinity matrix.
// Low scores mean the rows have collapsed toward a shared pattern, which
// is the over-smoothing signature this library diagnoses. All N(N-1)/2
// pairs are visited when they fit inside `sample_pairs`; otherwise that
// many pairs are drawn from a seeded generator.
double oversmoothing_score(const RowStochasticAffinity& aff,
                           std::size_t sample_pairs = 2048,
                           std::uint64_t seed = 0);

}  // namespace aream
