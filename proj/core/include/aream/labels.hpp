#pragma once

#include <cstdint>
#include <vector>

#include "aream/tensor.hpp"

namespace aream {

inline constexpr std::uint8_t kIgnoreLabel = 255;

// H x W segmentation labels: 0 = background, 1..C = foreground classes,
// 255 = ignore.
struct LabelMap {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<std::uint8_t> values;

    LabelMap() = default;
    LabelMap(std::size_t h, std::size_t w, std::uint8_t fill = 0)
        : height(h), width(w), values(h * w, fill) {}

    std::uint8_t at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
    std::uint8_t& at(std::size_t r, std::size_t c) { return values[r * width + c]; }
    std::size_t pixels() const { return values.size(); }
};

enum class PairLabel : std::int8_t {
    kNegative = 0,  // confidently different classes
    kPositive = 1,  // confidently same class
    kIgnored = -1,  // at least one endpoint uncertain
};

// Symmetric N x N ternary pairwise labels derived from a segmentation map.
struct AffinityLabels {
    std::size_t tokens = 0;
    std::vector<PairLabel> pairs;

    PairLabel at(std::size_t p, std::size_t q) const { return pairs[p * tokens + q]; }

    std::size_t count(PairLabel label) const;
};

enum class ThresholdMode {
    // Foreground requires the high threshold, background the low one, and
    // everything between is uncertain (255).
    kReliable,
    // Branch order max > low -> foreground, max < high -> background; with
    // low < high the uncertain branch is unreachable. Kept for audits.
    kLiteral,
};

// Thresholds the per-pixel channel maximum of refined C x H x W maps into a
// label map. Requires 0 < alpha_low < alpha_high < 1.
LabelMap make_segmentation_labels(const Tensor& refined, double alpha_low, double alpha_high,
                                  ThresholdMode mode = ThresholdMode::kReliable);

// Pairwise labels: positive when both pixels are confident and equal,
// negative when confident and different, ignored when either is 255.
AffinityLabels make_affinity_labels(const LabelMap& seg);

}  // namespace aream
