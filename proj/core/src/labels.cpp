#include "aream/labels.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aream {

std::size_t AffinityLabels::count(PairLabel label) const {
    return static_cast<std::size_t>(std::count(pairs.begin(), pairs.end(), label));
}

LabelMap make_segmentation_labels(const Tensor& refined, double alpha_low, double alpha_high,
                                  ThresholdMode mode) {
    if (refined.rank() != 3) {
        throw std::invalid_argument("make_segmentation_labels: maps must be CxHxW");
    }
    if (!(0.0 < alpha_low && alpha_low < alpha_high && alpha_high < 1.0)) {
        throw std::invalid_argument("make_segmentation_labels: need 0 < alpha_low < alpha_high < 1");
    }
    const std::size_t classes = refined.extent(0);
    if (classes == 0 || classes > 254) {
        throw std::invalid_argument("make_segmentation_labels: class count must be in 1..254");
    }
    const std::size_t height = refined.extent(1);
    const std::size_t width = refined.extent(2);
    const std::size_t plane = height * width;

    LabelMap out(height, width);
    auto src = refined.data();
    for (std::size_t p = 0; p < plane; ++p) {
        double best = src[p];
        std::size_t best_class = 0;
        for (std::size_t cls = 1; cls < classes; ++cls) {
            const double v = src[cls * plane + p];
            if (v > best) {
                best = v;
                best_class = cls;
            }
        }
        const std::uint8_t foreground = static_cast<std::uint8_t>(best_class + 1);
        std::uint8_t label;
        if (mode == ThresholdMode::kReliable) {
            if (best >= alpha_high) {
                label = foreground;
            } else if (best <= alpha_low) {
                label = 0;
            } else {
                label = kIgnoreLabel;
            }
        } else {
            if (best > alpha_low) {
                label = foreground;
            } else if (best < alpha_high) {
                label = 0;
            } else {
                label = kIgnoreLabel;
            }
        }
        out.values[p] = label;
    }
    return out;
}

AffinityLabels make_affinity_labels(const LabelMap& seg) {
    const std::size_t n = seg.pixels();
    AffinityLabels out;
    out.tokens = n;
    out.pairs.assign(n * n, PairLabel::kIgnored);
    for (std::size_t p = 0; p < n; ++p) {
        const std::uint8_t lp = seg.values[p];
        if (lp == kIgnoreLabel) continue;
        for (std::size_t q = 0; q < n; ++q) {
            const std::uint8_t lq = seg.values[q];
            if (lq == kIgnoreLabel) continue;
            out.pairs[p * n + q] = lp == lq ? PairLabel::kPositive : PairLabel::kNegative;
        }
    }
    return out;
}

}  // namespace aream
