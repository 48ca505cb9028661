#pragma once

#include <optional>
#include <span>
#include <vector>

#include "aream/labels.hpp"
#include "aream/tensor.hpp"

namespace aream {

// Intersection-over-union evaluation against ground truth. Class 0 is the
// background; ground-truth pixels labeled 255 are excluded everywhere.
struct IoUReport {
    std::size_t num_classes = 0;          // foreground classes C; rows are 0..C
    std::vector<std::size_t> confusion;   // (C+1) x (C+1), row = gt, col = pred
    std::vector<double> per_class;        // IoU per class id, 0 where not evaluated
    std::vector<bool> evaluated;          // false when the class is absent from both sides
    double miou = 0.0;
    std::optional<double> best_threshold;

    std::size_t confusion_at(std::size_t gt, std::size_t pred) const {
        return confusion[gt * (num_classes + 1) + pred];
    }
};

// Accumulates pred/gt pixel pairs into one confusion matrix; multi-image
// evaluation adds every image before reading the report.
class ConfusionAccumulator {
public:
    explicit ConfusionAccumulator(std::size_t num_fg_classes);

    void add(const LabelMap& pred, const LabelMap& gt);
    IoUReport report() const;

private:
    std::size_t num_classes_;
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> unmatched_gt_;  // gt pixels whose prediction is 255
    std::size_t evaluated_pixels_ = 0;
};

// Single-pair convenience wrapper. With num_fg_classes = 0 the class count
// is taken from the largest non-ignore label in either map.
IoUReport miou(const LabelMap& pred, const LabelMap& gt, std::size_t num_fg_classes = 0);

// Thresholds the refined maps at every grid value (pixels whose foreground
// maximum falls below the threshold become background, the rest take the
// argmax class) and returns the best-scoring report; ties resolve to the
// smaller threshold.
IoUReport threshold_sweep(const Tensor& refined, const LabelMap& gt,
                          std::span<const double> thresholds);

// The default sweep grid {0.05, 0.10, ..., 0.95}.
std::vector<double> default_threshold_grid();

// Labels refined maps at a single background threshold.
LabelMap threshold_labels(const Tensor& refined, double threshold);

}  // namespace aream
