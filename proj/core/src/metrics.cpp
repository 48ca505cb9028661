#include "aream/metrics.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace aream {

namespace {

std::size_t max_label(const LabelMap& m) {
    std::size_t mx = 0;
    for (std::uint8_t v : m.values) {
        if (v != kIgnoreLabel) mx = std::max<std::size_t>(mx, v);
    }
    return mx;
}

}  // namespace

ConfusionAccumulator::ConfusionAccumulator(std::size_t num_fg_classes)
    : num_classes_(num_fg_classes),
      counts_((num_fg_classes + 1) * (num_fg_classes + 1), 0),
      unmatched_gt_(num_fg_classes + 1, 0) {}

void ConfusionAccumulator::add(const LabelMap& pred, const LabelMap& gt) {
    if (pred.height != gt.height || pred.width != gt.width) {
        throw std::invalid_argument("miou: prediction and ground truth shapes differ");
    }
    const std::size_t side = num_classes_ + 1;
    for (std::size_t p = 0; p < gt.pixels(); ++p) {
        const std::uint8_t g = gt.values[p];
        if (g == kIgnoreLabel) continue;
        const std::uint8_t pr = pred.values[p];
        if (g >= side) {
            throw std::invalid_argument("miou: ground-truth label " + std::to_string(g) +
                                        " exceeds class count");
        }
        ++evaluated_pixels_;
        if (pr == kIgnoreLabel) {
            // Uncertain prediction: enlarges the gt class's union without
            // matching any predicted class.
            unmatched_gt_[g]++;
            continue;
        }
        if (pr >= side) {
            throw std::invalid_argument("miou: predicted label " + std::to_string(pr) +
                                        " exceeds class count");
        }
        counts_[g * side + pr]++;
    }
}

IoUReport ConfusionAccumulator::report() const {
    if (evaluated_pixels_ == 0) {
        throw std::invalid_argument("miou: every ground-truth pixel is ignored");
    }
    const std::size_t side = num_classes_ + 1;
    IoUReport out;
    out.num_classes = num_classes_;
    out.confusion = counts_;
    out.per_class.assign(side, 0.0);
    out.evaluated.assign(side, false);

    double sum = 0.0;
    std::size_t evaluated = 0;
    for (std::size_t c = 0; c < side; ++c) {
        std::size_t inter = counts_[c * side + c];
        std::size_t gt_total = unmatched_gt_[c], pred_total = 0;
        for (std::size_t k = 0; k < side; ++k) {
            gt_total += counts_[c * side + k];
            pred_total += counts_[k * side + c];
        }
        const std::size_t uni = gt_total + pred_total - inter;
        if (uni == 0) continue;  // absent from both sides: excluded from the mean
        out.evaluated[c] = true;
        out.per_class[c] = static_cast<double>(inter) / static_cast<double>(uni);
        sum += out.per_class[c];
        ++evaluated;
    }
    out.miou = sum / static_cast<double>(evaluated);
    return out;
}

IoUReport miou(const LabelMap& pred, const LabelMap& gt, std::size_t num_fg_classes) {
    if (pred.height != gt.height || pred.width != gt.width) {
        throw std::invalid_argument("miou: prediction and ground truth shapes differ");
    }
    if (num_fg_classes == 0) {
        num_fg_classes = std::max(max_label(pred), max_label(gt));
    }
    ConfusionAccumulator acc(num_fg_classes);
    acc.add(pred, gt);
    return acc.report();
}

LabelMap threshold_labels(const Tensor& refined, double threshold) {
    if (refined.rank() != 3) {
        throw std::invalid_argument("threshold_labels: maps must be CxHxW");
    }
    const std::size_t classes = refined.extent(0);
    const std::size_t plane = refined.extent(1) * refined.extent(2);
    LabelMap out(refined.extent(1), refined.extent(2));
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
        out.values[p] = best < threshold ? 0 : static_cast<std::uint8_t>(best_class + 1);
    }
    return out;
}

IoUReport threshold_sweep(const Tensor& refined, const LabelMap& gt,
                          std::span<const double> thresholds) {
    if (thresholds.empty()) {
        throw std::invalid_argument("threshold_sweep: threshold grid is empty");
    }
    for (double t : thresholds) {
        if (!(0.0 < t && t < 1.0)) {
            throw std::invalid_argument("threshold_sweep: thresholds must lie in (0,1)");
        }
    }
    const std::size_t num_classes = refined.extent(0);

    std::optional<IoUReport> best;
    for (double t : thresholds) {
        IoUReport r = miou(threshold_labels(refined, t), gt, num_classes);
        r.best_threshold = t;
        if (!best || r.miou > best->miou) best = std::move(r);  // ties keep the smaller t
    }
    return *best;
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
    return grid;
}

}  // namespace aream
