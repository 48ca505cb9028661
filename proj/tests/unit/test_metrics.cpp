#include <stdexcept>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "aream/metrics.hpp"
#include "aream/rng.hpp"
#include "support/oracles.hpp"

using namespace aream;

namespace {

LabelMap random_map(std::size_t h, std::size_t w, Rng& rng, std::size_t classes,
                    bool with_ignore) {
    LabelMap map(h, w);
    for (auto& v : map.values) {
        if (with_ignore && rng.next_double() < 0.1) {
            v = kIgnoreLabel;
        } else {
            v = static_cast<std::uint8_t>(rng.next_index(classes + 1));
        }
    }
    return map;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("perfect prediction scores 1") {
    Rng rng(83);
    const LabelMap gt = random_map(4, 4, rng, 3, true);
    const IoUReport report = miou(gt, gt);
    CHECK(report.miou == 1.0);
}

TEST_CASE("worked 2x2 example") {
    LabelMap gt(2, 2), pred(2, 2);
    gt.values = {1, 1, 0, 0};
    pred.values = {1, 0, 0, 0};
    const IoUReport report = miou(pred, gt);
    CHECK(report.per_class[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(report.per_class[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(report.miou == doctest::Approx(7.0 / 12.0).epsilon(1e-15));
    CHECK(report.confusion_at(1, 1) == 1);
    CHECK(report.confusion_at(1, 0) == 1);
}

TEST_CASE("all-ignored ground truth is an error") {
    LabelMap gt(2, 2, kIgnoreLabel), pred(2, 2, 0);
    CHECK_THROWS_AS(miou(pred, gt), std::invalid_argument);
    CHECK_THROWS_AS(miou(LabelMap(2, 3), LabelMap(3, 2)), std::invalid_argument);
}

TEST_CASE("matches the brute force oracle exactly") {
    Rng rng(89);
    for (int rep = 0; rep < 50; ++rep) {
        const LabelMap gt = random_map(8, 8, rng, 3, true);
        const LabelMap pred = random_map(8, 8, rng, 3, false);
        const IoUReport report = miou(pred, gt, 3);
        CHECK(report.miou == oracle::miou(pred, gt, 3));
    }
}

TEST_CASE("ignored predictions enlarge the union") {
    LabelMap gt(1, 2), pred(1, 2);
    gt.values = {1, 1};
    pred.values = {1, kIgnoreLabel};
    const IoUReport report = miou(pred, gt, 1);
    CHECK(report.per_class[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("invariant under class relabeling") {
    Rng rng(97);
    const LabelMap gt = random_map(6, 6, rng, 2, true);
    const LabelMap pred = random_map(6, 6, rng, 2, false);
    const std::uint8_t perm[3] = {0, 2, 1};  // keep background fixed
    LabelMap gt2 = gt, pred2 = pred;
    for (std::size_t p = 0; p < gt.pixels(); ++p) {
        if (gt2.values[p] != kIgnoreLabel) gt2.values[p] = perm[gt2.values[p]];
        if (pred2.values[p] != kIgnoreLabel) pred2.values[p] = perm[pred2.values[p]];
    }
    CHECK(miou(pred, gt, 2).miou == miou(pred2, gt2, 2).miou);
}

TEST_CASE("confusion accumulates across images") {
    LabelMap gt1(1, 2), pred1(1, 2), gt2(1, 2), pred2(1, 2);
    gt1.values = {1, 0};
    pred1.values = {1, 1};
    gt2.values = {1, 0};
    pred2.values = {1, 0};
    ConfusionAccumulator acc(1);
    acc.add(pred1, gt1);
    acc.add(pred2, gt2);
    const IoUReport report = acc.report();
    // class 1: inter 2, union 3; class 0: inter 1, union 2
    CHECK(report.per_class[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(report.per_class[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("threshold sweep worked examples") {
    // Separable map: foreground plateau 0.9, background 0.1.
    Tensor refined({1, 2, 2});
    refined(0, 0, 0) = 0.9;
    refined(0, 0, 1) = 0.9;
    refined(0, 1, 0) = 0.1;
    refined(0, 1, 1) = 0.1;
    LabelMap gt(2, 2);
    gt.values = {1, 1, 0, 0};

    const auto grid = default_threshold_grid();
    const IoUReport best = threshold_sweep(refined, gt, grid);
    CHECK(best.miou == 1.0);
    CHECK(best.best_threshold.has_value());
    CHECK(*best.best_threshold == doctest::Approx(0.15).epsilon(1e-12));

    const std::vector<double> single{0.5};
    const IoUReport one = threshold_sweep(refined, gt, single);
    CHECK(*one.best_threshold == 0.5);

    // All-zero map: everything is background at every threshold.
    const Tensor zeros({1, 2, 2});
    const IoUReport z = threshold_sweep(zeros, gt, grid);
    CHECK(*z.best_threshold == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(z.per_class[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(z.per_class[1] == 0.0);
}

TEST_CASE("sweep reports the maximum over the grid") {
    Rng rng(101);
    Tensor refined({2, 5, 5});
    for (double& v : refined.data()) v = rng.next_double();
    const LabelMap gt = random_map(5, 5, rng, 2, true);
    const auto grid = default_threshold_grid();
    const IoUReport best = threshold_sweep(refined, gt, grid);
    for (double t : grid) {
        const IoUReport at_t = miou(threshold_labels(refined, t), gt, 2);
        CHECK(best.miou >= at_t.miou);
    }
}

TEST_CASE("sweep validates its grid") {
    const Tensor refined({1, 2, 2});
    LabelMap gt(2, 2);
    gt.values = {1, 0, 0, 0};
    CHECK_THROWS_AS(threshold_sweep(refined, gt, {}), std::invalid_argument);
    const std::vector<double> bad{0.0};
    CHECK_THROWS_AS(threshold_sweep(refined, gt, bad), std::invalid_argument);
}

}  // TEST_SUITE
