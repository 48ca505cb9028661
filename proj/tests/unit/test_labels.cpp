#include <stdexcept>
#include <algorithm>
#include <vector>

#include <doctest.h>

#include "aream/labels.hpp"
#include "aream/rng.hpp"
#include "support/oracles.hpp"

using namespace aream;

namespace {

LabelMap random_map(std::size_t h, std::size_t w, Rng& rng, std::size_t classes = 3) {
    LabelMap map(h, w);
    for (auto& v : map.values) {
        const double u = rng.next_double();
        v = u < 0.2 ? kIgnoreLabel : static_cast<std::uint8_t>(rng.next_index(classes + 1));
    }
    return map;
}

}  // namespace

TEST_SUITE("labels") {

TEST_CASE("threshold branches, reliable and literal") {
    // One channel; pixel max values 0.7, 0.2, 0.45.
    const Tensor refined = Tensor::from_data({1, 1, 3}, {0.7, 0.2, 0.45});

    const LabelMap reliable = make_segmentation_labels(refined, 0.35, 0.55);
    CHECK(reliable.at(0, 0) == 1);    // confident foreground
    CHECK(reliable.at(0, 1) == 0);    // confident background
    CHECK(reliable.at(0, 2) == 255);  // uncertain band

    const LabelMap literal =
        make_segmentation_labels(refined, 0.35, 0.55, ThresholdMode::kLiteral);
    CHECK(literal.at(0, 0) == 1);
    CHECK(literal.at(0, 1) == 0);
    CHECK(literal.at(0, 2) == 1);  // the printed branch order never reaches 255
}

TEST_CASE("threshold ordering is enforced") {
    const Tensor refined({1, 1, 1});
    CHECK_THROWS_AS(make_segmentation_labels(refined, 0.55, 0.35), std::invalid_argument);
    CHECK_THROWS_AS(make_segmentation_labels(refined, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(make_segmentation_labels(refined, 0.5, 1.0), std::invalid_argument);
}

TEST_CASE("foreground takes the argmax class") {
    Tensor refined({3, 1, 1});
    refined(0, 0, 0) = 0.6;
    refined(1, 0, 0) = 0.9;
    refined(2, 0, 0) = 0.1;
    const LabelMap map = make_segmentation_labels(refined, 0.35, 0.55);
    CHECK(map.at(0, 0) == 2);  // class index 1 -> label 2
}

TEST_CASE("affinity labels worked example") {
    LabelMap seg(2, 2);
    seg.values = {1, 1, 0, 255};
    const AffinityLabels labels = make_affinity_labels(seg);
    CHECK(labels.at(0, 1) == PairLabel::kPositive);
    CHECK(labels.at(0, 2) == PairLabel::kNegative);
    CHECK(labels.at(0, 3) == PairLabel::kIgnored);
    CHECK(labels.at(2, 3) == PairLabel::kIgnored);
    CHECK(labels.at(0, 0) == PairLabel::kPositive);  // diagonal of a labeled pixel
}

TEST_CASE("degenerate maps") {
    LabelMap ones(2, 2, 1);
    const AffinityLabels all_same = make_affinity_labels(ones);
    CHECK(all_same.count(PairLabel::kPositive) == 16);
    CHECK(all_same.count(PairLabel::kNegative) == 0);

    LabelMap ignored(2, 2, kIgnoreLabel);
    const AffinityLabels none = make_affinity_labels(ignored);
    CHECK(none.count(PairLabel::kIgnored) == 16);
}

TEST_CASE("affinity labels match the double loop oracle and are symmetric") {
    Rng rng(51);
    for (int rep = 0; rep < 20; ++rep) {
        const LabelMap seg = random_map(5, 5, rng);
        const AffinityLabels got = make_affinity_labels(seg);
        const AffinityLabels want = oracle::affinity_labels(seg);
        REQUIRE(got.pairs.size() == want.pairs.size());
        for (std::size_t i = 0; i < got.pairs.size(); ++i) CHECK(got.pairs[i] == want.pairs[i]);
        for (std::size_t p = 0; p < seg.pixels(); ++p) {
            for (std::size_t q = 0; q < seg.pixels(); ++q) {
                CHECK(got.at(p, q) == got.at(q, p));
            }
        }
    }
}

TEST_CASE("reliable mode partitions the image and is monotone in alpha_high") {
    Rng rng(53);
    Tensor refined({2, 6, 6});
    for (double& v : refined.data()) v = rng.next_double();

    const LabelMap lo = make_segmentation_labels(refined, 0.3, 0.5);
    const LabelMap hi = make_segmentation_labels(refined, 0.3, 0.8);
    for (std::size_t p = 0; p < lo.pixels(); ++p) {
        // every pixel gets exactly one of {fg, bg, 255}
        const std::uint8_t a = lo.values[p];
        CHECK((a == 0 || a == 255 || (a >= 1 && a <= 2)));
        // raising alpha_high never turns an uncertain pixel into foreground
        if (a == 255) {
            CHECK(hi.values[p] != 1);
            CHECK(hi.values[p] != 2);
        }
    }
}

TEST_CASE("channel permutation permutes foreground labels only") {
    Rng rng(59);
    Tensor refined({3, 5, 5});
    for (double& v : refined.data()) v = rng.next_double();

    const std::size_t perm[3] = {1, 2, 0};  // new channel ch holds old channel perm[ch]
    Tensor shuffled(refined.shape());
    for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t p = 0; p < 25; ++p) {
            shuffled.data()[ch * 25 + p] = refined.data()[perm[ch] * 25 + p];
        }
    }
    const LabelMap base = make_segmentation_labels(refined, 0.35, 0.55);
    const LabelMap moved = make_segmentation_labels(shuffled, 0.35, 0.55);
    // old class c (label c+1) now lives at the channel index where perm points to it
    std::size_t inverse[3];
    for (std::size_t ch = 0; ch < 3; ++ch) inverse[perm[ch]] = ch;
    for (std::size_t p = 0; p < 25; ++p) {
        const std::uint8_t b = base.values[p];
        if (b == 0 || b == kIgnoreLabel) {
            CHECK(moved.values[p] == b);
        } else {
            CHECK(moved.values[p] == static_cast<std::uint8_t>(inverse[b - 1] + 1));
        }
    }
}

}  // TEST_SUITE
