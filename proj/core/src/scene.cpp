#include "aream/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "aream/rng.hpp"

namespace aream {

namespace {

// Scene texture constants. These shape the difficulty of the constructed
// family, not the library's behavior; SceneSpec controls geometry, depth
// and noise.
constexpr double kSameRegionLogit = 4.0;    // within-region attention strength
constexpr double kSelfLogit = 2.0;          // extra diagonal attention
constexpr double kCollapseLogit = 5.0;      // shared mass on the hub tokens
constexpr double kCollapseTiltLogit = 0.8;  // per-tile preference among hubs
constexpr std::size_t kCollapseTokens = 4;
constexpr std::size_t kTileSize = 4;        // tilt coherence block, in pixels
constexpr double kLogitNoiseScale = 0.3;
constexpr double kFeatureNoiseScale = 0.15;
constexpr double kImageNoiseScale = 0.1;

struct Rect {
    std::size_t r0, c0, r1, c1;  // half-open
};

const double kPalette[][3] = {
    {0.85, 0.25, 0.20}, {0.20, 0.65, 0.85}, {0.30, 0.80, 0.30},
    {0.90, 0.75, 0.20}, {0.70, 0.30, 0.80}, {0.95, 0.55, 0.30},
};
constexpr std::size_t kPaletteSize = sizeof(kPalette) / sizeof(kPalette[0]);

}  // namespace

void SceneSpec::validate() const {
    if (height < 8 || width < 8) {
        throw std::invalid_argument("SceneSpec: height and width must be >= 8");
    }
    if (classes < 1 || layers < 1 || heads < 1) {
        throw std::invalid_argument("SceneSpec: classes, layers and heads must be >= 1");
    }
    if (width / classes < 5) {
        throw std::invalid_argument("SceneSpec: width too small for " +
                                    std::to_string(classes) + " object bands");
    }
    if (!collapse_profile.empty()) {
        if (collapse_profile.size() != layers) {
            throw std::invalid_argument("SceneSpec: collapse_profile length != layers");
        }
        for (std::size_t l = 0; l < collapse_profile.size(); ++l) {
            const double g = collapse_profile[l];
            if (!(g >= 0.0 && g <= 1.0)) {
                throw std::invalid_argument("SceneSpec: collapse values must lie in [0,1]");
            }
            if (l > 0 && g < collapse_profile[l - 1]) {
                throw std::invalid_argument("SceneSpec: collapse_profile must be non-decreasing");
            }
        }
    }
    if (noise_level < 0.0) {
        throw std::invalid_argument("SceneSpec: noise_level must be >= 0");
    }
}

std::vector<double> SceneSpec::resolved_collapse() const {
    if (!collapse_profile.empty()) return collapse_profile;
    std::vector<double> ramp(layers, 0.0);
    if (layers == 1) return ramp;
    for (std::size_t l = 0; l < layers; ++l) {
        ramp[l] = 0.95 * static_cast<double>(l) / static_cast<double>(layers - 1);
    }
    return ramp;
}

Scene generate_scene(const SceneSpec& spec) {
    spec.validate();
    const std::size_t h = spec.height, w = spec.width;
    const std::size_t n = h * w;
    const std::size_t c = spec.classes;
    const std::size_t d = c + 2;

    Rng root(spec.seed);
    Rng place_rng = root.fork(1);
    Rng feature_rng = root.fork(2);
    Rng image_rng = root.fork(3);
    Rng affinity_rng = root.fork(4);
    Rng hub_rng = root.fork(5);

    Scene scene;

    // Ground truth: one rectangle per class inside its own vertical band,
    // with at least one background pixel of margin on every side.
    scene.ground_truth = LabelMap(h, w, 0);
    std::vector<Rect> objects;
    const std::size_t band = w / c;
    for (std::size_t cls = 0; cls < c; ++cls) {
        const std::size_t min_h = std::max<std::size_t>(3, h / 3);
        const std::size_t max_h = std::max(min_h, 2 * h / 3);
        const std::size_t obj_h = min_h + place_rng.next_index(max_h - min_h + 1);
        const std::size_t max_w = band - 2;
        const std::size_t obj_w = 3 + place_rng.next_index(max_w - 3 + 1);
        const std::size_t r0 = 1 + place_rng.next_index(h - obj_h - 1);
        const std::size_t c0 = cls * band + 1 + place_rng.next_index(band - obj_w - 1);
        const Rect rect{r0, c0, r0 + obj_h, c0 + obj_w};
        objects.push_back(rect);
        for (std::size_t r = rect.r0; r < rect.r1; ++r) {
            for (std::size_t cc = rect.c0; cc < rect.c1; ++cc) {
                scene.ground_truth.at(r, cc) = static_cast<std::uint8_t>(cls + 1);
            }
        }
    }

    // Hub tokens: background positions at Chebyshev distance >= 2 from
    // every object. Deep layers collapse their rows toward these.
    std::vector<std::size_t> candidates;
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t cc = 0; cc < w; ++cc) {
            bool clear = scene.ground_truth.at(r, cc) == 0;
            for (const Rect& rect : objects) {
                if (!clear) break;
                const bool near_rows = r + 2 > rect.r0 && r < rect.r1 + 2;
                const bool near_cols = cc + 2 > rect.c0 && cc < rect.c1 + 2;
                if (near_rows && near_cols) clear = false;
            }
            if (clear) candidates.push_back(r * w + cc);
        }
    }
    const std::size_t hub_count = std::min(kCollapseTokens, candidates.size());
    for (std::size_t k = 0; k < hub_count; ++k) {
        const std::size_t pick = hub_rng.next_index(candidates.size());
        scene.collapse_tokens.push_back(candidates[pick]);
        candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    std::sort(scene.collapse_tokens.begin(), scene.collapse_tokens.end());

    // Features: channel cls activates only the object core, so the raw
    // activation misses the borders that the affinity propagation is
    // supposed to recover. Hub tokens carry bright distractor activations
    // in alternating class channels. The last two channels are pure noise
    // and the classifier ignores them.
    scene.features = Tensor({d, h, w});
    const double fnoise = kFeatureNoiseScale * spec.noise_level;
    for (std::size_t ch = 0; ch < d; ++ch) {
        for (std::size_t p = 0; p < n; ++p) {
            scene.features[ch * n + p] = ch < c ? fnoise * feature_rng.normal()
                                                : 0.5 * feature_rng.normal();
        }
    }
    for (std::size_t cls = 0; cls < c; ++cls) {
        const Rect& rect = objects[cls];
        const std::size_t obj_h = rect.r1 - rect.r0;
        const std::size_t obj_w = rect.c1 - rect.c0;
        // The discriminative core is the rectangle eroded by 1-2 pixels per
        // side, so activations cover only part of the object.
        const std::size_t er = std::max<std::size_t>(1, std::min(1 + feature_rng.next_index(2), obj_h / 4));
        const std::size_t ec = std::max<std::size_t>(1, std::min(1 + feature_rng.next_index(2), obj_w / 4));
        for (std::size_t r = rect.r0 + er; r + er < rect.r1; ++r) {
            for (std::size_t cc = rect.c0 + ec; cc + ec < rect.c1; ++cc) {
                scene.features(cls, r, cc) += 1.0;
            }
        }
    }
    // Every hub carries a distractor activation of (almost) the same
    // strength, but in alternating class channels.
    const double hub_amplitude = 0.8 + 0.8 * feature_rng.next_double();
    for (std::size_t k = 0; k < scene.collapse_tokens.size(); ++k) {
        const std::size_t channel = k % c;
        const double amplitude = hub_amplitude + 0.02 * feature_rng.normal();
        scene.features[channel * n + scene.collapse_tokens[k]] += amplitude;
    }

    scene.classifier = Tensor({d, c});
    for (std::size_t cls = 0; cls < c; ++cls) scene.classifier(cls, cls) = 1.0;
    scene.present.assign(c, true);

    // Image: flat colored regions aligned with the ground truth.
    scene.image = Tensor({3, h, w});
    const double inoise = kImageNoiseScale * spec.noise_level;
    const double background[3] = {0.45, 0.45, 0.40};
    for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t cc = 0; cc < w; ++cc) {
            const std::uint8_t label = scene.ground_truth.at(r, cc);
            const double* color =
                label == 0 ? background : kPalette[(label - 1) % kPaletteSize];
            for (std::size_t ch = 0; ch < 3; ++ch) {
                scene.image(ch, r, cc) = color[ch] + inoise * image_rng.normal();
            }
        }
    }

    // Affinity logits. Structure: strong within-region attention plus a
    // diagonal boost. Collapse: shared mass on every hub plus a tilt toward
    // one hub per 4x4 tile, so collapsed rows agree globally but differ in
    // a spatially coherent, region-independent way.
    const std::vector<double> collapse = spec.resolved_collapse();
    scene.stack.d_k = 16;
    scene.stack.logits = Tensor({spec.layers, spec.heads, n, n});
    const double lnoise = kLogitNoiseScale * spec.noise_level;
    const std::size_t tiles_per_row = (w + kTileSize - 1) / kTileSize;

    std::vector<std::uint8_t> region(n);
    for (std::size_t p = 0; p < n; ++p) region[p] = scene.ground_truth.values[p];
    // Which hub a row tilts toward: per 4x4 tile, with the partition
    // coarsening over depth (4 groups, then 2, then a single shared hub in
    // the last layer) so that deep rows grow strictly more alike.
    std::vector<std::size_t> tile_group(n, 0);
    for (std::size_t p = 0; p < n; ++p) {
        const std::size_t tile = (p / w / kTileSize) * tiles_per_row + (p % w) / kTileSize;
        tile_group[p] = tile;
    }
    auto tilt_target = [&](std::size_t layer, std::size_t p) -> std::size_t {
        const std::size_t hubs = scene.collapse_tokens.size();
        std::size_t groups = hubs;
        if (spec.layers >= 2 && layer == spec.layers - 1) {
            groups = 1;
        } else if (spec.layers >= 3 && layer == spec.layers - 2) {
            groups = std::min<std::size_t>(2, hubs);
        }
        return scene.collapse_tokens[tile_group[p] % groups];
    };

    auto logits = scene.stack.logits.data();
    for (std::size_t l = 0; l < spec.layers; ++l) {
        const double gamma = collapse[l];
        const double keep = 1.0 - gamma;
        for (std::size_t head = 0; head < spec.heads; ++head) {
            const std::size_t base = (l * spec.heads + head) * n * n;
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t row = base + i * n;
                for (std::size_t j = 0; j < n; ++j) {
                    double structure = region[i] == region[j] ? kSameRegionLogit : 0.0;
                    if (i == j) structure += kSelfLogit;
                    // Noise fades with the collapse so rows genuinely
                    // converge in deep layers.
                    logits[row + j] = keep * (structure + lnoise * affinity_rng.normal());
                }
                for (std::size_t hub : scene.collapse_tokens) {
                    logits[row + hub] += gamma * kCollapseLogit;
                }
                if (!scene.collapse_tokens.empty()) {
                    logits[row + tilt_target(l, i)] += gamma * kCollapseTiltLogit;
                }
            }
        }
    }
    scene.stack.validate();
    return scene;
}

}  // namespace aream
