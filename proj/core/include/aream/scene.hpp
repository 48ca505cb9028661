#pragma once

#include <cstdint>
#include <vector>

#include "aream/affinity.hpp"
#include "aream/cam.hpp"
#include "aream/labels.hpp"
#include "aream/tensor.hpp"

namespace aream {

// Parameters of the synthetic scenes used by the demo and the acceptance
// suite. Each scene plants one rectangular object per class on a
// background, builds features whose activations cover only the object
// cores, and synthesizes an affinity stack whose shallow layers attend
// within regions while deeper layers collapse toward a few background
// tokens according to collapse_profile.
struct SceneSpec {
    std::uint64_t seed = 0;
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t classes = 2;
    std::size_t layers = 6;
    std::size_t heads = 4;
    std::vector<double> collapse_profile;  // empty = linear ramp 0 -> 0.95
    double noise_level = 0.3;

    void validate() const;
    // The profile actually used: the explicit one, or the default ramp.
    std::vector<double> resolved_collapse() const;
};

struct Scene {
    Tensor features;    // D x H x W with D = classes + 2
    Tensor classifier;  // D x C
    AffinityStack stack;
    LabelMap ground_truth;
    Tensor image;  // 3 x H x W
    std::vector<bool> present;
    std::vector<std::size_t> collapse_tokens;  // background hub positions
};

Scene generate_scene(const SceneSpec& spec);

}  // namespace aream
