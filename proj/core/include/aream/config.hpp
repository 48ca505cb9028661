#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "aream/labels.hpp"
#include "aream/par.hpp"

namespace aream {

// Every tunable of the pipeline in one flat struct. The on-disk form is
// UTF-8 `key=value`, one pair per line, `#` starting a comment; the same
// keys exist as long-form command line flags, and a flag always beats the
// file.
struct Config {
    ParConfig par;

    double alpha_low = 0.35;
    double alpha_high = 0.55;
    ThresholdMode threshold_mode = ThresholdMode::kReliable;

    std::vector<double> sweep_thresholds;  // empty = default 0.05..0.95 grid

    double step_size = 0.5;
    std::size_t steps = 200;
    std::vector<std::size_t> supervise_layers;  // empty = supervise every layer
    bool supervise_none = false;                // `supervise_layers=none`

    std::size_t sample_pairs = 2048;
    std::uint64_t seed = 0;
    bool uniform_weights = false;
    bool sweep = false;

    // Scene synthesis.
    std::size_t height = 16;
    std::size_t width = 16;
    std::size_t classes = 2;
    std::size_t layers = 6;
    std::size_t heads = 4;
    double noise_level = 0.3;
    std::vector<double> collapse_profile;  // empty = linear ramp 0 -> 0.95

    void apply(const std::string& key, const std::string& value);
    std::string serialize() const;

    static Config from_file(const std::filesystem::path& path);
    static Config from_text(const std::string& text, const std::string& origin = "<text>");
};

ThresholdMode parse_threshold_mode(const std::string& name);
std::string threshold_mode_name(ThresholdMode mode);

}  // namespace aream
