#include "aream/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aream {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad number for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad integer for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + value + "'");
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& value, Parse parse) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse(item));
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& v, Fmt f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += f(v[i]);
    }
    return out;
}

}  // namespace

ThresholdMode parse_threshold_mode(const std::string& name) {
    if (name == "reliable") return ThresholdMode::kReliable;
    if (name == "literal") return ThresholdMode::kLiteral;
    throw std::invalid_argument("config: threshold_mode must be 'reliable' or 'literal', got '" +
                                name + "'");
}

std::string threshold_mode_name(ThresholdMode mode) {
    return mode == ThresholdMode::kReliable ? "reliable" : "literal";
}

void Config::apply(const std::string& key, const std::string& value) {
    if (key == "w_intensity") {
        par.intensity_weight = parse_double(key, value);
    } else if (key == "w_position") {
        par.position_weight = parse_double(key, value);
    } else if (key == "c_intensity") {
        par.intensity_scale = parse_double(key, value);
    } else if (key == "c_position") {
        par.position_scale = parse_double(key, value);
    } else if (key == "dilations") {
        par.dilations = parse_list<int>(value, [&](const std::string& s) {
            return static_cast<int>(parse_uint(key, s));
        });
    } else if (key == "iterations") {
        par.iterations = static_cast<int>(parse_uint(key, value));
    } else if (key == "alpha_low") {
        alpha_low = parse_double(key, value);
    } else if (key == "alpha_high") {
        alpha_high = parse_double(key, value);
    } else if (key == "threshold_mode") {
        threshold_mode = parse_threshold_mode(value);
    } else if (key == "sweep_thresholds") {
        sweep_thresholds = parse_list<double>(value, [&](const std::string& s) {
            return parse_double(key, s);
        });
    } else if (key == "step_size") {
        step_size = parse_double(key, value);
    } else if (key == "steps") {
        steps = parse_uint(key, value);
    } else if (key == "supervise_layers") {
        supervise_none = value == "none";
        supervise_layers = supervise_none
                               ? std::vector<std::size_t>{}
                               : parse_list<std::size_t>(value, [&](const std::string& s) {
                                     return static_cast<std::size_t>(parse_uint(key, s));
                                 });
    } else if (key == "sample_pairs") {
        sample_pairs = parse_uint(key, value);
    } else if (key == "seed") {
        seed = parse_uint(key, value);
    } else if (key == "uniform_weights") {
        uniform_weights = parse_bool(key, value);
    } else if (key == "sweep") {
        sweep = parse_bool(key, value);
    } else if (key == "height") {
        height = parse_uint(key, value);
    } else if (key == "width") {
        width = parse_uint(key, value);
    } else if (key == "classes") {
        classes = parse_uint(key, value);
    } else if (key == "layers") {
        layers = parse_uint(key, value);
    } else if (key == "heads") {
        heads = parse_uint(key, value);
    } else if (key == "noise_level") {
        noise_level = parse_double(key, value);
    } else if (key == "collapse_profile") {
        collapse_profile = parse_list<double>(value, [&](const std::string& s) {
            return parse_double(key, s);
        });
    } else {
        throw std::invalid_argument("config: unknown key '" + key + "'");
    }
}

Config Config::from_text(const std::string& text, const std::string& origin) {
    Config cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config: missing '=' at " + origin + ":" +
                                        std::to_string(line_no));
        }
        cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("config: cannot open " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path.string());
}

std::string Config::serialize() const {
    std::string out;
    out += "w_intensity=" + fmt(par.intensity_weight) + "\n";
    out += "w_position=" + fmt(par.position_weight) + "\n";
    out += "c_intensity=" + fmt(par.intensity_scale) + "\n";
    out += "c_position=" + fmt(par.position_scale) + "\n";
    out += "dilations=" + join(par.dilations, [](int d) { return std::to_string(d); }) + "\n";
    out += "iterations=" + std::to_string(par.iterations) + "\n";
    out += "alpha_low=" + fmt(alpha_low) + "\n";
    out += "alpha_high=" + fmt(alpha_high) + "\n";
    out += "threshold_mode=" + threshold_mode_name(threshold_mode) + "\n";
    out += "sweep_thresholds=" + join(sweep_thresholds, fmt) + "\n";
    out += "step_size=" + fmt(step_size) + "\n";
    out += "steps=" + std::to_string(steps) + "\n";
    out += "supervise_layers=" +
           (supervise_none
                ? std::string("none")
                : join(supervise_layers, [](std::size_t v) { return std::to_string(v); })) +
           "\n";
    out += "sample_pairs=" + std::to_string(sample_pairs) + "\n";
    out += "seed=" + std::to_string(seed) + "\n";
    out += std::string("uniform_weights=") + (uniform_weights ? "true" : "false") + "\n";
    out += std::string("sweep=") + (sweep ? "true" : "false") + "\n";
    out += "height=" + std::to_string(height) + "\n";
    out += "width=" + std::to_string(width) + "\n";
    out += "classes=" + std::to_string(classes) + "\n";
    out += "layers=" + std::to_string(layers) + "\n";
    out += "heads=" + std::to_string(heads) + "\n";
    out += "noise_level=" + fmt(noise_level) + "\n";
    out += "collapse_profile=" + join(collapse_profile, fmt) + "\n";
    return out;
}

}  // namespace aream
