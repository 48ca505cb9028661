// Command line front end for the attention re-activation pipeline.
//
// Subcommands: diagnose, refine, labels, gradcheck, demo, eval. Every
// behavioral option lives in the flat key=value config file and has a
// matching long-form flag; a flag always overrides the file. All runs are
// deterministic given (inputs, config, seed), and each writes a
// manifest.txt snapshot of the resolved parameters next to its outputs.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aream/affinity.hpp"
#include "aream/cam.hpp"
#include "aream/config.hpp"
#include "aream/io.hpp"
#include "aream/labels.hpp"
#include "aream/loss.hpp"
#include "aream/metrics.hpp"
#include "aream/par.hpp"
#include "aream/pipeline.hpp"
#include "aream/reactivation.hpp"
#include "aream/rng.hpp"
#include "aream/scene.hpp"
#include "aream/tensor.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitArgument = 1;
constexpr int kExitInvariant = 2;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// Flag values that override the config file when present.
struct FlagOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<bool> uniform_weights;
    std::optional<bool> sweep;
    std::optional<std::string> threshold_mode;
    std::vector<std::pair<std::string, std::string>> raw;  // --set key=value pairs
};

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    FlagOverrides overrides;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_threshold_mode) {
    cmd->add_option("--config", args.config_path, "key=value config file");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&args](std::uint64_t v) { args.overrides.seed = v; },
        "seed for randomized paths");
    cmd->add_option_function<std::string>(
        "--set",
        [&args](const std::string& kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                throw CLI::ValidationError("--set expects key=value");
            }
            args.overrides.raw.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        },
        "override any config key, e.g. --set iterations=5")
        ->take_all();
    if (with_threshold_mode) {
        cmd->add_option_function<std::string>(
            "--threshold-mode",
            [&args](const std::string& v) { args.overrides.threshold_mode = v; },
            "reliable|literal");
    }
}

aream::Config resolve_config(const CommonArgs& args) {
    aream::Config cfg;
    if (!args.config_path.empty()) cfg = aream::Config::from_file(args.config_path);
    for (const auto& [k, v] : args.overrides.raw) cfg.apply(k, v);
    if (args.overrides.seed) cfg.seed = *args.overrides.seed;
    if (args.overrides.uniform_weights) cfg.uniform_weights = *args.overrides.uniform_weights;
    if (args.overrides.sweep) cfg.sweep = *args.overrides.sweep;
    if (args.overrides.threshold_mode) {
        cfg.threshold_mode = aream::parse_threshold_mode(*args.overrides.threshold_mode);
    }
    return cfg;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const CommonArgs& args, const aream::Config& cfg,
                    const std::vector<std::pair<std::string, std::string>>& inputs) {
    std::string text;
    text += "subcommand=" + subcommand + "\n";
    text += "config_path=" + (args.config_path.empty() ? "-" : args.config_path) + "\n";
    for (const auto& [name, path] : inputs) text += "input_" + name + "=" + path + "\n";
    text += "out_dir=" + out_dir.string() + "\n";
    text += "# resolved parameters\n";
    text += cfg.serialize();
    aream::write_text(out_dir / "manifest.txt", text);
}

aream::SceneSpec scene_spec_from_config(const aream::Config& cfg) {
    aream::SceneSpec spec;
    spec.seed = cfg.seed;
    spec.height = cfg.height;
    spec.width = cfg.width;
    spec.classes = cfg.classes;
    spec.layers = cfg.layers;
    spec.heads = cfg.heads;
    spec.noise_level = cfg.noise_level;
    spec.collapse_profile = cfg.collapse_profile;
    return spec;
}

std::vector<double> sweep_grid(const aream::Config& cfg) {
    return cfg.sweep_thresholds.empty() ? aream::default_threshold_grid()
                                        : cfg.sweep_thresholds;
}

void write_weights_csv(const fs::path& path, const aream::LayerWeights& w) {
    std::string csv = "layer,raw,fuse,supervise\n";
    for (std::size_t l = 0; l < w.layers(); ++l) {
        csv += std::to_string(l) + "," + fmt(w.raw[l]) + "," + fmt(w.fuse[l]) + "," +
               fmt(w.supervise[l]) + "\n";
    }
    aream::write_text(path, csv);
}

void write_iou_outputs(const fs::path& out_dir, const aream::IoUReport& report) {
    std::string csv = "class,iou,evaluated\n";
    for (std::size_t c = 0; c <= report.num_classes; ++c) {
        csv += std::to_string(c) + "," + fmt(report.per_class[c]) + "," +
               (report.evaluated[c] ? "1" : "0") + "\n";
    }
    aream::write_text(out_dir / "report.csv", csv);

    ordered_json j;
    j["miou"] = report.miou;
    j["num_classes"] = report.num_classes;
    if (report.best_threshold) j["best_threshold"] = *report.best_threshold;
    j["per_class"] = report.per_class;
    j["evaluated"] = report.evaluated;
    const std::size_t side = report.num_classes + 1;
    ordered_json conf = ordered_json::array();
    for (std::size_t g = 0; g < side; ++g) {
        ordered_json row = ordered_json::array();
        for (std::size_t p = 0; p < side; ++p) row.push_back(report.confusion[g * side + p]);
        conf.push_back(row);
    }
    j["confusion"] = conf;
    aream::write_text(out_dir / "report.json", j.dump(2) + "\n");
}

std::vector<bool> parse_present(const std::string& arg, std::size_t classes) {
    if (arg.empty()) return std::vector<bool>(classes, true);
    std::vector<bool> present(classes, false);
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t idx = std::stoull(item);
        if (idx >= classes) {
            throw std::invalid_argument("--present: class index " + item + " out of range");
        }
        present[idx] = true;
    }
    return present;
}

// ---- subcommand bodies ----

int run_diagnose(const CommonArgs& args, const std::string& stack_path) {
    const aream::Config cfg = resolve_config(args);
    aream::AffinityStack stack{aream::read_tensor(stack_path)};
    stack.validate();

    fs::create_directories(args.out_dir);
    const std::size_t n = stack.tokens();
    std::string csv = "layer,oversmoothing_score,column_concentration,raw_entropy_weight\n";
    for (std::size_t l = 0; l < stack.layers(); ++l) {
        const aream::RowStochasticAffinity aff = aream::head_average(stack.layer_logits(l));
        const double score = aream::oversmoothing_score(aff, cfg.sample_pairs, cfg.seed);

        // Column mass: how much of the total attention lands on each token.
        std::vector<double> column_mass(n, 0.0);
        auto probs = aff.probs().data();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) column_mass[j] += probs[i * n + j];
        }
        double max_mass = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            column_mass[j] /= static_cast<double>(n);
            max_mass = std::max(max_mass, column_mass[j]);
        }
        const double weight = 1.0 - aream::normalized_entropy(column_mass);

        csv += std::to_string(l) + "," + fmt(score) + "," + fmt(max_mass) + "," + fmt(weight) +
               "\n";
    }
    aream::write_text(fs::path(args.out_dir) / "diagnose.csv", csv);
    write_manifest(args.out_dir, "diagnose", args, cfg, {{"stack", stack_path}});
    std::cout << "wrote " << (fs::path(args.out_dir) / "diagnose.csv").string() << "\n";
    return kExitOk;
}

int run_refine(const CommonArgs& args, const std::string& features_path,
               const std::string& classifier_path, const std::string& stack_path,
               const std::string& image_path, const std::string& present_arg) {
    const aream::Config cfg = resolve_config(args);
    const aream::Tensor features = aream::read_tensor(features_path);
    const aream::Tensor classifier = aream::read_tensor(classifier_path);
    aream::AffinityStack stack{aream::read_tensor(stack_path)};
    stack.validate();

    aream::Tensor image;
    if (!image_path.empty()) {
        image = aream::read_tensor(image_path);
    } else {
        // No guidance image: use the channel-mean of the features, scaled to
        // [0,1], as the intensity map.
        const std::size_t d = features.extent(0);
        const std::size_t plane = features.extent(1) * features.extent(2);
        aream::Tensor mean({1, features.extent(1), features.extent(2)});
        for (std::size_t ch = 0; ch < d; ++ch) {
            for (std::size_t p = 0; p < plane; ++p) {
                mean[p] += features[ch * plane + p] / static_cast<double>(d);
            }
        }
        image = aream::minmax_normalize(mean);
    }

    const std::vector<bool> present = parse_present(present_arg, classifier.extent(1));
    const aream::RefineResult result = aream::run_refine(features, classifier, present, stack,
                                                         image, cfg, cfg.uniform_weights);

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    aream::write_tensor(out / "refined.atsr", result.refined);
    aream::write_label_map(out / "labels.pgm", result.labels);
    write_weights_csv(out / "weights.csv", result.weights);
    write_manifest(args.out_dir, "refine", args, cfg,
                   {{"features", features_path},
                    {"classifier", classifier_path},
                    {"stack", stack_path},
                    {"image", image_path.empty() ? "-" : image_path}});
    std::cout << "wrote refined.atsr, labels.pgm, weights.csv under " << args.out_dir << "\n";
    return kExitOk;
}

int run_labels(const CommonArgs& args, const std::string& refined_path) {
    const aream::Config cfg = resolve_config(args);
    const aream::Tensor refined = aream::read_tensor(refined_path);
    const aream::LabelMap labels = aream::make_segmentation_labels(
        refined, cfg.alpha_low, cfg.alpha_high, cfg.threshold_mode);

    fs::create_directories(args.out_dir);
    aream::write_label_map(fs::path(args.out_dir) / "labels.pgm", labels);
    write_manifest(args.out_dir, "labels", args, cfg, {{"refined", refined_path}});
    std::cout << "wrote labels.pgm under " << args.out_dir << "\n";
    return kExitOk;
}

int run_gradcheck(const CommonArgs& args, std::size_t size) {
    const aream::Config cfg = resolve_config(args);
    if (size < 2) {
        throw std::invalid_argument("gradcheck: size must be >= 2");
    }

    // Random logits in a range where the sigmoid is far from saturation and
    // a random ternary label map over the same tokens.
    aream::Rng rng(cfg.seed);
    const std::size_t n = size;
    aream::Tensor logits({n, n});
    for (double& v : logits.data()) v = rng.uniform(-2.0, 2.0);

    aream::LabelMap seg(1, n);
    for (auto& v : seg.values) {
        const double u = rng.next_double();
        v = u < 0.2 ? aream::kIgnoreLabel : static_cast<std::uint8_t>(rng.next_index(3));
    }
    const aream::AffinityLabels labels = aream::make_affinity_labels(seg);

    const aream::LayerLoss analytic = aream::affinity_loss(logits, labels);

    const double h = 1e-6;
    double max_rel = 0.0;
    aream::Tensor probe = logits;
    for (std::size_t i = 0; i < n * n; ++i) {
        const double saved = probe[i];
        probe[i] = saved + h;
        const double up = aream::affinity_loss(probe, labels).loss;
        probe[i] = saved - h;
        const double down = aream::affinity_loss(probe, labels).loss;
        probe[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double a = analytic.grad[i];
        const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
        max_rel = std::max(max_rel, rel);
    }

    std::cout << "gradcheck seed=" << cfg.seed << " size=" << n
              << " max_rel_error=" << fmt(max_rel) << "\n";
    return max_rel < 1e-5 ? kExitOk : kExitInvariant;
}

int run_demo(const CommonArgs& args) {
    const aream::Config cfg = resolve_config(args);
    const aream::SceneSpec spec = scene_spec_from_config(cfg);
    const aream::Scene scene = aream::generate_scene(spec);

    const aream::RefineResult refined = aream::run_refine(
        scene.features, scene.classifier, scene.present, scene.stack, scene.image, cfg,
        cfg.uniform_weights);

    const aream::AffinityLabels pair_labels = aream::make_affinity_labels(refined.labels);
    aream::LayerWeights supervise =
        aream::apply_supervise_mask(refined.weights, cfg.supervise_layers);
    if (cfg.supervise_none) {
        supervise.supervise.assign(supervise.supervise.size(), 0.0);
    }

    const aream::OptimizeResult optimized = aream::optimize_logits(
        scene.stack, pair_labels, supervise, cfg.step_size, cfg.steps);

    // Layerwise and aggregated gains, before and after the optimization.
    const std::vector<double> grid = sweep_grid(cfg);
    const auto layers_pre = aream::head_averaged_layers(scene.stack);
    const auto layers_post = aream::head_averaged_layers(optimized.stack);
    std::string layer_csv = "layer,pre_miou,post_miou\n";
    std::vector<double> pre_by_layer, post_by_layer;
    for (std::size_t l = 0; l < layers_pre.size(); ++l) {
        const double pre = aream::threshold_sweep(
            aream::propagate_single(refined.cams, layers_pre[l]).maps,
            scene.ground_truth, grid).miou;
        const double post = aream::threshold_sweep(
            aream::propagate_single(refined.cams, layers_post[l]).maps,
            scene.ground_truth, grid).miou;
        pre_by_layer.push_back(pre);
        post_by_layer.push_back(post);
        layer_csv += std::to_string(l) + "," + fmt(pre) + "," + fmt(post) + "\n";
    }
    const double agg_pre = aream::threshold_sweep(
        aream::propagate_single(refined.cams, aream::layer_average(layers_pre)).maps,
        scene.ground_truth, grid).miou;
    const double agg_post = aream::threshold_sweep(
        aream::propagate_single(refined.cams, aream::layer_average(layers_post)).maps,
        scene.ground_truth, grid).miou;

    const double pre_loss = optimized.loss_history.front();
    const double post_loss = optimized.loss_history.back();

    fs::create_directories(args.out_dir);
    const fs::path out(args.out_dir);
    aream::write_tensor(out / "features.atsr", scene.features);
    aream::write_tensor(out / "classifier.atsr", scene.classifier);
    aream::write_tensor(out / "stack.atsr", scene.stack.logits);
    aream::write_tensor(out / "image.atsr", scene.image);
    aream::write_label_map(out / "ground_truth.pgm", scene.ground_truth);
    aream::write_tensor(out / "refined.atsr", refined.refined);
    aream::write_label_map(out / "labels.pgm", refined.labels);
    aream::write_tensor(out / "optimized_stack.atsr", optimized.stack.logits);
    write_weights_csv(out / "weights.csv", refined.weights);
    aream::write_text(out / "layer_miou.csv", layer_csv);

    std::string loss_csv = "step,loss\n";
    for (std::size_t t = 0; t < optimized.loss_history.size(); ++t) {
        loss_csv += std::to_string(t) + "," + fmt(optimized.loss_history[t]) + "\n";
    }
    aream::write_text(out / "loss_history.csv", loss_csv);

    ordered_json j;
    j["pre_loss"] = pre_loss;
    j["post_loss"] = post_loss;
    j["loss_ratio"] = pre_loss > 0.0 ? post_loss / pre_loss : 0.0;
    j["pre_aggregated_miou"] = agg_pre;
    j["post_aggregated_miou"] = agg_post;
    j["pre_layer_miou"] = pre_by_layer;
    j["post_layer_miou"] = post_by_layer;
    j["confident_pixels"] =
        refined.labels.pixels() -
        static_cast<std::size_t>(std::count(refined.labels.values.begin(),
                                            refined.labels.values.end(), aream::kIgnoreLabel));
    aream::write_text(out / "summary.json", j.dump(2) + "\n");
    write_manifest(args.out_dir, "demo", args, cfg, {});

    std::cout << "scene " << spec.height << "x" << spec.width << ", " << spec.classes
              << " classes, " << spec.layers << " layers, seed " << spec.seed << "\n"
              << "loss " << fmt(pre_loss) << " -> " << fmt(post_loss) << " (ratio "
              << fmt(pre_loss > 0.0 ? post_loss / pre_loss : 0.0) << ")\n"
              << "aggregated miou " << fmt(agg_pre) << " -> " << fmt(agg_post) << "\n";
    return kExitOk;
}

int run_eval(const CommonArgs& args, const std::string& pred_path, const std::string& gt_path,
             const std::string& refined_path) {
    const aream::Config cfg = resolve_config(args);
    const aream::LabelMap gt = aream::read_label_map(gt_path);

    aream::IoUReport report;
    std::vector<std::pair<std::string, std::string>> inputs{{"gt", gt_path}};
    if (cfg.sweep) {
        if (refined_path.empty()) {
            throw std::invalid_argument("eval --sweep requires --refined maps");
        }
        const aream::Tensor refined = aream::read_tensor(refined_path);
        const std::vector<double> grid = sweep_grid(cfg);
        report = aream::threshold_sweep(refined, gt, grid);
        inputs.emplace_back("refined", refined_path);
    } else {
        if (pred_path.empty()) {
            throw std::invalid_argument("eval requires --pred labels (or --sweep with --refined)");
        }
        const aream::LabelMap pred = aream::read_label_map(pred_path);
        report = aream::miou(pred, gt);
        inputs.emplace_back("pred", pred_path);
    }

    fs::create_directories(args.out_dir);
    write_iou_outputs(args.out_dir, report);
    write_manifest(args.out_dir, "eval", args, cfg, inputs);
    std::cout << "miou " << fmt(report.miou);
    if (report.best_threshold) std::cout << " at threshold " << fmt(*report.best_threshold);
    std::cout << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention re-activation pipeline"};
    app.require_subcommand(1);

    CommonArgs diagnose_args, refine_args, labels_args, gradcheck_args, demo_args, eval_args;
    std::string stack_path, features_path, classifier_path, image_path, present_arg;
    std::string refined_path, pred_path, gt_path, eval_refined_path;
    std::size_t gradcheck_size = 16;

    CLI::App* diagnose = app.add_subcommand("diagnose", "per-layer over-smoothing report");
    diagnose->add_option("--stack", stack_path, "affinity logits, L x H_d x N x N")->required();
    add_common_flags(diagnose, diagnose_args, false);

    CLI::App* refine = app.add_subcommand("refine", "activation maps to pseudo labels");
    refine->add_option("--features", features_path, "feature tensor D x H x W")->required();
    refine->add_option("--classifier", classifier_path, "classifier weights D x C")->required();
    refine->add_option("--stack", stack_path, "affinity logits")->required();
    refine->add_option("--image", image_path, "guidance image tensor {1|3} x H x W");
    refine->add_option("--present", present_arg, "comma list of present class indices");
    refine->add_flag_function(
        "--uniform-weights",
        [&refine_args](std::int64_t) { refine_args.overrides.uniform_weights = true; },
        "fuse layers uniformly instead of by entropy weight");
    add_common_flags(refine, refine_args, true);

    CLI::App* labels = app.add_subcommand("labels", "threshold refined maps into labels");
    labels->add_option("--refined", refined_path, "refined maps C x H x W")->required();
    add_common_flags(labels, labels_args, true);

    CLI::App* gradcheck = app.add_subcommand("gradcheck", "verify the affinity loss gradient");
    gradcheck->add_option("--size", gradcheck_size, "token count N");
    add_common_flags(gradcheck, gradcheck_args, false);

    CLI::App* demo = app.add_subcommand("demo", "synthetic end-to-end re-activation run");
    demo->add_flag_function(
        "--uniform-weights",
        [&demo_args](std::int64_t) { demo_args.overrides.uniform_weights = true; },
        "fuse layers uniformly instead of by entropy weight");
    add_common_flags(demo, demo_args, true);

    CLI::App* eval = app.add_subcommand("eval", "mIoU evaluation");
    eval->add_option("--pred", pred_path, "predicted label map (P5)");
    eval->add_option("--gt", gt_path, "ground truth label map (P5)")->required();
    eval->add_option("--refined", eval_refined_path, "refined maps for --sweep");
    eval->add_flag_function(
        "--sweep", [&eval_args](std::int64_t) { eval_args.overrides.sweep = true; },
        "sweep background thresholds and report the best mIoU");
    add_common_flags(eval, eval_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitArgument;
    }

    try {
        if (diagnose->parsed()) return run_diagnose(diagnose_args, stack_path);
        if (refine->parsed()) {
            return run_refine(refine_args, features_path, classifier_path, stack_path,
                              image_path, present_arg);
        }
        if (labels->parsed()) return run_labels(labels_args, refined_path);
        if (gradcheck->parsed()) return run_gradcheck(gradcheck_args, gradcheck_size);
        if (demo->parsed()) return run_demo(demo_args);
        if (eval->parsed()) return run_eval(eval_args, pred_path, gt_path, eval_refined_path);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const aream::TensorIoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgument;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitArgument;
    }
    return kExitArgument;
}
