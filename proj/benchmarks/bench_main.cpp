#include <benchmark/benchmark.h>

#include "aream/affinity.hpp"
#include "aream/cam.hpp"
#include "aream/loss.hpp"
#include "aream/par.hpp"
#include "aream/pipeline.hpp"
#include "aream/reactivation.hpp"
#include "aream/rng.hpp"
#include "aream/scene.hpp"

using namespace aream;

namespace {

Scene make_scene(std::size_t side) {
    SceneSpec spec;
    spec.seed = 7;
    spec.height = side;
    spec.width = side;
    return generate_scene(spec);
}

void BM_SoftmaxRows(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Tensor logits({n, n});
    for (double& v : logits.data()) v = rng.normal();
    for (auto _ : state) {
        Tensor s = softmax_over_axis(logits, 1);
        benchmark::DoNotOptimize(s.data().data());
    }
    state.SetComplexityN(static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SoftmaxRows)->RangeMultiplier(2)->Range(64, 512)->Complexity();

void BM_HeadAverage(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    Tensor logits({4, n, n});
    for (double& v : logits.data()) v = rng.normal();
    for (auto _ : state) {
        RowStochasticAffinity aff = head_average(logits);
        benchmark::DoNotOptimize(aff.probs().data().data());
    }
}
BENCHMARK(BM_HeadAverage)->Arg(144)->Arg(256);

void BM_OversmoothingScore(benchmark::State& state) {
    const Scene scene = make_scene(16);
    const auto layers = head_averaged_layers(scene.stack);
    for (auto _ : state) {
        benchmark::DoNotOptimize(oversmoothing_score(layers[3], 2048, 0));
    }
}
BENCHMARK(BM_OversmoothingScore);

void BM_FuseLayers(benchmark::State& state) {
    const Scene scene = make_scene(16);
    const auto layers = head_averaged_layers(scene.stack);
    const CamStack cams = normalize_cam(
        compute_raw_cam(scene.features, scene.classifier, scene.present), scene.present);
    const LayerWeights weights = compute_layer_weights(cams, layers);
    for (auto _ : state) {
        CamStack fused = fuse_layers(cams, layers, weights);
        benchmark::DoNotOptimize(fused.maps.data().data());
    }
}
BENCHMARK(BM_FuseLayers);

void BM_ParRefine(benchmark::State& state) {
    const Scene scene = make_scene(16);
    Rng rng(3);
    Tensor maps({2, 16, 16});
    for (double& v : maps.data()) v = rng.next_double();
    ParConfig cfg;
    for (auto _ : state) {
        Tensor out = refine(maps, scene.image, cfg);
        benchmark::DoNotOptimize(out.data().data());
    }
}
BENCHMARK(BM_ParRefine);

void BM_AffinityLoss(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    Tensor logits({n, n});
    for (double& v : logits.data()) v = rng.uniform(-2.0, 2.0);
    LabelMap seg(1, n);
    for (auto& v : seg.values) {
        v = rng.next_double() < 0.2 ? kIgnoreLabel
                                    : static_cast<std::uint8_t>(rng.next_index(3));
    }
    const AffinityLabels labels = make_affinity_labels(seg);
    for (auto _ : state) {
        LayerLoss l = affinity_loss(logits, labels);
        benchmark::DoNotOptimize(l.grad.data().data());
    }
}
BENCHMARK(BM_AffinityLoss)->Arg(144)->Arg(256);

void BM_OptimizeLogits(benchmark::State& state) {
    const Scene scene = make_scene(12);
    const auto layers = head_averaged_layers(scene.stack);
    const CamStack cams = normalize_cam(
        compute_raw_cam(scene.features, scene.classifier, scene.present), scene.present);
    const LayerWeights weights = compute_layer_weights(cams, layers);
    const CamStack fused = fuse_layers(cams, layers, weights);
    const LabelMap seg = make_segmentation_labels(fused.maps, 0.35, 0.55);
    const AffinityLabels labels = make_affinity_labels(seg);
    for (auto _ : state) {
        OptimizeResult r = optimize_logits(scene.stack, labels, weights, 0.5,
                                           static_cast<std::size_t>(state.range(0)));
        benchmark::DoNotOptimize(r.loss_history.data());
    }
}
BENCHMARK(BM_OptimizeLogits)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
