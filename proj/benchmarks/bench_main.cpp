#include <benchmark/benchmark.h>

#include <vector>

#include "uaweight/imgqual.hpp"
#include "uaweight/random.hpp"
#include "uaweight/relevance.hpp"
#include "uaweight/synth.hpp"
#include "uaweight/trainer.hpp"
#include "uaweight/weighting.hpp"

using namespace uaweight;

static void BM_ImageQuality(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const RgbImage img = procedural_image(side, side, 1);
  const ImageQualityConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(image_quality(img, 120, 400, cfg).w_image);
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ImageQuality)->Arg(90)->Arg(224)->Arg(512);

static void BM_GaussianBlur(benchmark::State& state) {
  const RgbImage img = procedural_image(224, 224, 2);
  const double sigma = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(img, sigma).pixels.data());
}
BENCHMARK(BM_GaussianBlur)->Arg(1)->Arg(2)->Arg(4);

static void BM_ProceduralImage(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(procedural_image(224, 224, ++seed).pixels.data());
}
BENCHMARK(BM_ProceduralImage);

static void BM_ScaledCosine(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  std::vector<double> a(dim), b(dim);
  for (auto& x : a) x = standard_normal(rng);
  for (auto& x : b) x = standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(scaled_cosine(a, b, 0.0));
}
BENCHMARK(BM_ScaledCosine)->Arg(32)->Arg(512);

static void BM_ContrastiveRelevance(benchmark::State& state) {
  const std::size_t dim = 512, k = 15;
  Rng rng(4);
  auto draw = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = standard_normal(rng);
    return v;
  };
  const auto image = draw(), text = draw();
  std::vector<std::vector<double>> negs;
  for (std::size_t j = 0; j < k; ++j) negs.push_back(draw());
  RelevanceConfig cfg;
  cfg.mode = RelevanceMode::contrastive;
  for (auto _ : state) benchmark::DoNotOptimize(coarse_relevance(image, text, negs, cfg));
}
BENCHMARK(BM_ContrastiveRelevance);

static void BM_WeightedCeGrad(benchmark::State& state) {
  Rng rng(5);
  Matrix logits(32, 3);
  for (auto& v : logits.data()) v = standard_normal(rng);
  std::vector<std::size_t> labels(32);
  std::vector<double> weights(32);
  for (std::size_t i = 0; i < 32; ++i) {
    labels[i] = uniform_index(rng, 3);
    weights[i] = uniform01(rng);
  }
  for (auto _ : state) benchmark::DoNotOptimize(weighted_ce_grad(logits, labels, weights).data().data());
}
BENCHMARK(BM_WeightedCeGrad);

// One epoch over 2000 samples: the unit of work in the reweighting experiment.
static void BM_TrainEpoch(benchmark::State& state) {
  Rng rng(6);
  const std::size_t n = 2000, dim = 16;
  Matrix x(n, dim);
  for (auto& v : x.data()) v = standard_normal(rng);
  std::vector<std::size_t> y(n);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = uniform_index(rng, 3);
    w[i] = 0.05 + uniform01(rng);
  }
  TrainConfig cfg;
  cfg.epochs = 1;
  const std::vector<std::string> classes{"negative", "neutral", "positive"};
  for (auto _ : state) benchmark::DoNotOptimize(train(x, y, w, classes, cfg).model.bias.data());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TrainEpoch);

BENCHMARK_MAIN();
