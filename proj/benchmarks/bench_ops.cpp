#include <benchmark/benchmark.h>

#include "revive/autodiff.hpp"
#include "revive/blocks.hpp"
#include "revive/canny.hpp"
#include "revive/metrics.hpp"
#include "revive/ops.hpp"
#include "revive/rng.hpp"
#include "revive/unet.hpp"

using namespace revive;

static void BM_Conv2d3x3(benchmark::State& state) {
    const auto c = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const Tensor x = Tensor::randn(Shape{1, c, 32, 32}, rng);
    const Tensor k = Tensor::randn(Shape{c, c, 3, 3}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, k, {}));
}
BENCHMARK(BM_Conv2d3x3)->Arg(8)->Arg(16)->Arg(32);

static void BM_C2FBlock(benchmark::State& state) {
    const nn::BlockSpec spec{.channels = static_cast<int>(state.range(0))};
    Rng rng(2);
    const auto w = nn::C2FBlockWeights::init(spec, rng);
    const Tensor x = Tensor::randn(Shape{1, static_cast<std::size_t>(spec.channels), 16, 16}, rng);
    for (auto _ : state) benchmark::DoNotOptimize(nn::c2f_block(x, spec, w));
}
BENCHMARK(BM_C2FBlock)->Arg(16)->Arg(32);

static void BM_C2FBlockBackward(benchmark::State& state) {
    const nn::BlockSpec spec{.channels = 16};
    Rng rng(3);
    const auto w = nn::C2FBlockWeights::init(spec, rng);
    Tensor x = Tensor::randn(Shape{1, 16, 16, 16}, rng);
    x.set_requires_grad(true);
    for (auto _ : state) {
        Tape tape;
        tape.backward(sum(nn::c2f_block(x, spec, w)));
    }
}
BENCHMARK(BM_C2FBlockBackward);

static void BM_UNetForward(benchmark::State& state) {
    const nn::NetworkSpec spec;
    const auto w = nn::UNetWeights::init(spec, 4);
    Rng rng(5);
    const Tensor y = Tensor::uniform(Shape{4, 3, 16, 16}, rng, 0, 1);
    const Tensor mu = Tensor::uniform(Shape{4, 3, 16, 16}, rng, 0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(nn::unet_forward(spec, w, y, mu, 100));
}
BENCHMARK(BM_UNetForward);

static void BM_Canny(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(6);
    const Tensor img = Tensor::uniform(Shape{1, 3, n, n}, rng, 0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(loss::canny(img));
}
BENCHMARK(BM_Canny)->Arg(32)->Arg(128);

static void BM_Ssim(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(7);
    const Tensor a = Tensor::uniform(Shape{1, 3, n, n}, rng, 0, 1);
    const Tensor b = Tensor::uniform(Shape{1, 3, n, n}, rng, 0, 1);
    for (auto _ : state) benchmark::DoNotOptimize(metrics::ssim(a, b));
}
BENCHMARK(BM_Ssim)->Arg(32)->Arg(128);
BENCHMARK_MAIN();
