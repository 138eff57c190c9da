#include <benchmark/benchmark.h>

#include "codedblur/optics.hpp"

using namespace codedblur::optics;

namespace {

const OpticalConfig kConfig{};
const PhaseMask kMask = PhaseMask::two_ring_default();

void BM_psf(benchmark::State& state) {
  for (auto _ : state) {
    auto r = psf(kMask, kConfig, 535.0, 2.5);
    benchmark::DoNotOptimize(r.kernel.data());
  }
}
BENCHMARK(BM_psf);

void BM_psf_with_grad(benchmark::State& state) {
  for (auto _ : state) {
    auto r = psf_with_grad(kMask, kConfig, 535.0, 2.5);
    benchmark::DoNotOptimize(r.grad.data());
  }
}
BENCHMARK(BM_psf_with_grad);

void BM_psf_stack_49(benchmark::State& state) {
  const auto schedule = DefocusSchedule::linear(49, -4.0, 4.0);
  for (auto _ : state) {
    auto stack = psf_stack(kMask, kConfig, schedule);
    benchmark::DoNotOptimize(stack.kernels.data());
  }
}
BENCHMARK(BM_psf_stack_49)->Unit(benchmark::kMillisecond);

}  // namespace
