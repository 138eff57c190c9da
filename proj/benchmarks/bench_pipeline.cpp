#include <benchmark/benchmark.h>

#include "codedblur/dataset.hpp"
#include "codedblur/imaging.hpp"
#include "codedblur/metrics.hpp"
#include "codedblur/reconstruction.hpp"

using namespace codedblur;

namespace {

const optics::OpticalConfig kConfig{};
const optics::PhaseMask kMask = optics::PhaseMask::two_ring_default();

const optics::PSFStack& stack49() {
  static const auto s =
      optics::psf_stack(kMask, kConfig, optics::DefocusSchedule::linear(49, -4.0, 4.0));
  return s;
}

struct Fixture {
  LinearImage base = dataset::synthetic_texture(128, 128, 3);
  FrameSequence frames = dataset::translating_frames(base, 14.0, 0.0, 49);
  LinearImage coded =
      imaging::code_image(frames, stack49(), imaging::Boundary::Periodic);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_code_image_128(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto img = imaging::code_image(f.frames, stack49(), imaging::Boundary::Periodic);
    benchmark::DoNotOptimize(img.data.data());
  }
}
BENCHMARK(BM_code_image_128)->Unit(benchmark::kMillisecond);

void BM_effective_kernel(benchmark::State& state) {
  for (auto _ : state) {
    auto K = recon::effective_kernel(stack49(), {16.0, 0.0}, 32.0);
    benchmark::DoNotOptimize(K.planes.data());
  }
}
BENCHMARK(BM_effective_kernel)->Unit(benchmark::kMillisecond);

void BM_estimate_motion_horizontal(benchmark::State& state) {
  const auto& f = fixture();
  const auto grid = recon::hypothesis_grid(32.0, 2.0, true);
  for (auto _ : state) {
    auto r = recon::estimate_motion(f.coded, stack49(), grid, 1e-2);
    benchmark::DoNotOptimize(r.second.entries.data());
  }
}
BENCHMARK(BM_estimate_motion_horizontal)->Unit(benchmark::kMillisecond);

void BM_reconstruct_frame(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    auto img = recon::reconstruct_frame(f.coded, stack49(), {14.0, 0.0}, 0.5, 1e-3);
    benchmark::DoNotOptimize(img.data.data());
  }
}
BENCHMARK(BM_reconstruct_frame)->Unit(benchmark::kMillisecond);

void BM_ssim_128(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(metrics::ssim(f.coded, f.base));
  }
}
BENCHMARK(BM_ssim_128)->Unit(benchmark::kMillisecond);

}  // namespace
