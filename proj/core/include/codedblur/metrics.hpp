#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "codedblur/image.hpp"
#include "codedblur/optics.hpp"
#include "codedblur/reconstruction.hpp"

namespace codedblur::metrics {

/// 10 log10(peak^2 / MSE); +infinity for identical images.
double psnr(const LinearImage& a, const LinearImage& b, double peak = 1.0);

/// SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03,
/// dynamic range 1; per channel over valid window positions, then averaged.
double ssim(const LinearImage& a, const LinearImage& b);

/// SSIM over the spatiotemporal volume with a separable 3-D Gaussian window:
/// temporal extent 7 (sigma 1.0), spatial 11x11 (sigma 1.5).
double ssim3d(const FrameSequence& a, const FrameSequence& b);

/// Mean over k of -10 log10(l_k), in dB (higher is better).
double vid_aggregate(double l1, double l2, double l3);

struct VelocityPair {
  recon::MotionHypothesis estimated;
  recon::MotionHypothesis truth;
};

/// Fraction of pairs with positive dot product; zero counts as failure.
double direction_accuracy(std::span<const VelocityPair> pairs);

/// One translating scene for the sweep harness: a base texture and the ground
/// truth velocity it moves with.
struct SweepScene {
  std::string id;
  LinearImage base;
  recon::MotionHypothesis velocity;
};

enum class SweepCoding { Coded, Uncoded };
enum class SweepDecoder { Tikhonov, Identity };

struct SweepSpec {
  std::vector<double> sigmas;
  std::vector<double> exposure_ratios{1.0, 2.0 / 3.0};
  std::vector<SweepScene> scenes;
  std::uint64_t seed = 0;
  SweepCoding coding = SweepCoding::Coded;
  SweepDecoder decoder = SweepDecoder::Tikhonov;
  bool horizontal_grid = true;
  double grid_step = 2.0;

  void validate() const;
};

struct SweepRow {
  double sigma = 0.0;
  double exposure_ratio = 0.0;
  double psnr_mean = 0.0;
  double ssim_mean = 0.0;
  double dir_acc = 0.0;
};

/// For each (sigma, ratio): effective sigma' = sigma / ratio; synthesizes every
/// scene, decodes at the 7 ground-truth instants, aggregates PSNR/SSIM and
/// direction accuracy. Deterministic under the spec seed.
std::vector<SweepRow> noise_sweep(const SweepSpec& spec, const optics::PSFStack& stack,
                                  const recon::DecoderOptions& decoder);

/// Header "sigma,exposure_ratio,psnr_mean,ssim_mean,dir_acc"; infinite PSNR is
/// written as the literal "inf".
std::string sweep_csv(std::span<const SweepRow> rows);

}  // namespace codedblur::metrics
