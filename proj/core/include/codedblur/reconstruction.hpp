#pragma once

#include <vector>

#include "codedblur/image.hpp"
#include "codedblur/optics.hpp"

namespace codedblur::recon {

/// Global-translation hypothesis: total displacement in pixels across the
/// exposure; the sign encodes direction.
struct MotionHypothesis {
  double vx = 0.0;
  double vy = 0.0;
  double norm() const;
};

/// Single shift-invariant kernel equivalent to the coded time-varying blur
/// under a global constant-velocity translation.
struct EffectiveKernel {
  int side = 0;
  MotionHypothesis velocity;
  std::vector<double> planes;  // [c][y][x], 3 color planes, each unit sum

  std::span<const double> plane(int c) const {
    const size_t s2 = static_cast<size_t>(side) * side;
    return {planes.data() + static_cast<size_t>(c) * s2, s2};
  }
};

struct MotionScore {
  MotionHypothesis velocity;
  double score = 0.0;
};

struct MotionScoreTable {
  std::vector<MotionScore> entries;  // grid order
};

struct DecoderOptions {
  double v_max = 32.0;
  double epsilon_score = 1e-2;
  double epsilon_deconv = 1e-3;
  // Cosine cross-fade pad width for images that are not periodic-compatible
  // (real captures). 0 = raw periodic model; the closed-form identities hold
  // exactly only at 0.
  int taper_px = 0;
};

/// K_v = (1/N) sum_n shift(h_n, (v/2) t_n) on a side = kernel_size +
/// ceil(v_max) + 8 support (sub-pixel Fourier shifts).
EffectiveKernel effective_kernel(const optics::PSFStack& stack,
                                 const MotionHypothesis& v, double v_max);

/// Pads the image with a band that cosine cross-fades between the opposing
/// edges, making the result circularly continuous. pad 0 returns a copy.
LinearImage pad_periodic_taper(const LinearImage& img, int pad);

/// Per channel S = F^-1{ conj(K) B / (|K|^2 + eps) } under the periodic model.
/// taper_px > 0 pads with the cosine cross-fade and crops back afterwards.
LinearImage tikhonov_deconvolve(const LinearImage& B, const EffectiveKernel& K,
                                double epsilon, int taper_px = 0);

/// Closed-form value of min_S ||K (*) S - B||^2 + eps ||S||^2 over the periodic
/// grid of B as given (no padding): sum_c sum_f eps |B^|^2 / (|K^|^2 + eps)
/// with unitary DFT scaling so it matches the spatial objective.
double residual_score(const LinearImage& B, const EffectiveKernel& K, double epsilon);

/// Default hypothesis grid: vx (and vy unless horizontal_only) in
/// [-v_max, v_max] in steps of `step`.
std::vector<MotionHypothesis> hypothesis_grid(double v_max, double step,
                                              bool horizontal_only);

/// Argmin of residual_score over the grid; ties break toward smaller |v|,
/// then lexicographic (vx, vy). The image is taper-padded once before scoring.
std::pair<MotionHypothesis, MotionScoreTable> estimate_motion(
    const LinearImage& B, const optics::PSFStack& stack,
    const std::vector<MotionHypothesis>& grid, double epsilon,
    const DecoderOptions& opts = {});

/// S(t) = shift(tikhonov_deconvolve(B, K_v, eps), (v/2) t), t in [-1, 1].
LinearImage reconstruct_frame(const LinearImage& B, const optics::PSFStack& stack,
                              const MotionHypothesis& v, double t, double epsilon,
                              const DecoderOptions& opts = {});

struct VideoResult {
  FrameSequence frames;
  MotionHypothesis velocity;
  MotionScoreTable scores;
};

/// estimate_motion, then reconstruct_frame at M equispaced t spanning [-1, 1]
/// (M = 1 yields t = 0).
VideoResult reconstruct_video(const LinearImage& B, const optics::PSFStack& stack,
                              const std::vector<MotionHypothesis>& grid, int frame_count,
                              double epsilon, const DecoderOptions& opts = {});

namespace detail {
/// Deconvolution on the periodic grid of B with no padding and no crop;
/// exposed for the scoring-consistency oracle.
LinearImage tikhonov_raw(const LinearImage& B, const EffectiveKernel& K, double epsilon);
/// Circular convolution of img with the kernel plane set.
LinearImage convolve_periodic(const LinearImage& img, const EffectiveKernel& K);
}  // namespace detail

}  // namespace codedblur::recon
