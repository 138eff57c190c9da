#pragma once

#include <cstdint>

#include "codedblur/image.hpp"
#include "codedblur/optics.hpp"

namespace codedblur::imaging {

enum class Boundary { Reflect, Periodic };
enum class ShiftMode { Fourier, Integer };

/// Gamma space -> signal space: x^2.2 elementwise. Inputs outside [0,1] are
/// clamped (with a single stderr note per call).
LinearImage inverse_crf(const LinearImage& img);

/// Signal space -> gamma space: x^(1/2.2); negatives map to 0.
LinearImage crf(const LinearImage& img);

/// Elementwise mean over the frames (the conventional-camera image).
LinearImage temporal_mean(const FrameSequence& frames);

/// Coded motion-blurred image: per channel (1/N) sum_n conv(frame_n, kernel_n),
/// same size as the input frames.
LinearImage code_image(const FrameSequence& frames, const optics::PSFStack& stack,
                       Boundary boundary = Boundary::Reflect);

/// Trace of a moving point: (1/N) sum_n kernels[n] placed at (velocity/2)*t_n.
/// Canvas side = kernel_size + ceil(|velocity|) + 8.
LinearImage point_trace(const optics::PSFStack& stack, double velocity_x,
                        double velocity_y, ShiftMode mode = ShiftMode::Fourier);

/// Adds i.i.d. N(0, sigma^2) per element; deterministic for a fixed seed.
/// sigma is a fraction of the [0,1] dynamic range; no clamping.
LinearImage add_awgn(const LinearImage& img, double sigma, std::uint64_t seed);

/// Shorter exposures need proportionally more noise: sigma / exposure_ratio.
double scale_noise_for_exposure(double sigma_base, double exposure_ratio);

/// Periodic sub-pixel translation of every channel by (dy, dx) pixels.
LinearImage fourier_shift(const LinearImage& img, double dy, double dx);

}  // namespace codedblur::imaging
