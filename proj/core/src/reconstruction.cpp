#include "codedblur/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "codedblur/fft.hpp"
#include "codedblur/parallel.hpp"

namespace codedblur::recon {

double MotionHypothesis::norm() const { return std::hypot(vx, vy); }

namespace {

int kernel_support(int kernel_size, double v_max) {
  return kernel_size + static_cast<int>(std::ceil(v_max)) + 8;
}

/// F{h_n} for every (n, c) on the side x side support, kernels centered at the
/// DFT origin.
std::vector<cvec> stack_spectra(const optics::PSFStack& stack, int side) {
  std::vector<cvec> spectra(static_cast<size_t>(stack.count) * 3);
  parallel_for(stack.count * 3, [&](int idx) {
    const int n = idx / 3, c = idx % 3;
    std::vector<double> embed(static_cast<size_t>(side) * side, 0.0);
    embed_centered_at_origin(stack.kernel(n, c).data(), stack.kernel_size, embed,
                             side, side);
    spectra[idx] = fft2_real(embed, side, side);
  });
  return spectra;
}

/// Assembles K_v from precomputed kernel spectra; output centered on the canvas.
EffectiveKernel assemble_kernel(const std::vector<cvec>& spectra, int count,
                                int side, const MotionHypothesis& v) {
  EffectiveKernel K;
  K.side = side;
  K.velocity = v;
  K.planes.resize(static_cast<size_t>(3) * side * side);
  for (int c = 0; c < 3; ++c) {
    cvec acc(static_cast<size_t>(side) * side, 0.0);
    for (int n = 0; n < count; ++n) {
      const double t = optics::normalized_time(n, count);
      cvec s = spectra[static_cast<size_t>(n) * 3 + c];
      apply_shift_phase(s, side, side, v.vy / 2.0 * t, v.vx / 2.0 * t);
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += s[i];
    }
    const double inv = 1.0 / count;
    for (auto& x : acc) x *= inv;
    std::vector<double> res = ifft2_real(acc, side, side);
    res = fftshift2(res, side, side);
    std::copy(res.begin(), res.end(),
              K.planes.begin() + static_cast<size_t>(c) * side * side);
  }
  return K;
}

/// Kernel spectrum on an h x w grid with the kernel center at the DFT origin.
cvec kernel_spectrum_on(const EffectiveKernel& K, int c, int h, int w) {
  if (K.side > h || K.side > w)
    throw std::invalid_argument("kernel support exceeds image size");
  std::vector<double> embed(static_cast<size_t>(h) * w, 0.0);
  embed_centered_at_origin(K.plane(c).data(), K.side, embed, h, w);
  return fft2_real(embed, h, w);
}

std::vector<double> cosine_ramp(int len) {
  // Smooth 0 -> 1 over len interior points of a gap of len+1 intervals.
  std::vector<double> r(len);
  for (int i = 0; i < len; ++i) {
    const double t = static_cast<double>(i + 1) / (len + 1);
    r[i] = 0.5 - 0.5 * std::cos(std::numbers::pi * t);
  }
  return r;
}

}  // namespace

EffectiveKernel effective_kernel(const optics::PSFStack& stack,
                                 const MotionHypothesis& v, double v_max) {
  if (v.norm() > v_max)
    throw std::invalid_argument("effective_kernel: |v| exceeds v_max");
  const int side = kernel_support(stack.kernel_size, v_max);
  return assemble_kernel(stack_spectra(stack, side), stack.count, side, v);
}

LinearImage pad_periodic_taper(const LinearImage& img, int pad) {
  if (pad <= 0) return img;
  const int h = img.height, w = img.width, c = img.channels;
  const std::vector<double> ramp = cosine_ramp(2 * pad);
  // Pad columns first, then rows of the widened image.
  LinearImage wide(h, w + 2 * pad, c);
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) wide.at(ch, y, x + pad) = img.at(ch, y, x);
      const double left = img.at(ch, y, 0), right = img.at(ch, y, w - 1);
      // The circular gap runs from the right edge back around to the left.
      for (int g = 0; g < 2 * pad; ++g) {
        const double val = right + (left - right) * ramp[g];
        const int x = g < pad ? w + pad + g : g - pad;
        wide.at(ch, y, x) = val;
      }
    }
  LinearImage out(h + 2 * pad, wide.width, c);
  for (int ch = 0; ch < c; ++ch)
    for (int x = 0; x < wide.width; ++x) {
      for (int y = 0; y < h; ++y) out.at(ch, y + pad, x) = wide.at(ch, y, x);
      const double top = wide.at(ch, 0, x), bottom = wide.at(ch, h - 1, x);
      for (int g = 0; g < 2 * pad; ++g) {
        const double val = bottom + (top - bottom) * ramp[g];
        const int y = g < pad ? h + pad + g : g - pad;
        out.at(ch, y, x) = val;
      }
    }
  return out;
}

namespace {

/// Shared deconvolution core: optional taper pad, per-channel Wiener-style
/// inverse, optional sub-pixel shift, crop back.
LinearImage deconvolve_shift(const LinearImage& B, const EffectiveKernel& K,
                             double epsilon, int taper_px, double dy, double dx) {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (B.channels != 3) throw std::invalid_argument("expected a 3-channel image");
  const LinearImage padded = pad_periodic_taper(B, taper_px);
  const int h = padded.height, w = padded.width;
  LinearImage out(B.height, B.width, 3);
  parallel_for(3, [&](int c) {
    const cvec khat = kernel_spectrum_on(K, c, h, w);
    std::vector<double> plane(padded.plane(c).begin(), padded.plane(c).end());
    cvec bhat = fft2_real(plane, h, w);
    for (size_t i = 0; i < bhat.size(); ++i)
      bhat[i] = std::conj(khat[i]) * bhat[i] / (std::norm(khat[i]) + epsilon);
    if (dy != 0.0 || dx != 0.0) apply_shift_phase(bhat, h, w, dy, dx);
    const std::vector<double> res = ifft2_real(bhat, h, w);
    for (int y = 0; y < B.height; ++y)
      for (int x = 0; x < B.width; ++x)
        out.at(c, y, x) = res[static_cast<size_t>(y + taper_px) * w + (x + taper_px)];
  });
  return out;
}

}  // namespace

LinearImage tikhonov_deconvolve(const LinearImage& B, const EffectiveKernel& K,
                                double epsilon, int taper_px) {
  return deconvolve_shift(B, K, epsilon, taper_px, 0.0, 0.0);
}

double residual_score(const LinearImage& B, const EffectiveKernel& K, double epsilon) {
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  const int h = B.height, w = B.width;
  double score = 0.0;
  for (int c = 0; c < 3; ++c) {
    const cvec khat = kernel_spectrum_on(K, c, h, w);
    std::vector<double> plane(B.plane(c).begin(), B.plane(c).end());
    const cvec bhat = fft2_real(plane, h, w);
    double s = 0.0;
    for (size_t i = 0; i < bhat.size(); ++i)
      s += epsilon * std::norm(bhat[i]) / (std::norm(khat[i]) + epsilon);
    score += s / (static_cast<double>(h) * w);  // unitary DFT scaling
  }
  return score;
}

std::vector<MotionHypothesis> hypothesis_grid(double v_max, double step,
                                              bool horizontal_only) {
  std::vector<MotionHypothesis> grid;
  const int n = static_cast<int>(std::floor(v_max / step));
  for (int iy = horizontal_only ? 0 : -n; iy <= (horizontal_only ? 0 : n); ++iy)
    for (int ix = -n; ix <= n; ++ix)
      grid.push_back({ix * step, iy * step});
  return grid;
}

std::pair<MotionHypothesis, MotionScoreTable> estimate_motion(
    const LinearImage& B, const optics::PSFStack& stack,
    const std::vector<MotionHypothesis>& grid, double epsilon,
    const DecoderOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("estimate_motion: empty grid");
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  // Shared support sized by the largest hypothesis in the grid.
  double v_max = 0.0;
  for (const auto& v : grid) v_max = std::max(v_max, v.norm());
  const int side = kernel_support(stack.kernel_size, v_max);

  const LinearImage padded = pad_periodic_taper(B, opts.taper_px);
  const int h = padded.height, w = padded.width;
  if (side > h || side > w)
    throw std::invalid_argument("estimate_motion: image too small for kernel support");

  // Every per-color kernel is centrally symmetric (radial pupil), so
  // K_{-v} = flip(K_v) per channel and any per-channel magnitude criterion
  // cannot separate +-v; it also degenerates toward the sharpest kernel.
  // Hypotheses are therefore scored by the Gaussian evidence of the
  // channel-coupled model B_c = K_c (*) L + noise (shared luminance L with
  // power s^2, noise power eps*s^2). Per frequency, with k the C^3 kernel
  // vector:
  //   NLL ~ sum_c |B_c|^2 - |<k, B>|^2 / (|k|^2 + eps)
  //         + eps s^2 log(|k|^2 + eps).
  // The coherence term carries the cross-channel phase (the direction cue);
  // the log-determinant term rewards kernels whose spectral nulls match the
  // data, which pins the speed.
  std::vector<cvec> bhat(3);
  double b_energy = 0.0, scene_power = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> plane(padded.plane(c).begin(), padded.plane(c).end());
    double mean = 0.0;
    for (double v : plane) mean += v;
    mean /= static_cast<double>(plane.size());
    for (double v : plane) scene_power += (v - mean) * (v - mean);
    bhat[c] = fft2_real(plane, h, w);
    for (const auto& v : bhat[c]) b_energy += std::norm(v);
  }
  b_energy /= static_cast<double>(h) * w;
  scene_power /= 3.0 * h * w;
  const double log_weight = epsilon * scene_power;
  const std::vector<cvec> spectra = stack_spectra(stack, side);

  MotionScoreTable table;
  table.entries.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()), [&](int gi) {
    const EffectiveKernel K = assemble_kernel(spectra, stack.count, side, grid[gi]);
    cvec khat[3] = {kernel_spectrum_on(K, 0, h, w), kernel_spectrum_on(K, 1, h, w),
                    kernel_spectrum_on(K, 2, h, w)};
    double explained = 0.0, logdet = 0.0;
    for (size_t i = 0; i < khat[0].size(); ++i) {
      std::complex<double> num = 0.0;
      double den = epsilon;
      for (int c = 0; c < 3; ++c) {
        num += std::conj(khat[c][i]) * bhat[c][i];
        den += std::norm(khat[c][i]);
      }
      explained += std::norm(num) / den;
      logdet += std::log(den);
    }
    explained /= static_cast<double>(h) * w;
    // logdet stays a sum over frequencies, like the residual term of the NLL.
    table.entries[gi] = {grid[gi],
                         std::max(0.0, b_energy - explained + log_weight * logdet)};
  });

  const MotionScore* best = &table.entries[0];
  for (const auto& e : table.entries) {
    const auto key = [](const MotionScore& m) {
      return std::make_tuple(m.score, m.velocity.vx * m.velocity.vx +
                                          m.velocity.vy * m.velocity.vy,
                             m.velocity.vx, m.velocity.vy);
    };
    if (key(e) < key(*best)) best = &e;
  }
  return {best->velocity, std::move(table)};
}

LinearImage reconstruct_frame(const LinearImage& B, const optics::PSFStack& stack,
                              const MotionHypothesis& v, double t, double epsilon,
                              const DecoderOptions& opts) {
  if (t < -1.0 || t > 1.0)
    throw std::invalid_argument("reconstruct_frame: t outside [-1, 1]");
  const EffectiveKernel K = effective_kernel(stack, v, v.norm());
  return deconvolve_shift(B, K, epsilon, opts.taper_px, v.vy / 2.0 * t, v.vx / 2.0 * t);
}

VideoResult reconstruct_video(const LinearImage& B, const optics::PSFStack& stack,
                              const std::vector<MotionHypothesis>& grid, int frame_count,
                              double epsilon, const DecoderOptions& opts) {
  if (frame_count < 1) throw std::invalid_argument("frame count must be >= 1");
  VideoResult out;
  auto [v, table] = estimate_motion(B, stack, grid, opts.epsilon_score, opts);
  out.velocity = v;
  out.scores = std::move(table);
  const EffectiveKernel K = effective_kernel(stack, v, v.norm());
  for (int k = 0; k < frame_count; ++k) {
    const double t = frame_count == 1 ? 0.0 : -1.0 + 2.0 * k / (frame_count - 1);
    out.frames.frames.push_back(
        deconvolve_shift(B, K, epsilon, opts.taper_px, v.vy / 2.0 * t, v.vx / 2.0 * t));
  }
  return out;
}

namespace detail {

LinearImage tikhonov_raw(const LinearImage& B, const EffectiveKernel& K, double epsilon) {
  return deconvolve_shift(B, K, epsilon, 0, 0.0, 0.0);
}

LinearImage convolve_periodic(const LinearImage& img, const EffectiveKernel& K) {
  const int h = img.height, w = img.width;
  LinearImage out(h, w, 3);
  for (int c = 0; c < 3; ++c) {
    const cvec khat = kernel_spectrum_on(K, c, h, w);
    std::vector<double> plane(img.plane(c).begin(), img.plane(c).end());
    cvec bhat = fft2_real(plane, h, w);
    for (size_t i = 0; i < bhat.size(); ++i) bhat[i] *= khat[i];
    const std::vector<double> res = ifft2_real(bhat, h, w);
    std::copy(res.begin(), res.end(), out.plane(c).begin());
  }
  return out;
}

}  // namespace detail

}  // namespace codedblur::recon
