#include "codedblur/imaging.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "codedblur/fft.hpp"
#include "codedblur/parallel.hpp"
#include "codedblur/rng.hpp"

namespace codedblur::imaging {

namespace {
constexpr double kGamma = 2.2;

int reflect_index(int i, int n) {
  // Symmetric reflection with edge repeat: -1 -> 0, n -> n-1.
  while (i < 0 || i >= n) {
    if (i < 0) i = -1 - i;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}
}  // namespace

LinearImage inverse_crf(const LinearImage& img) {
  LinearImage out = img;
  size_t clamped = 0;
  for (double& v : out.data) {
    if (v < 0.0 || v > 1.0) {
      ++clamped;
      v = v < 0.0 ? 0.0 : 1.0;
    }
    v = std::pow(v, kGamma);
  }
  if (clamped > 0)
    std::fprintf(stderr, "inverse_crf: clamped %zu out-of-range value(s) to [0,1]\n", clamped);
  return out;
}

LinearImage crf(const LinearImage& img) {
  LinearImage out = img;
  for (double& v : out.data) v = v <= 0.0 ? 0.0 : std::pow(v, 1.0 / kGamma);
  return out;
}

LinearImage temporal_mean(const FrameSequence& frames) {
  frames.require_uniform();
  // Accumulate deviations from frame 0: identical frames average to frame 0
  // bitwise, and clustered data loses no precision.
  LinearImage out = frames.frames[0];
  std::vector<double> acc(out.data.size(), 0.0);
  for (size_t f = 1; f < frames.frames.size(); ++f) {
    const auto& src = frames.frames[f].data;
    for (size_t i = 0; i < acc.size(); ++i) acc[i] += src[i] - out.data[i];
  }
  const double inv = 1.0 / frames.count();
  for (size_t i = 0; i < acc.size(); ++i) out.data[i] += acc[i] * inv;
  return out;
}

namespace {

/// Per-channel circular convolution of all frames with their kernels,
/// accumulated in the frequency domain (deterministic order in n).
LinearImage code_periodic(const FrameSequence& frames, const optics::PSFStack& stack,
                          int h, int w) {
  LinearImage out(h, w, 3);
  parallel_for(3, [&](int c) {
    std::vector<double> embed(static_cast<size_t>(h) * w);
    cvec acc(static_cast<size_t>(h) * w, 0.0);
    for (int n = 0; n < stack.count; ++n) {
      std::fill(embed.begin(), embed.end(), 0.0);
      embed_centered_at_origin(stack.kernel(n, c).data(), stack.kernel_size, embed, h, w);
      const cvec khat = fft2_real(embed, h, w);
      std::vector<double> plane(frames.frames[n].plane(c).begin(),
                                frames.frames[n].plane(c).end());
      const cvec fhat = fft2_real(plane, h, w);
      for (size_t i = 0; i < acc.size(); ++i) acc[i] += fhat[i] * khat[i];
    }
    const double inv = 1.0 / stack.count;
    for (auto& v : acc) v *= inv;
    const std::vector<double> res = ifft2_real(acc, h, w);
    std::copy(res.begin(), res.end(), out.plane(c).begin());
  });
  return out;
}

}  // namespace

LinearImage code_image(const FrameSequence& frames, const optics::PSFStack& stack,
                       Boundary boundary) {
  frames.require_uniform();
  if (frames.count() != stack.count)
    throw std::invalid_argument("code_image: frame count does not match stack");
  if (frames.frames[0].channels != 3)
    throw std::invalid_argument("code_image: frames must have 3 channels");
  const int h = frames.frames[0].height, w = frames.frames[0].width;

  if (boundary == Boundary::Periodic) return code_periodic(frames, stack, h, w);

  // Reflect: pad every frame by the kernel half-width, convolve circularly on
  // the padded grid, crop back.
  const int p = stack.kernel_size / 2;
  const int hp = h + 2 * p, wp = w + 2 * p;
  FrameSequence padded;
  padded.frames.reserve(frames.frames.size());
  for (const auto& f : frames.frames) {
    LinearImage pf(hp, wp, 3);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < hp; ++y) {
        const int sy = reflect_index(y - p, h);
        for (int x = 0; x < wp; ++x)
          pf.at(c, y, x) = f.at(c, sy, reflect_index(x - p, w));
      }
    padded.frames.push_back(std::move(pf));
  }
  const LinearImage big = code_periodic(padded, stack, hp, wp);
  LinearImage out(h, w, 3);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(c, y, x) = big.at(c, y + p, x + p);
  return out;
}

LinearImage point_trace(const optics::PSFStack& stack, double velocity_x,
                        double velocity_y, ShiftMode mode) {
  const double vnorm = std::hypot(velocity_x, velocity_y);
  const int side = stack.kernel_size + static_cast<int>(std::ceil(vnorm)) + 8;
  LinearImage out(side, side, 3);
  parallel_for(3, [&](int c) {
    std::vector<double> embed(static_cast<size_t>(side) * side);
    if (mode == ShiftMode::Fourier) {
      cvec acc(embed.size(), 0.0);
      for (int n = 0; n < stack.count; ++n) {
        const double t = optics::normalized_time(n, stack.count);
        std::fill(embed.begin(), embed.end(), 0.0);
        embed_centered_at_origin(stack.kernel(n, c).data(), stack.kernel_size,
                                 embed, side, side);
        cvec khat = fft2_real(embed, side, side);
        apply_shift_phase(khat, side, side, velocity_y / 2.0 * t, velocity_x / 2.0 * t);
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += khat[i];
      }
      const double inv = 1.0 / stack.count;
      for (auto& v : acc) v *= inv;
      // Move the trace center from the DFT origin to the canvas center.
      std::vector<double> res = ifft2_real(acc, side, side);
      res = fftshift2(res, side, side);
      std::copy(res.begin(), res.end(), out.plane(c).begin());
    } else {
      std::fill(embed.begin(), embed.end(), 0.0);
      const int k = stack.kernel_size, kh = k / 2, mid = side / 2;
      for (int n = 0; n < stack.count; ++n) {
        const double t = optics::normalized_time(n, stack.count);
        const int dy = static_cast<int>(std::lround(velocity_y / 2.0 * t));
        const int dx = static_cast<int>(std::lround(velocity_x / 2.0 * t));
        auto kern = stack.kernel(n, c);
        for (int y = 0; y < k; ++y) {
          const int yy = (((mid + dy + y - kh) % side) + side) % side;
          for (int x = 0; x < k; ++x) {
            const int xx = (((mid + dx + x - kh) % side) + side) % side;
            embed[static_cast<size_t>(yy) * side + xx] += kern[static_cast<size_t>(y) * k + x];
          }
        }
      }
      const double inv = 1.0 / stack.count;
      for (size_t i = 0; i < embed.size(); ++i) out.plane(c)[i] = embed[i] * inv;
    }
  });
  return out;
}

LinearImage add_awgn(const LinearImage& img, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw std::invalid_argument("add_awgn: sigma must be >= 0");
  if (sigma == 0.0) return img;
  LinearImage out = img;
  Rng rng(seed);
  for (double& v : out.data) v += sigma * rng.gaussian();
  return out;
}

double scale_noise_for_exposure(double sigma_base, double exposure_ratio) {
  if (exposure_ratio <= 0.0)
    throw std::invalid_argument("scale_noise_for_exposure: ratio must be positive");
  return sigma_base / exposure_ratio;
}

LinearImage fourier_shift(const LinearImage& img, double dy, double dx) {
  if (dy == 0.0 && dx == 0.0) return img;
  LinearImage out(img.height, img.width, img.channels);
  for (int c = 0; c < img.channels; ++c) {
    std::vector<double> plane(img.plane(c).begin(), img.plane(c).end());
    cvec hat = fft2_real(plane, img.height, img.width);
    apply_shift_phase(hat, img.height, img.width, dy, dx);
    const std::vector<double> res = ifft2_real(hat, img.height, img.width);
    std::copy(res.begin(), res.end(), out.plane(c).begin());
  }
  return out;
}

}  // namespace codedblur::imaging
