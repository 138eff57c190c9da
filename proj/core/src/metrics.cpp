#include "codedblur/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "codedblur/dataset.hpp"
#include "codedblur/imaging.hpp"
#include "codedblur/parallel.hpp"
#include "codedblur/rng.hpp"

namespace codedblur::metrics {

double psnr(const LinearImage& a, const LinearImage& b, double peak) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: shape mismatch");
  if (peak <= 0.0) throw std::invalid_argument("psnr: peak must be positive");
  double mse = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

std::vector<double> gaussian_window(int len, double sigma) {
  std::vector<double> w(len);
  const double mid = (len - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < len; ++i) {
    w[i] = std::exp(-0.5 * (i - mid) * (i - mid) / (sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Horizontal then vertical valid-mode filtering.
std::vector<double> filter_valid_2d(const std::vector<double>& in, int h, int w,
                                    const std::vector<double>& win) {
  const int k = static_cast<int>(win.size());
  const int wv = w - k + 1;
  std::vector<double> tmp(static_cast<size_t>(h) * wv);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < wv; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += win[i] * in[static_cast<size_t>(y) * w + x + i];
      tmp[static_cast<size_t>(y) * wv + x] = s;
    }
  const int hv = h - k + 1;
  std::vector<double> out(static_cast<size_t>(hv) * wv);
  for (int y = 0; y < hv; ++y)
    for (int x = 0; x < wv; ++x) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += win[i] * tmp[static_cast<size_t>(y + i) * wv + x];
      out[static_cast<size_t>(y) * wv + x] = s;
    }
  return out;
}

constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2 at dynamic range 1
constexpr double kC2 = 0.03 * 0.03;

double ssim_from_moments(const std::vector<double>& ma, const std::vector<double>& mb,
                         const std::vector<double>& maa, const std::vector<double>& mbb,
                         const std::vector<double>& mab) {
  double acc = 0.0;
  for (size_t i = 0; i < ma.size(); ++i) {
    const double va = maa[i] - ma[i] * ma[i];
    const double vb = mbb[i] - mb[i] * mb[i];
    const double cab = mab[i] - ma[i] * mb[i];
    acc += (2.0 * ma[i] * mb[i] + kC1) * (2.0 * cab + kC2) /
           ((ma[i] * ma[i] + mb[i] * mb[i] + kC1) * (va + vb + kC2));
  }
  return acc / static_cast<double>(ma.size());
}

}  // namespace

double ssim(const LinearImage& a, const LinearImage& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  constexpr int kWin = 11;
  if (a.height < kWin || a.width < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");
  const std::vector<double> win = gaussian_window(kWin, 1.5);
  double total = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    const auto pa = a.plane(c);
    const auto pb = b.plane(c);
    const size_t n = pa.size();
    std::vector<double> xa(pa.begin(), pa.end()), xb(pb.begin(), pb.end());
    std::vector<double> xaa(n), xbb(n), xab(n);
    for (size_t i = 0; i < n; ++i) {
      xaa[i] = xa[i] * xa[i];
      xbb[i] = xb[i] * xb[i];
      xab[i] = xa[i] * xb[i];
    }
    total += ssim_from_moments(filter_valid_2d(xa, a.height, a.width, win),
                               filter_valid_2d(xb, a.height, a.width, win),
                               filter_valid_2d(xaa, a.height, a.width, win),
                               filter_valid_2d(xbb, a.height, a.width, win),
                               filter_valid_2d(xab, a.height, a.width, win));
  }
  return total / a.channels;
}

namespace {

/// Valid-mode separable filtering over a (T, H, W) volume: spatial passes per
/// frame, then the temporal pass.
std::vector<double> filter_valid_3d(const std::vector<double>& in, int t, int h, int w,
                                    const std::vector<double>& twin,
                                    const std::vector<double>& swin) {
  const int hv = h - static_cast<int>(swin.size()) + 1;
  const int wv = w - static_cast<int>(swin.size()) + 1;
  const int tv = t - static_cast<int>(twin.size()) + 1;
  std::vector<double> spatial(static_cast<size_t>(t) * hv * wv);
  for (int f = 0; f < t; ++f) {
    const std::vector<double> frame(in.begin() + static_cast<size_t>(f) * h * w,
                                    in.begin() + static_cast<size_t>(f + 1) * h * w);
    const std::vector<double> filtered = filter_valid_2d(frame, h, w, swin);
    std::copy(filtered.begin(), filtered.end(),
              spatial.begin() + static_cast<size_t>(f) * hv * wv);
  }
  std::vector<double> out(static_cast<size_t>(tv) * hv * wv);
  const size_t frame_sz = static_cast<size_t>(hv) * wv;
  for (int f = 0; f < tv; ++f)
    for (size_t p = 0; p < frame_sz; ++p) {
      double s = 0.0;
      for (size_t i = 0; i < twin.size(); ++i)
        s += twin[i] * spatial[(f + i) * frame_sz + p];
      out[f * frame_sz + p] = s;
    }
  return out;
}

}  // namespace

double ssim3d(const FrameSequence& a, const FrameSequence& b) {
  a.require_uniform();
  b.require_uniform();
  if (a.count() != b.count() || !a.frames[0].same_shape(b.frames[0]))
    throw std::invalid_argument("ssim3d: shape mismatch");
  constexpr int kTWin = 7, kSWin = 11;
  const int t = a.count(), h = a.frames[0].height, w = a.frames[0].width;
  if (t < kTWin) throw std::invalid_argument("ssim3d: sequence shorter than the temporal window");
  if (h < kSWin || w < kSWin)
    throw std::invalid_argument("ssim3d: frames smaller than the 11x11 window");
  const std::vector<double> twin = gaussian_window(kTWin, 1.0);
  const std::vector<double> swin = gaussian_window(kSWin, 1.5);
  const int channels = a.frames[0].channels;
  double total = 0.0;
  for (int c = 0; c < channels; ++c) {
    const size_t n = static_cast<size_t>(t) * h * w;
    std::vector<double> xa(n), xb(n), xaa(n), xbb(n), xab(n);
    for (int f = 0; f < t; ++f) {
      const auto pa = a.frames[f].plane(c);
      const auto pb = b.frames[f].plane(c);
      for (size_t i = 0; i < pa.size(); ++i) {
        const size_t o = static_cast<size_t>(f) * h * w + i;
        xa[o] = pa[i];
        xb[o] = pb[i];
        xaa[o] = pa[i] * pa[i];
        xbb[o] = pb[i] * pb[i];
        xab[o] = pa[i] * pb[i];
      }
    }
    total += ssim_from_moments(filter_valid_3d(xa, t, h, w, twin, swin),
                               filter_valid_3d(xb, t, h, w, twin, swin),
                               filter_valid_3d(xaa, t, h, w, twin, swin),
                               filter_valid_3d(xbb, t, h, w, twin, swin),
                               filter_valid_3d(xab, t, h, w, twin, swin));
  }
  return total / channels;
}

double vid_aggregate(double l1, double l2, double l3) {
  for (double l : {l1, l2, l3})
    if (l <= 0.0) throw std::invalid_argument("vid_aggregate: losses must be positive");
  return (-10.0 * std::log10(l1) - 10.0 * std::log10(l2) - 10.0 * std::log10(l3)) / 3.0;
}

double direction_accuracy(std::span<const VelocityPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("direction_accuracy: empty list");
  int correct = 0;
  for (const auto& p : pairs) {
    const double dot = p.estimated.vx * p.truth.vx + p.estimated.vy * p.truth.vy;
    if (dot > 0.0) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

void SweepSpec::validate() const {
  if (sigmas.empty()) throw std::invalid_argument("sweep: sigma list is empty");
  for (double s : sigmas)
    if (s < 0.0) throw std::invalid_argument("sweep: sigmas must be >= 0");
  for (double r : exposure_ratios)
    if (r <= 0.0) throw std::invalid_argument("sweep: ratios must be positive");
  if (exposure_ratios.empty()) throw std::invalid_argument("sweep: ratio list is empty");
  if (scenes.empty()) throw std::invalid_argument("sweep: scene list is empty");
}

std::vector<SweepRow> noise_sweep(const SweepSpec& spec, const optics::PSFStack& stack,
                                  const recon::DecoderOptions& decoder) {
  spec.validate();
  std::vector<SweepRow> rows;
  const std::vector<int> gt_idx = dataset::gt_frame_indices(stack.count);
  for (size_t si = 0; si < spec.sigmas.size(); ++si) {
    for (size_t ri = 0; ri < spec.exposure_ratios.size(); ++ri) {
      const double sigma_eff =
          imaging::scale_noise_for_exposure(spec.sigmas[si], spec.exposure_ratios[ri]);
      struct SceneScore {
        double psnr_sum = 0.0, ssim_sum = 0.0;
        VelocityPair pair;
      };
      std::vector<SceneScore> scores(spec.scenes.size());
      parallel_for(static_cast<int>(spec.scenes.size()), [&](int sc) {
        const SweepScene& scene = spec.scenes[sc];
        const FrameSequence frames = dataset::translating_frames(
            scene.base, scene.velocity.vx, scene.velocity.vy, stack.count);
        LinearImage B = spec.coding == SweepCoding::Coded
                            ? imaging::code_image(frames, stack, imaging::Boundary::Periodic)
                            : imaging::temporal_mean(frames);
        const std::uint64_t seed = seed_mix(
            seed_mix(spec.seed, fnv1a64(scene.id)),
            (static_cast<std::uint64_t>(si) << 32) | static_cast<std::uint64_t>(ri));
        B = imaging::add_awgn(B, sigma_eff, seed);

        recon::MotionHypothesis vhat{0.0, 0.0};
        FrameSequence recon_frames;
        if (spec.decoder == SweepDecoder::Identity) {
          for (size_t k = 0; k < gt_idx.size(); ++k) recon_frames.frames.push_back(B);
        } else {
          const auto grid = recon::hypothesis_grid(decoder.v_max, spec.grid_step,
                                                   spec.horizontal_grid);
          vhat = recon::estimate_motion(B, stack, grid, decoder.epsilon_score, decoder).first;
          for (int k = 0; k < 7; ++k) {
            const double t = -1.0 + 2.0 * k / 6.0;
            recon_frames.frames.push_back(recon::reconstruct_frame(
                B, stack, vhat, t, decoder.epsilon_deconv, decoder));
          }
        }
        SceneScore& s = scores[sc];
        for (size_t k = 0; k < gt_idx.size(); ++k) {
          s.psnr_sum += psnr(recon_frames.frames[k], frames.frames[gt_idx[k]]);
          s.ssim_sum += ssim(recon_frames.frames[k], frames.frames[gt_idx[k]]);
        }
        s.pair = {vhat, scene.velocity};
      });

      SweepRow row;
      row.sigma = spec.sigmas[si];
      row.exposure_ratio = spec.exposure_ratios[ri];
      std::vector<VelocityPair> pairs;
      for (const auto& s : scores) {
        row.psnr_mean += s.psnr_sum / 7.0;
        row.ssim_mean += s.ssim_sum / 7.0;
        pairs.push_back(s.pair);
      }
      row.psnr_mean /= static_cast<double>(scores.size());
      row.ssim_mean /= static_cast<double>(scores.size());
      row.dir_acc = direction_accuracy(pairs);
      rows.push_back(row);
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "sigma,exposure_ratio,psnr_mean,ssim_mean,dir_acc\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", r.sigma,
                  r.exposure_ratio, r.psnr_mean, r.ssim_mean, r.dir_acc);
    os << buf;
  }
  return os.str();
}

}  // namespace codedblur::metrics
