#include "codedblur/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "codedblur/fft.hpp"
#include "codedblur/imaging.hpp"
#include "codedblur/io.hpp"
#include "codedblur/rng.hpp"

namespace codedblur::dataset {

TimingSetup TimingSetup::preset(const std::string& label) {
  const auto dash = label.find('-');
  if (dash == std::string::npos)
    throw std::invalid_argument("timing label must look like \"48-8\"");
  TimingSetup t;
  try {
    t.exposure_frames = std::stoi(label.substr(0, dash));
    t.reset_frames = std::stoi(label.substr(dash + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("timing label must look like \"48-8\"");
  }
  t.label = label;
  t.validate();
  return t;
}

void TimingSetup::validate() const {
  if (exposure_frames < 2) throw std::invalid_argument("timing: E must be >= 2");
  if (reset_frames < 0) throw std::invalid_argument("timing: R must be >= 0");
}

std::string SceneManifest::to_json() const {
  nlohmann::ordered_json j;
  j["scene"] = scene;
  j["schedule_sha256"] = schedule_sha256;
  j["sigma"] = sigma;
  j["seed"] = seed;
  j["timing"] = timing;
  j["gt_indices"] = gt_indices;
  j["files"] = files;
  return j.dump(2) + "\n";
}

SceneManifest SceneManifest::from_json_text(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SceneManifest m;
  m.scene = j.at("scene").get<std::string>();
  m.schedule_sha256 = j.at("schedule_sha256").get<std::string>();
  m.sigma = j.at("sigma").get<double>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.timing = j.at("timing").get<std::string>();
  m.gt_indices = j.at("gt_indices").get<std::vector<int>>();
  m.files = j.at("files").get<std::vector<std::string>>();
  return m;
}

FrameSequence ingest_scene(const std::filesystem::path& dir, int min_frames) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error(dir.string() + ": not a directory");
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png")
      paths.push_back(e.path());
  std::sort(paths.begin(), paths.end(),
            [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
  if (static_cast<int>(paths.size()) < min_frames)
    throw std::runtime_error(dir.string() + ": insufficient frames (found " +
                             std::to_string(paths.size()) + ", need " +
                             std::to_string(min_frames) + ")");
  FrameSequence seq;
  seq.frames.reserve(paths.size());
  for (const auto& p : paths) {
    LinearImage gamma = io::read_png(p);  // throws naming the file
    if (!seq.frames.empty() && !gamma.same_shape(seq.frames.front()))
      throw std::runtime_error(p.string() + ": shape mismatch with first frame");
    seq.frames.push_back(imaging::inverse_crf(gamma));
  }
  return seq;
}

std::uint64_t scene_seed(std::uint64_t seed, const std::string& scene_id) {
  return seed ^ fnv1a64(scene_id);
}

std::vector<int> gt_frame_indices(int time_samples) {
  std::vector<int> idx(7);
  for (int k = 0; k < 7; ++k)
    idx[k] = static_cast<int>(std::lround(k * (time_samples - 1) / 6.0));
  return idx;
}

namespace {

void write_sample_files(SceneManifest& manifest, const LinearImage& image,
                        const FrameSequence& gt, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  manifest.files = {"coded.pfm", "coded.png"};
  io::write_pfm(out_dir / "coded.pfm", image);
  io::write_png(out_dir / "coded.png", imaging::crf(image));
  for (size_t k = 0; k < gt.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "gt_%02zu.pfm", k);
    io::write_pfm(out_dir / name, gt.frames[k]);
    manifest.files.emplace_back(name);
  }
  manifest.files.emplace_back("manifest.json");
  io::write_text_file(out_dir / "manifest.json", manifest.to_json());
}

}  // namespace

SampleResult synthesize_sample(const FrameSequence& frames,
                               const optics::PSFStack& stack,
                               const optics::DefocusSchedule& schedule,
                               double sigma, std::uint64_t seed, bool uncoded,
                               const std::string& scene_id,
                               const std::filesystem::path& out_dir) {
  frames.require_uniform();
  if (frames.count() != stack.count)
    throw std::invalid_argument("synthesize_sample: frame count must equal time samples");
  SampleResult out;
  const LinearImage clean = uncoded
                                ? imaging::temporal_mean(frames)
                                : imaging::code_image(frames, stack, imaging::Boundary::Reflect);
  out.image = imaging::add_awgn(clean, sigma, scene_seed(seed, scene_id));
  for (int idx : gt_frame_indices(stack.count)) out.gt.frames.push_back(frames.frames[idx]);

  out.manifest.scene = scene_id;
  out.manifest.schedule_sha256 = io::sha256_hex(io::schedule_text(schedule.psi));
  out.manifest.sigma = sigma;
  out.manifest.seed = seed;
  out.manifest.timing = uncoded ? "single-uncoded" : "single";
  out.manifest.gt_indices = gt_frame_indices(stack.count);
  if (!out_dir.empty()) write_sample_files(out.manifest, out.image, out.gt, out_dir);
  return out;
}

optics::DefocusSchedule resample_schedule(const optics::DefocusSchedule& schedule,
                                          int target_count) {
  schedule.validate();
  if (target_count < 2) throw std::invalid_argument("resample_schedule: need >= 2 samples");
  const int n = schedule.count();
  optics::DefocusSchedule out;
  out.psi_min = schedule.psi_min;
  out.psi_max = schedule.psi_max;
  out.psi.resize(target_count);
  for (int i = 0; i < target_count; ++i) {
    const double t = optics::normalized_time(i, target_count);
    // Position of t on the source time axis.
    const double pos = (t + 1.0) / 2.0 * (n - 1);
    const int lo = std::clamp(static_cast<int>(std::floor(pos)), 0, n - 1);
    const int hi = std::min(lo + 1, n - 1);
    const double frac = pos - lo;
    out.psi[i] = schedule.psi[lo] * (1.0 - frac) + schedule.psi[hi] * frac;
  }
  return out;
}

VfiResult synthesize_vfi(const FrameSequence& frames, const optics::PhaseMask& mask,
                         const optics::OpticalConfig& config,
                         const optics::DefocusSchedule& schedule,
                         const TimingSetup& timing, double sigma, std::uint64_t seed,
                         const std::string& scene_id,
                         const std::filesystem::path& out_dir) {
  frames.require_uniform();
  timing.validate();
  const int cycle = timing.exposure_frames + timing.reset_frames;
  const int cycles = frames.count() / cycle;
  if (cycles < 1)
    throw std::invalid_argument("synthesize_vfi: sequence shorter than one E+R cycle");

  const optics::DefocusSchedule resampled =
      resample_schedule(schedule, timing.exposure_frames);
  optics::OpticalConfig cycle_config = config;
  cycle_config.time_samples = timing.exposure_frames;
  const optics::PSFStack cycle_stack = optics::psf_stack(mask, cycle_config, resampled);

  VfiResult out;
  out.manifest.scene = scene_id;
  out.manifest.schedule_sha256 = io::sha256_hex(io::schedule_text(schedule.psi));
  out.manifest.sigma = sigma;
  out.manifest.seed = seed;
  out.manifest.timing = timing.label;
  const std::vector<int> rel_gt = gt_frame_indices(timing.exposure_frames);

  for (int j = 0; j < cycles; ++j) {
    FrameSequence exposure;
    exposure.frames.assign(frames.frames.begin() + static_cast<size_t>(j) * cycle,
                           frames.frames.begin() + static_cast<size_t>(j) * cycle +
                               timing.exposure_frames);
    LinearImage coded =
        imaging::code_image(exposure, cycle_stack, imaging::Boundary::Reflect);
    coded = imaging::add_awgn(coded, sigma,
                              seed_mix(scene_seed(seed, scene_id), static_cast<std::uint64_t>(j)));
    out.blurred.frames.push_back(std::move(coded));
    for (int r : rel_gt) {
      out.manifest.gt_indices.push_back(j * cycle + r);
      out.gt.frames.push_back(frames.frames[static_cast<size_t>(j) * cycle + r]);
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    for (size_t i = 0; i < out.blurred.frames.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "blurred_%02zu.pfm", i);
      io::write_pfm(out_dir / name, out.blurred.frames[i]);
      out.manifest.files.emplace_back(name);
      std::snprintf(name, sizeof(name), "blurred_%02zu.png", i);
      io::write_png(out_dir / name, imaging::crf(out.blurred.frames[i]));
      out.manifest.files.emplace_back(name);
    }
    for (size_t k = 0; k < out.gt.frames.size(); ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "gt_%02zu.pfm", k);
      io::write_pfm(out_dir / name, out.gt.frames[k]);
      out.manifest.files.emplace_back(name);
    }
    out.manifest.files.emplace_back("manifest.json");
    io::write_text_file(out_dir / "manifest.json", out.manifest.to_json());
  }
  return out;
}

namespace {

/// White noise shaped to a natural-image-like 1/f amplitude spectrum.
std::vector<double> shaped_noise(int height, int width, Rng& rng) {
  cvec spec(static_cast<size_t>(height) * width);
  std::vector<double> noise(spec.size());
  for (auto& v : noise) v = rng.gaussian();
  spec = fft2_real(noise, height, width);
  for (int y = 0; y < height; ++y) {
    const double fy = (y <= height / 2 ? y : y - height) / static_cast<double>(height);
    for (int x = 0; x < width; ++x) {
      const double fx = (x <= width / 2 ? x : x - width) / static_cast<double>(width);
      const double r = std::hypot(fy, fx);
      spec[static_cast<size_t>(y) * width + x] *= 1.0 / (1.0 + std::pow(r / 0.03, 1.7));
    }
  }
  return ifft2_real(spec, height, width);
}

}  // namespace

LinearImage synthetic_texture(int height, int width, std::uint64_t seed) {
  LinearImage img(height, width, 3);
  Rng rng(seed);
  // Channels share most of their structure, as in natural images; the coding's
  // cross-channel motion cues vanish on channel-independent noise.
  const std::vector<double> shared = shaped_noise(height, width, rng);
  for (int c = 0; c < 3; ++c) {
    const std::vector<double> private_c = shaped_noise(height, width, rng);
    auto plane = img.plane(c);
    double lo = 0.0, hi = 0.0;
    std::vector<double> mix(plane.size());
    for (size_t i = 0; i < mix.size(); ++i) {
      mix[i] = 0.8 * shared[i] + 0.2 * private_c[i];
      lo = std::min(lo, mix[i]);
      hi = std::max(hi, mix[i]);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    for (size_t i = 0; i < mix.size(); ++i)
      plane[i] = 0.05 + 0.9 * (mix[i] - lo) / span;
  }
  return img;
}

FrameSequence translating_frames(const LinearImage& base, double vx, double vy,
                                 int count) {
  FrameSequence seq;
  seq.frames.reserve(count);
  for (int n = 0; n < count; ++n) {
    const double t = optics::normalized_time(n, count);
    seq.frames.push_back(imaging::fourier_shift(base, vy / 2.0 * t, vx / 2.0 * t));
  }
  return seq;
}

}  // namespace codedblur::dataset
