#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codedblur/image.hpp"
#include "codedblur/optics.hpp"

namespace codedblur::dataset {

/// Exposure/reset cycle for blurred-video synthesis: E exposure frames are
/// averaged into one blurred frame, then R frames are skipped.
struct TimingSetup {
  int exposure_frames = 48;
  int reset_frames = 8;
  std::string label = "48-8";

  /// Presets "48-8" and "32-16"; any "E-R" string parses.
  static TimingSetup preset(const std::string& label);
  void validate() const;
};

struct SceneManifest {
  std::string scene;
  std::string schedule_sha256;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string timing;  // "single", "single-uncoded", or an E-R label
  std::vector<int> gt_indices;
  std::vector<std::string> files;

  std::string to_json() const;
  static SceneManifest from_json_text(const std::string& text);
};

/// Decodes >= min_frames equally sized PNG frames (lexicographic order),
/// applies the inverse CRF, and returns them in order. Errors name the
/// offending file.
FrameSequence ingest_scene(const std::filesystem::path& dir, int min_frames);

/// Per-scene RNG stream: seed ^ stable-hash(scene id), so per-scene results
/// do not depend on processing order.
std::uint64_t scene_seed(std::uint64_t seed, const std::string& scene_id);

struct SampleResult {
  LinearImage image;  // coded (or uncoded temporal mean) + AWGN, signal space
  FrameSequence gt;   // the seven real frames
  SceneManifest manifest;
};

/// Single-image synthesis: coded (or uncoded) blur over exactly N frames plus
/// AWGN; ground truth at the seven equispaced real-frame indices (8k for
/// N = 49). If out_dir is non-empty, writes coded.pfm, coded.png,
/// gt_00..gt_06.pfm and manifest.json there.
SampleResult synthesize_sample(const FrameSequence& frames,
                               const optics::PSFStack& stack,
                               const optics::DefocusSchedule& schedule,
                               double sigma, std::uint64_t seed, bool uncoded,
                               const std::string& scene_id,
                               const std::filesystem::path& out_dir = {});

/// Linear interpolation of the schedule over normalized time onto
/// target_count samples.
optics::DefocusSchedule resample_schedule(const optics::DefocusSchedule& schedule,
                                          int target_count);

struct VfiResult {
  FrameSequence blurred;  // one coded frame per full E+R cycle
  FrameSequence gt;       // seven equispaced exposure frames per cycle
  SceneManifest manifest;
};

/// Blurred-video synthesis: for each full E+R cycle the E exposure frames are
/// coded with the schedule resampled to E samples and averaged; R reset frames
/// are skipped; AWGN per blurred frame.
VfiResult synthesize_vfi(const FrameSequence& frames, const optics::PhaseMask& mask,
                         const optics::OpticalConfig& config,
                         const optics::DefocusSchedule& schedule,
                         const TimingSetup& timing, double sigma, std::uint64_t seed,
                         const std::string& scene_id,
                         const std::filesystem::path& out_dir = {});

/// Indices of the seven real frames for an N-sample exposure (n = 8k at N=49).
std::vector<int> gt_frame_indices(int time_samples);

/// Smooth random RGB texture in [0.05, 0.95] (low-pass filtered noise),
/// deterministic in the seed.
LinearImage synthetic_texture(int height, int width, std::uint64_t seed);

/// count frames of the base image translating with total displacement
/// (vx, vy) over the exposure (periodic sub-pixel shifts).
FrameSequence translating_frames(const LinearImage& base, double vx, double vy,
                                 int count);

}  // namespace codedblur::dataset
