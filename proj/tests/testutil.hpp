#pragma once

#include <cmath>
#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <string>
#include <vector>

#include "codedblur/dataset.hpp"
#include "codedblur/image.hpp"
#include "codedblur/imaging.hpp"
#include "codedblur/optics.hpp"

namespace testutil {

using namespace codedblur;

/// Reduced sampling for fast unit tests; invariants hold at any grid size.
inline optics::OpticalConfig small_config(int time_samples = 5) {
  optics::OpticalConfig cfg;
  cfg.pupil_grid = 128;
  cfg.kernel_size = 21;
  cfg.time_samples = time_samples;
  return cfg;
}

inline optics::OpticalConfig default_config() { return {}; }

/// Unique scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("codedblur_test_" + tag + "_" + std::to_string(counter++) + "_" +
             std::to_string(static_cast<unsigned>(::getpid())));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Mirror about the canvas center index (h/2, w/2), wrapping circularly.
inline LinearImage flip_about_center(const LinearImage& img) {
  LinearImage out(img.height, img.width, img.channels);
  const int cy = 2 * (img.height / 2), cx = 2 * (img.width / 2);
  for (int c = 0; c < img.channels; ++c)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x)
        out.at(c, ((cy - y) % img.height + img.height) % img.height,
               ((cx - x) % img.width + img.width) % img.width) = img.at(c, y, x);
  return out;
}

/// Squared-intensity marginal centroid along x for one channel.
inline double energy_centroid_x(const LinearImage& img, int c) {
  double num = 0.0, den = 0.0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double e = img.at(c, y, x) * img.at(c, y, x);
      num += x * e;
      den += e;
    }
  return num / den;
}

inline bool files_identical(const std::filesystem::path& a,
                            const std::filesystem::path& b) {
  namespace fs = std::filesystem;
  if (!fs::exists(a) || !fs::exists(b) || fs::file_size(a) != fs::file_size(b))
    return false;
  std::string ca, cb;
  {
    FILE* f = std::fopen(a.string().c_str(), "rb");
    char buf[4096];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) ca.append(buf, n);
    std::fclose(f);
    f = std::fopen(b.string().c_str(), "rb");
    while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) cb.append(buf, n);
    std::fclose(f);
  }
  return ca == cb;
}

}  // namespace testutil
