#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace codedblur {

/// Signal-space (linear) image. Values are nominally in [0,1] but are not
/// clamped; clamping happens only at 8-bit export. Storage is planar:
/// data[(c*height + y)*width + x].
struct LinearImage {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  LinearImage() = default;
  LinearImage(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c),
        data(static_cast<size_t>(h) * w * c, fill) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<size_t>(c) * height + y) * width + x];
  }

  std::span<double> plane(int c) {
    return {data.data() + static_cast<size_t>(c) * height * width,
            static_cast<size_t>(height) * width};
  }
  std::span<const double> plane(int c) const {
    return {data.data() + static_cast<size_t>(c) * height * width,
            static_cast<size_t>(height) * width};
  }

  bool same_shape(const LinearImage& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  size_t pixel_count() const { return static_cast<size_t>(height) * width; }
  bool all_finite() const;
};

struct FrameSequence {
  std::vector<LinearImage> frames;

  int count() const { return static_cast<int>(frames.size()); }
  bool empty() const { return frames.empty(); }
  /// Throws std::invalid_argument unless non-empty with equal shapes.
  void require_uniform() const;
};

double image_mean(const LinearImage& img);
double max_abs_diff(const LinearImage& a, const LinearImage& b);
/// ||a - b||_2 / ||b||_2.
double relative_l2(const LinearImage& a, const LinearImage& b);

}  // namespace codedblur
