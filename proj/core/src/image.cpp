#include "codedblur/image.hpp"

#include <cmath>
#include <stdexcept>

namespace codedblur {

bool LinearImage::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void FrameSequence::require_uniform() const {
  if (frames.empty()) throw std::invalid_argument("frame sequence is empty");
  for (size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_shape(frames[0]))
      throw std::invalid_argument("frame sequence shape mismatch at frame " +
                                  std::to_string(i));
  }
}

double image_mean(const LinearImage& img) {
  if (img.data.empty()) return 0.0;
  double s = 0.0;
  for (double v : img.data) s += v;
  return s / static_cast<double>(img.data.size());
}

double max_abs_diff(const LinearImage& a, const LinearImage& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double relative_l2(const LinearImage& a, const LinearImage& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("relative_l2: shape mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    num += d * d;
    den += b.data[i] * b.data[i];
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : INFINITY;
  return std::sqrt(num / den);
}

}  // namespace codedblur
