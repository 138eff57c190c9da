#include "codedblur/netops.hpp"

#include <cmath>
#include <stdexcept>

namespace codedblur::netops {

std::vector<double> PositionalEncodingConfig::frequencies() const {
  if (num_frequencies <= 0) throw std::invalid_argument("num_frequencies must be positive");
  if (freq_min <= 0.0 || freq_max < freq_min)
    throw std::invalid_argument("need 0 < freq_min <= freq_max");
  std::vector<double> w(num_frequencies);
  if (num_frequencies == 1) {
    w[0] = freq_min;
    return w;
  }
  const double l0 = std::log(freq_min);
  const double l1 = std::log(freq_max);
  for (int j = 0; j < num_frequencies; ++j)
    w[j] = std::exp(l0 + (l1 - l0) * j / (num_frequencies - 1));
  return w;
}

std::vector<double> positional_features(double u, double v,
                                        const PositionalEncodingConfig& cfg) {
  if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0)
    throw std::invalid_argument("positional_features: coordinates must be in [0, 1]");
  const std::vector<double> w = cfg.frequencies();
  std::vector<double> out;
  out.reserve(4 * w.size());
  for (double wj : w) {
    out.push_back(std::cos(wj * u));
    out.push_back(std::sin(wj * u));
    out.push_back(std::cos(wj * v));
    out.push_back(std::sin(wj * v));
  }
  return out;
}

LinearImage adain(const LinearImage& x, std::span<const double> gamma,
                  std::span<const double> beta, double eps) {
  if (eps <= 0.0) throw std::invalid_argument("adain: eps must be positive");
  if (gamma.size() != static_cast<size_t>(x.channels) || beta.size() != gamma.size())
    throw std::invalid_argument("adain: gamma/beta size must match channels");
  LinearImage out = x;
  const double m = static_cast<double>(x.pixel_count());
  for (int c = 0; c < x.channels; ++c) {
    auto plane = out.plane(c);
    double mean = 0.0;
    for (double v : plane) mean += v;
    mean /= m;
    double var = 0.0;
    for (double v : plane) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / m);
    const double scale = gamma[c] / (sd + eps);
    for (double& v : plane) v = scale * (v - mean) + beta[c];
  }
  return out;
}

double smooth_l1(const LinearImage& a, const LinearImage& b, double delta) {
  if (!a.same_shape(b)) throw std::invalid_argument("smooth_l1: shape mismatch");
  if (delta <= 0.0) throw std::invalid_argument("smooth_l1: delta must be positive");
  double acc = 0.0;
  for (size_t i = 0; i < a.data.size(); ++i) {
    const double d = std::abs(a.data[i] - b.data[i]);
    acc += d <= delta ? 0.5 * d * d / delta : d - 0.5 * delta;
  }
  return acc / static_cast<double>(a.data.size());
}

double combine_losses(double l_l1, double l_percep, double l_vid,
                      const std::array<double, 3>& alphas) {
  return alphas[0] * l_l1 + alphas[1] * l_percep + alphas[2] * l_vid;
}

LinearImage time_channel(double t, int height, int width) {
  if (t < -1.0 || t > 1.0)
    throw std::invalid_argument("time_channel: t outside [-1, 1]");
  return LinearImage(height, width, 1, t);
}

}  // namespace codedblur::netops
