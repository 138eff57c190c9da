#pragma once

#include <array>
#include <span>
#include <vector>

#include "codedblur/image.hpp"

namespace codedblur::netops {

/// Log-linearly spaced frequencies; each contributes four sinusoid features
/// per pixel coordinate pair, so the feature count is 4 * num_frequencies.
struct PositionalEncodingConfig {
  int num_frequencies = 5;
  double freq_min = 1.0;
  double freq_max = 20.0;

  std::vector<double> frequencies() const;
};

/// [cos(w_j u), sin(w_j u), cos(w_j v), sin(w_j v)] concatenated over j,
/// for normalized pixel coordinates u, v in [0, 1].
std::vector<double> positional_features(double u, double v,
                                        const PositionalEncodingConfig& cfg = {});

/// Per channel: gamma_c * (x_c - mean(x_c)) / (std(x_c) + eps) + beta_c, with
/// statistics over the spatial dimensions.
LinearImage adain(const LinearImage& x, std::span<const double> gamma,
                  std::span<const double> beta, double eps = 1e-5);

/// Mean elementwise Huber distance: 0.5 d^2/delta for |d| <= delta, else
/// |d| - 0.5 delta.
double smooth_l1(const LinearImage& a, const LinearImage& b, double delta = 1.0);

double combine_losses(double l_l1, double l_percep, double l_vid,
                      const std::array<double, 3>& alphas = {1.0, 0.1, 0.1});

/// Constant single-channel image of value t, t in [-1, 1].
LinearImage time_channel(double t, int height, int width);

}  // namespace codedblur::netops
