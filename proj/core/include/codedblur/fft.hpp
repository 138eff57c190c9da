#pragma once

#include <complex>
#include <vector>

namespace codedblur {

using cvec = std::vector<std::complex<double>>;

/// Forward 2-D DFT (unnormalized, row-major rows x cols).
cvec fft2(const cvec& in, int rows, int cols);

/// Inverse 2-D DFT, normalized by 1/(rows*cols) so ifft2(fft2(x)) == x.
cvec ifft2(const cvec& in, int rows, int cols);

cvec fft2_real(const std::vector<double>& in, int rows, int cols);

/// Real part of the normalized inverse DFT.
std::vector<double> ifft2_real(const cvec& in, int rows, int cols);

/// Circular shift by (rows/2, cols/2): moves the DC bin to the grid center.
template <typename T>
std::vector<T> fftshift2(const std::vector<T>& in, int rows, int cols) {
  std::vector<T> out(in.size());
  const int r2 = rows / 2, c2 = cols / 2;
  for (int y = 0; y < rows; ++y) {
    const int ys = (y + r2) % rows;
    for (int x = 0; x < cols; ++x) {
      out[static_cast<size_t>(ys) * cols + (x + c2) % cols] =
          in[static_cast<size_t>(y) * cols + x];
    }
  }
  return out;
}

/// Multiplies a spectrum in place by the linear phase that translates the
/// spatial signal by (dy, dx) pixels (sub-pixel shifts allowed).
void apply_shift_phase(cvec& spec, int rows, int cols, double dy, double dx);

/// Embeds a k x k tile with its center at the DFT origin (wrapping negative
/// offsets), accumulating into a rows x cols buffer.
void embed_centered_at_origin(const double* tile, int k,
                              std::vector<double>& dst, int rows, int cols);

}  // namespace codedblur
