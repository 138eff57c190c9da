#include "codedblur/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace codedblur {

namespace {

// FFTW plan creation is not thread safe; executing a plan on fresh buffers is.
// Plans are cached per (rows, cols, sign) and created with FFTW_ESTIMATE so the
// algorithm choice (and therefore rounding) is reproducible across runs.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan get_plan(int rows, int cols, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_tuple(rows, cols, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  fftw_complex* scratch_in = fftw_alloc_complex(static_cast<size_t>(rows) * cols);
  fftw_complex* scratch_out = fftw_alloc_complex(static_cast<size_t>(rows) * cols);
  fftw_plan p = fftw_plan_dft_2d(rows, cols, scratch_in, scratch_out, sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch_in);
  fftw_free(scratch_out);
  if (!p) throw std::runtime_error("fftw plan creation failed");
  cache.emplace(key, p);
  return p;
}

cvec execute(const cvec& in, int rows, int cols, int sign) {
  if (in.size() != static_cast<size_t>(rows) * cols)
    throw std::invalid_argument("fft2: buffer size does not match rows*cols");
  fftw_plan p = get_plan(rows, cols, sign);
  cvec out(in.size());
  // std::complex<double> is layout-compatible with fftw_complex.
  fftw_execute_dft(p,
                   reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in.data())),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

cvec fft2(const cvec& in, int rows, int cols) {
  return execute(in, rows, cols, FFTW_FORWARD);
}

cvec ifft2(const cvec& in, int rows, int cols) {
  cvec out = execute(in, rows, cols, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(rows) * cols);
  for (auto& v : out) v *= scale;
  return out;
}

cvec fft2_real(const std::vector<double>& in, int rows, int cols) {
  cvec tmp(in.size());
  for (size_t i = 0; i < in.size(); ++i) tmp[i] = in[i];
  return fft2(tmp, rows, cols);
}

std::vector<double> ifft2_real(const cvec& in, int rows, int cols) {
  cvec out = ifft2(in, rows, cols);
  std::vector<double> re(out.size());
  for (size_t i = 0; i < out.size(); ++i) re[i] = out[i].real();
  return re;
}

void apply_shift_phase(cvec& spec, int rows, int cols, double dy, double dx) {
  if (dy == 0.0 && dx == 0.0) return;
  const double tau = 2.0 * std::numbers::pi;
  std::vector<std::complex<double>> py(rows), px(cols);
  for (int y = 0; y < rows; ++y) {
    const double fy = (y <= rows / 2 ? y : y - rows) / static_cast<double>(rows);
    py[y] = std::polar(1.0, -tau * fy * dy);
  }
  for (int x = 0; x < cols; ++x) {
    const double fx = (x <= cols / 2 ? x : x - cols) / static_cast<double>(cols);
    px[x] = std::polar(1.0, -tau * fx * dx);
  }
  for (int y = 0; y < rows; ++y) {
    const std::complex<double> ry = py[y];
    std::complex<double>* row = spec.data() + static_cast<size_t>(y) * cols;
    for (int x = 0; x < cols; ++x) row[x] *= ry * px[x];
  }
}

void embed_centered_at_origin(const double* tile, int k,
                              std::vector<double>& dst, int rows, int cols) {
  const int half = k / 2;
  for (int y = 0; y < k; ++y) {
    const int yy = ((y - half) % rows + rows) % rows;
    for (int x = 0; x < k; ++x) {
      const int xx = ((x - half) % cols + cols) % cols;
      dst[static_cast<size_t>(yy) * cols + xx] += tile[static_cast<size_t>(y) * k + x];
    }
  }
}

}  // namespace codedblur
