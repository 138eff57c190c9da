#include "codedblur/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "codedblur/parallel.hpp"

namespace codedblur::optics {

void OpticalConfig::validate() const {
  if (aperture_radius_mm <= 0.0) throw std::invalid_argument("aperture radius must be positive");
  for (double w : wavelengths_nm)
    if (w <= 0.0) throw std::invalid_argument("wavelengths must be positive");
  if (reference_wavelength_nm <= 0.0)
    throw std::invalid_argument("reference wavelength must be positive");
  if (focal_length_mm <= 0.0) throw std::invalid_argument("focal length must be positive");
  if (pixel_pitch_um <= 0.0) throw std::invalid_argument("pixel pitch must be positive");
  if (pupil_grid <= 0) throw std::invalid_argument("pupil_grid must be positive");
  if (kernel_size <= 0 || kernel_size % 2 == 0)
    throw std::invalid_argument("kernel_size must be odd and positive");
  if (kernel_size > pupil_grid)
    throw std::invalid_argument("kernel_size must not exceed pupil_grid");
  if (time_samples < 2) throw std::invalid_argument("time_samples must be >= 2");
  if (exposure_s <= 0.0) throw std::invalid_argument("exposure must be positive");
}

PhaseMask PhaseMask::two_ring_default() {
  // Normalized from r = [0.633, 0.92] mm and [0.92, 1.15] mm over R = 1.15 mm.
  PhaseMask m;
  m.rings = {{0.633 / 1.15, 0.92 / 1.15, 6.5}, {0.92 / 1.15, 1.0, 13.2}};
  return m;
}

void PhaseMask::validate() const {
  auto sorted = rings;
  std::sort(sorted.begin(), sorted.end(),
            [](const PhaseRing& a, const PhaseRing& b) {
              return a.inner_radius_norm < b.inner_radius_norm;
            });
  double prev_outer = 0.0;
  for (const PhaseRing& r : sorted) {
    if (r.inner_radius_norm < 0.0 || r.outer_radius_norm > 1.0 ||
        r.inner_radius_norm >= r.outer_radius_norm)
      throw std::invalid_argument("phase ring radii must satisfy 0 <= inner < outer <= 1");
    if (r.inner_radius_norm < prev_outer)
      throw std::invalid_argument("phase rings must be disjoint");
    prev_outer = r.outer_radius_norm;
  }
}

double PhaseMask::phase_at(double rho, double wavelength_scale) const {
  for (const PhaseRing& r : rings) {
    if (rho >= r.inner_radius_norm && rho < r.outer_radius_norm)
      return r.phase_rad_at_reference * wavelength_scale;
  }
  return 0.0;
}

DefocusSchedule DefocusSchedule::linear(int count, double first, double last,
                                        double lo, double hi) {
  DefocusSchedule s;
  s.psi_min = lo;
  s.psi_max = hi;
  s.psi.resize(count);
  for (int n = 0; n < count; ++n) {
    const double a = count > 1 ? static_cast<double>(n) / (count - 1) : 0.0;
    s.psi[n] = first + (last - first) * a;
  }
  return s;
}

DefocusSchedule DefocusSchedule::constant(int count, double value, double lo, double hi) {
  DefocusSchedule s;
  s.psi_min = lo;
  s.psi_max = hi;
  s.psi.assign(count, value);
  return s;
}

DefocusSchedule DefocusSchedule::reversed() const {
  DefocusSchedule s = *this;
  std::reverse(s.psi.begin(), s.psi.end());
  return s;
}

void DefocusSchedule::validate() const {
  if (psi.empty()) throw std::invalid_argument("schedule is empty");
  if (psi_min > psi_max) throw std::invalid_argument("schedule bounds inverted");
  for (double v : psi)
    if (v < psi_min || v > psi_max)
      throw std::invalid_argument("schedule value outside [psi_min, psi_max]");
}

double normalized_time(int n, int count) {
  const double half = (count - 1) / 2.0;
  return (n - half) / half;
}

double defocus_from_geometry(double aperture_radius_m, double wavelength_m,
                             double inv_image_plane, double inv_ideal_plane) {
  if (aperture_radius_m <= 0.0) throw std::invalid_argument("aperture radius must be positive");
  if (wavelength_m <= 0.0) throw std::invalid_argument("wavelength must be positive");
  return std::numbers::pi * aperture_radius_m * aperture_radius_m / wavelength_m *
         (inv_image_plane - inv_ideal_plane);
}

cvec pupil_field(const PhaseMask& mask, const OpticalConfig& config,
                 double wavelength_nm, double psi_ref) {
  config.validate();
  mask.validate();
  if (wavelength_nm <= 0.0) throw std::invalid_argument("wavelength must be positive");
  const int g = config.pupil_grid;
  const double scale = config.reference_wavelength_nm / wavelength_nm;
  const double psi = psi_ref * scale;
  cvec field(static_cast<size_t>(g) * g, 0.0);
  // Grid coordinates x_i = (i - g/2) * (2/g). The strict rho < 1 test keeps the
  // sampled disk symmetric under the circular flip (the x = -1 column and
  // y = -1 row stay empty), which the psi <-> -psi identities rely on.
  const double step = 2.0 / g;
  for (int y = 0; y < g; ++y) {
    const double py = (y - g / 2) * step;
    for (int x = 0; x < g; ++x) {
      const double px = (x - g / 2) * step;
      const double r2 = px * px + py * py;
      if (r2 >= 1.0) continue;
      const double phase = mask.phase_at(std::sqrt(r2), scale) + psi * r2;
      field[static_cast<size_t>(y) * g + x] = std::polar(1.0, phase);
    }
  }
  return field;
}

namespace {

struct PupilTransform {
  cvec spectrum;        // F{P_C}
  double pupil_energy;  // sum |P_C|^2
};

PupilTransform transform_pupil(const PhaseMask& mask, const OpticalConfig& config,
                               double wavelength_nm, double psi_ref) {
  const cvec field = pupil_field(mask, config, wavelength_nm, psi_ref);
  double energy = 0.0;
  for (const auto& v : field) energy += std::norm(v);
  const int g = config.pupil_grid;
  return {fft2(field, g, g), energy};
}

/// |spec|^2 scaled so the full-grid sum is 1 by Parseval, fftshifted.
std::vector<double> intensity_normalized(const cvec& spec, int g, double pupil_energy) {
  std::vector<double> h(spec.size());
  const double scale = 1.0 / (pupil_energy * static_cast<double>(g) * g);
  for (size_t i = 0; i < spec.size(); ++i) h[i] = std::norm(spec[i]) * scale;
  return fftshift2(h, g, g);
}

struct Crop {
  std::vector<double> values;
  double sum = 0.0;
};

Crop center_crop(const std::vector<double>& full, int g, int k) {
  Crop c;
  c.values.resize(static_cast<size_t>(k) * k);
  const int o = g / 2 - k / 2;
  for (int y = 0; y < k; ++y)
    for (int x = 0; x < k; ++x) {
      const double v = full[static_cast<size_t>(o + y) * g + (o + x)];
      c.values[static_cast<size_t>(y) * k + x] = v;
      c.sum += v;
    }
  return c;
}

}  // namespace

PsfResult psf(const PhaseMask& mask, const OpticalConfig& config,
              double wavelength_nm, double psi_ref) {
  const int g = config.pupil_grid;
  const PupilTransform pt = transform_pupil(mask, config, wavelength_nm, psi_ref);
  const std::vector<double> full = intensity_normalized(pt.spectrum, g, pt.pupil_energy);
  double total = 0.0;
  for (double v : full) total += v;
  Crop c = center_crop(full, g, config.kernel_size);
  PsfResult out;
  out.energy_fraction = c.sum / total;
  out.kernel = std::move(c.values);
  for (double& v : out.kernel) v /= c.sum;
  return out;
}

PsfWithGrad psf_with_grad(const PhaseMask& mask, const OpticalConfig& config,
                          double wavelength_nm, double psi_ref) {
  const int g = config.pupil_grid;
  const double lambda_scale = config.reference_wavelength_nm / wavelength_nm;

  const cvec field = pupil_field(mask, config, wavelength_nm, psi_ref);
  double pupil_energy = 0.0;
  for (const auto& v : field) pupil_energy += std::norm(v);
  const cvec spec = fft2(field, g, g);

  // d(P_C)/d(psi_ref) = j rho^2 * (lambda_ref/lambda) * P_C.
  cvec dfield(field.size());
  const double step = 2.0 / g;
  for (int y = 0; y < g; ++y) {
    const double py = (y - g / 2) * step;
    for (int x = 0; x < g; ++x) {
      const double px = (x - g / 2) * step;
      const size_t i = static_cast<size_t>(y) * g + x;
      dfield[i] = field[i] * std::complex<double>(0.0, (px * px + py * py) * lambda_scale);
    }
  }
  const cvec dspec = fft2(dfield, g, g);

  const double scale = 1.0 / (pupil_energy * static_cast<double>(g) * g);
  std::vector<double> h(spec.size()), dh(spec.size());
  for (size_t i = 0; i < spec.size(); ++i) {
    h[i] = std::norm(spec[i]) * scale;
    dh[i] = 2.0 * (std::conj(spec[i]) * dspec[i]).real() * scale;
  }
  const std::vector<double> hs = fftshift2(h, g, g);
  const std::vector<double> dhs = fftshift2(dh, g, g);

  double total = 0.0;
  for (double v : hs) total += v;
  Crop hc = center_crop(hs, g, config.kernel_size);
  Crop dc = center_crop(dhs, g, config.kernel_size);

  PsfWithGrad out;
  out.energy_fraction = hc.sum / total;
  const size_t k2 = hc.values.size();
  out.kernel.resize(k2);
  out.grad.resize(k2);
  // Quotient rule for the crop renormalization kappa = crop(h)/sum(crop(h)).
  const double s = hc.sum, s2 = s * s;
  for (size_t i = 0; i < k2; ++i) {
    out.kernel[i] = hc.values[i] / s;
    out.grad[i] = (dc.values[i] * s - hc.values[i] * dc.sum) / s2;
  }
  return out;
}

std::vector<double> psf_grad(const PhaseMask& mask, const OpticalConfig& config,
                             double wavelength_nm, double psi_ref) {
  return psf_with_grad(mask, config, wavelength_nm, psi_ref).grad;
}

PSFStack psf_stack(const PhaseMask& mask, const OpticalConfig& config,
                   const DefocusSchedule& schedule) {
  config.validate();
  schedule.validate();
  if (schedule.count() != config.time_samples)
    throw std::invalid_argument("schedule length does not match time_samples");
  const int n = schedule.count();
  const int k = config.kernel_size;
  PSFStack stack;
  stack.count = n;
  stack.kernel_size = k;
  stack.kernels.resize(static_cast<size_t>(n) * 3 * k * k);
  stack.energy_fraction.resize(static_cast<size_t>(n) * 3);
  parallel_for(n * 3, [&](int idx) {
    const int i = idx / 3, c = idx % 3;
    PsfResult r = psf(mask, config, config.wavelengths_nm[c], schedule.psi[i]);
    std::copy(r.kernel.begin(), r.kernel.end(), stack.kernel(i, c).begin());
    stack.energy_fraction[static_cast<size_t>(i) * 3 + c] = r.energy_fraction;
  });
  return stack;
}

std::pair<PSFStack, std::vector<double>> psf_stack_with_grad(
    const PhaseMask& mask, const OpticalConfig& config,
    const DefocusSchedule& schedule) {
  config.validate();
  schedule.validate();
  if (schedule.count() != config.time_samples)
    throw std::invalid_argument("schedule length does not match time_samples");
  const int n = schedule.count();
  const int k = config.kernel_size;
  PSFStack stack;
  stack.count = n;
  stack.kernel_size = k;
  stack.kernels.resize(static_cast<size_t>(n) * 3 * k * k);
  stack.energy_fraction.resize(static_cast<size_t>(n) * 3);
  std::vector<double> grads(stack.kernels.size());
  const size_t k2 = static_cast<size_t>(k) * k;
  parallel_for(n * 3, [&](int idx) {
    const int i = idx / 3, c = idx % 3;
    PsfWithGrad r = psf_with_grad(mask, config, config.wavelengths_nm[c], schedule.psi[i]);
    std::copy(r.kernel.begin(), r.kernel.end(), stack.kernel(i, c).begin());
    std::copy(r.grad.begin(), r.grad.end(),
              grads.begin() + (static_cast<size_t>(i) * 3 + c) * k2);
    stack.energy_fraction[static_cast<size_t>(i) * 3 + c] = r.energy_fraction;
  });
  return {std::move(stack), std::move(grads)};
}

namespace detail {

FullGridPsf psf_full_grid(const PhaseMask& mask, const OpticalConfig& config,
                          double wavelength_nm, double psi_ref) {
  const int g = config.pupil_grid;
  const PupilTransform pt = transform_pupil(mask, config, wavelength_nm, psi_ref);
  FullGridPsf out;
  out.pupil_energy = pt.pupil_energy;
  // Raw DFT energy; Parseval says this equals pupil_energy * g^2.
  double raw = 0.0;
  for (const auto& v : pt.spectrum) raw += std::norm(v);
  out.total_energy = raw / (static_cast<double>(g) * g);
  out.psf = intensity_normalized(pt.spectrum, g, pt.pupil_energy);
  return out;
}

std::vector<double> psf_grad_full_grid(const PhaseMask& mask,
                                       const OpticalConfig& config,
                                       double wavelength_nm, double psi_ref) {
  const int g = config.pupil_grid;
  const double lambda_scale = config.reference_wavelength_nm / wavelength_nm;
  const cvec field = pupil_field(mask, config, wavelength_nm, psi_ref);
  double pupil_energy = 0.0;
  for (const auto& v : field) pupil_energy += std::norm(v);
  const cvec spec = fft2(field, g, g);
  cvec dfield(field.size());
  const double step = 2.0 / g;
  for (int y = 0; y < g; ++y) {
    const double py = (y - g / 2) * step;
    for (int x = 0; x < g; ++x) {
      const double px = (x - g / 2) * step;
      const size_t i = static_cast<size_t>(y) * g + x;
      dfield[i] = field[i] * std::complex<double>(0.0, (px * px + py * py) * lambda_scale);
    }
  }
  const cvec dspec = fft2(dfield, g, g);
  std::vector<double> dh(spec.size());
  const double scale = 1.0 / (pupil_energy * static_cast<double>(g) * g);
  for (size_t i = 0; i < spec.size(); ++i)
    dh[i] = 2.0 * (std::conj(spec[i]) * dspec[i]).real() * scale;
  return fftshift2(dh, g, g);
}

}  // namespace detail

}  // namespace codedblur::optics
