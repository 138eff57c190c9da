#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include "codedblur/fft.hpp"

namespace codedblur::optics {

/// Camera and sampling geometry. Lengths carry their unit in the field name;
/// defocus values are dimensionless radians of quadratic phase at the pupil
/// edge, quoted at the reference wavelength.
struct OpticalConfig {
  double aperture_radius_mm = 1.15;
  std::array<double, 3> wavelengths_nm{610.0, 535.0, 455.0};  // R, G, B
  double reference_wavelength_nm = 455.0;
  double focal_length_mm = 12.0;
  double pixel_pitch_um = 1.25;
  int pupil_grid = 256;
  int kernel_size = 31;
  int time_samples = 49;
  double exposure_s = 0.05;  // only enters noise-scaling ratios

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

struct PhaseRing {
  double inner_radius_norm = 0.0;  // fraction of the aperture radius
  double outer_radius_norm = 0.0;
  double phase_rad_at_reference = 0.0;
};

/// Concentric phase rings. Phases are specified at the reference wavelength
/// and scale as lambda_ref/lambda (etched-height dispersion model).
struct PhaseMask {
  std::vector<PhaseRing> rings;

  /// The two-ring mask: radii 0.633..0.92 mm and 0.92..1.15 mm over a
  /// 1.15 mm aperture, phases 6.5 and 13.2 rad at 455 nm.
  static PhaseMask two_ring_default();
  static PhaseMask clear() { return PhaseMask{}; }

  void validate() const;
  /// Ring phase at normalized radius rho, already scaled by lambda_ref/lambda.
  double phase_at(double rho, double wavelength_scale) const;
};

/// Learnable per-time-sample defocus values with physical box bounds.
struct DefocusSchedule {
  std::vector<double> psi;
  double psi_min = -6.0;
  double psi_max = 6.0;

  static DefocusSchedule linear(int count, double first, double last,
                                double lo = -6.0, double hi = 6.0);
  static DefocusSchedule constant(int count, double value,
                                  double lo = -6.0, double hi = 6.0);
  DefocusSchedule reversed() const;

  int count() const { return static_cast<int>(psi.size()); }
  void validate() const;
};

/// Normalized exposure time of sample n: t_0 = -1, t_{count-1} = +1, with
/// t = 0 at mid-exposure.
double normalized_time(int n, int count);

/// N x 3 color kernels h(psi(n)); each kernel nonnegative with unit sum.
struct PSFStack {
  int count = 0;
  int kernel_size = 0;
  std::vector<double> kernels;          // [n][c][y][x]
  std::vector<double> energy_fraction;  // [n][c], pre-crop energy kept by the crop

  std::span<const double> kernel(int n, int c) const {
    const size_t k2 = static_cast<size_t>(kernel_size) * kernel_size;
    return {kernels.data() + (static_cast<size_t>(n) * 3 + c) * k2, k2};
  }
  std::span<double> kernel(int n, int c) {
    const size_t k2 = static_cast<size_t>(kernel_size) * kernel_size;
    return {kernels.data() + (static_cast<size_t>(n) * 3 + c) * k2, k2};
  }
};

/// Defocus parameter psi = pi R^2 / lambda * (1/z_img - 1/z_ideal).
/// All arguments in SI units (meters and inverse meters).
double defocus_from_geometry(double aperture_radius_m, double wavelength_m,
                             double inv_image_plane, double inv_ideal_plane);

/// Pupil function P(rho,theta) * C(rho,theta) * exp(j psi_lambda rho^2) sampled
/// on a pupil_grid x pupil_grid grid spanning [-1,1]^2, zero outside the unit
/// disk. Ring phases and defocus both scale by lambda_ref/lambda from their
/// reference-wavelength values.
cvec pupil_field(const PhaseMask& mask, const OpticalConfig& config,
                 double wavelength_nm, double psi_ref);

struct PsfResult {
  std::vector<double> kernel;  // kernel_size^2, unit sum
  double energy_fraction = 0.0;
};

/// Incoherent PSF |F{pupil}|^2, center-cropped to kernel_size and renormalized
/// to unit sum. energy_fraction is the pre-crop energy share kept by the crop.
PsfResult psf(const PhaseMask& mask, const OpticalConfig& config,
              double wavelength_nm, double psi_ref);

/// Derivative of the normalized cropped kernel with respect to psi_ref.
std::vector<double> psf_grad(const PhaseMask& mask, const OpticalConfig& config,
                             double wavelength_nm, double psi_ref);

struct PsfWithGrad {
  std::vector<double> kernel;
  std::vector<double> grad;
  double energy_fraction = 0.0;
};

/// Kernel and derivative sharing one pupil transform.
PsfWithGrad psf_with_grad(const PhaseMask& mask, const OpticalConfig& config,
                          double wavelength_nm, double psi_ref);

/// kernels[n][c] == psf(mask, config, wavelength_c, schedule.psi[n]).
PSFStack psf_stack(const PhaseMask& mask, const OpticalConfig& config,
                   const DefocusSchedule& schedule);

/// Stack plus per-(n,c) kernel derivatives with respect to psi[n]
/// (layout matches PSFStack::kernels).
std::pair<PSFStack, std::vector<double>> psf_stack_with_grad(
    const PhaseMask& mask, const OpticalConfig& config,
    const DefocusSchedule& schedule);

namespace detail {

/// Full-grid PSF normalized so total energy is 1 (fftshifted, DC at center),
/// plus the pupil energy sum |P|^2, for Parseval checks.
struct FullGridPsf {
  std::vector<double> psf;      // pupil_grid^2
  double pupil_energy = 0.0;    // sum |P_C|^2 over the grid
  double total_energy = 0.0;    // sum of psf before normalization terms
};
FullGridPsf psf_full_grid(const PhaseMask& mask, const OpticalConfig& config,
                          double wavelength_nm, double psi_ref);

/// Full-grid derivative of the energy-normalized uncropped PSF (fftshifted).
std::vector<double> psf_grad_full_grid(const PhaseMask& mask,
                                       const OpticalConfig& config,
                                       double wavelength_nm, double psi_ref);

}  // namespace detail

}  // namespace codedblur::optics
