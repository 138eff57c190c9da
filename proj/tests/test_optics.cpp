#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "codedblur/optics.hpp"
#include "testutil.hpp"

using namespace codedblur;
using namespace codedblur::optics;

TEST_CASE("defocus_from_geometry evaluates the quadratic phase error") {
  // In focus: equal plane curvatures.
  CHECK(defocus_from_geometry(1.15e-3, 455e-9, 5.0, 5.0) == 0.0);

  // Direct scalar evaluation of the formula.
  const double expected = std::numbers::pi * 1.15e-3 * 1.15e-3 / 455e-9 * 1e-3;
  const double got = defocus_from_geometry(1.15e-3, 455e-9, 1e-3, 0.0);
  CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  CHECK(got == doctest::Approx(9.131e-3).epsilon(1e-3));

  // psi is proportional to R^2.
  CHECK(defocus_from_geometry(2.3e-3, 455e-9, 1e-3, 0.0) ==
        doctest::Approx(4.0 * got).epsilon(1e-12));

  CHECK_THROWS_AS(defocus_from_geometry(-1.0, 455e-9, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(defocus_from_geometry(1.15e-3, 0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("pupil_field samples the masked defocused aperture") {
  const auto cfg = testutil::small_config();
  const int g = cfg.pupil_grid;

  SUBCASE("clear in-focus aperture is the unit-disk indicator") {
    const cvec f = pupil_field(PhaseMask::clear(), cfg, 455.0, 0.0);
    int inside = 0;
    for (int y = 0; y < g; ++y)
      for (int x = 0; x < g; ++x) {
        const double px = (x - g / 2) * 2.0 / g, py = (y - g / 2) * 2.0 / g;
        const auto v = f[static_cast<size_t>(y) * g + x];
        if (px * px + py * py < 1.0) {
          CHECK(v == std::complex<double>(1.0, 0.0));
          ++inside;
        } else {
          CHECK(v == std::complex<double>(0.0, 0.0));
        }
      }
    // Disk area ~ pi (g/2)^2.
    CHECK(inside == doctest::Approx(std::numbers::pi * g * g / 4.0).epsilon(0.01));
  }

  SUBCASE("default mask carries exp(j 6.5) inside ring 1 at 455 nm") {
    const cvec f = pupil_field(PhaseMask::two_ring_default(), cfg, 455.0, 0.0);
    const int x = g / 2 + static_cast<int>(0.7 * g / 2);  // rho ~ 0.7, inside ring 1
    const auto v = f[static_cast<size_t>(g / 2) * g + x];
    CHECK(v.real() == doctest::Approx(std::cos(6.5)).epsilon(1e-12));
    CHECK(v.imag() == doctest::Approx(std::sin(6.5)).epsilon(1e-12));
  }

  SUBCASE("defocus phase halves when the wavelength doubles") {
    const cvec a = pupil_field(PhaseMask::clear(), cfg, 910.0, 3.0);
    const cvec b = pupil_field(PhaseMask::clear(), cfg, 455.0, 1.5);
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-14);
  }

  SUBCASE("wavelength scaling equals a reference-wavelength evaluation with rescaled mask") {
    const double lambda = 610.0;
    const double scale = cfg.reference_wavelength_nm / lambda;
    PhaseMask rescaled = PhaseMask::two_ring_default();
    for (auto& r : rescaled.rings) r.phase_rad_at_reference *= scale;
    const cvec a = pupil_field(PhaseMask::two_ring_default(), cfg, lambda, 2.5);
    const cvec b = pupil_field(rescaled, cfg, cfg.reference_wavelength_nm, 2.5 * scale);
    for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
}

TEST_CASE("psf normalization, symmetry and energy accounting") {
  const auto cfg = testutil::small_config();

  SUBCASE("kernels are nonnegative with unit sum") {
    for (double psi : {-5.0, -1.0, 0.0, 2.0, 6.0}) {
      const PsfResult r = psf(PhaseMask::two_ring_default(), cfg, 535.0, psi);
      double sum = 0.0;
      for (double v : r.kernel) {
        CHECK(v >= 0.0);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(r.energy_fraction > 0.0);
      CHECK(r.energy_fraction <= 1.0);
    }
  }

  SUBCASE("clear aperture at focus is centrally symmetric") {
    const PsfResult r = psf(PhaseMask::clear(), cfg, 455.0, 0.0);
    const int k = cfg.kernel_size;
    double asym = 0.0;
    for (int y = 0; y < k; ++y)
      for (int x = 0; x < k; ++x)
        asym = std::max(asym, std::abs(r.kernel[static_cast<size_t>(y) * k + x] -
                                       r.kernel[static_cast<size_t>(k - 1 - y) * k +
                                                (k - 1 - x)]));
    CHECK(asym < 1e-6);
  }

  SUBCASE("clear aperture: h(psi) == h(-psi); the mask breaks this") {
    const PsfResult plus = psf(PhaseMask::clear(), cfg, 455.0, 3.0);
    const PsfResult minus = psf(PhaseMask::clear(), cfg, 455.0, -3.0);
    double d = 0.0;
    for (size_t i = 0; i < plus.kernel.size(); ++i)
      d = std::max(d, std::abs(plus.kernel[i] - minus.kernel[i]));
    CHECK(d < 1e-6);

    const PsfResult mp = psf(PhaseMask::two_ring_default(), cfg, 455.0, 3.0);
    const PsfResult mm = psf(PhaseMask::two_ring_default(), cfg, 455.0, -3.0);
    double dm = 0.0;
    for (size_t i = 0; i < mp.kernel.size(); ++i)
      dm = std::max(dm, std::abs(mp.kernel[i] - mm.kernel[i]));
    CHECK(dm > 1e-3);  // the asymmetry that carries the code
  }

  SUBCASE("Parseval: uncropped PSF energy equals pupil energy") {
    for (double psi : {-4.0, 0.0, 5.0}) {
      const auto full = detail::psf_full_grid(PhaseMask::two_ring_default(), cfg, 610.0, psi);
      CHECK(full.total_energy ==
            doctest::Approx(full.pupil_energy).epsilon(1e-6));
      double s = 0.0;
      for (double v : full.psf) s += v;
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));  // energy-normalized grid
    }
  }

  SUBCASE("default geometry keeps >95% energy in the crop for |psi| <= 6") {
    const auto cfg_full = testutil::default_config();
    for (double psi : {-6.0, 0.0, 6.0})
      for (double lambda : cfg_full.wavelengths_nm) {
        const PsfResult r = psf(PhaseMask::two_ring_default(), cfg_full, lambda, psi);
        CHECK(r.energy_fraction > 0.95);
      }
  }
}

TEST_CASE("psf_stack matches independent psf calls") {
  auto cfg = testutil::default_config();
  const auto mask = PhaseMask::two_ring_default();

  SUBCASE("49 samples and 3 colors give 147 kernels") {
    const auto schedule = DefocusSchedule::linear(cfg.time_samples, -4.0, 4.0);
    const PSFStack stack = psf_stack(mask, cfg, schedule);
    CHECK(stack.count == 49);
    CHECK(stack.kernels.size() ==
          static_cast<size_t>(147) * cfg.kernel_size * cfg.kernel_size);
    // Spot-check bitwise equality against the scalar path.
    for (int n : {0, 24, 48})
      for (int c : {0, 2}) {
        const PsfResult r = psf(mask, cfg, cfg.wavelengths_nm[c], schedule.psi[n]);
        const auto k = stack.kernel(n, c);
        bool equal = true;
        for (size_t i = 0; i < r.kernel.size(); ++i)
          equal = equal && (r.kernel[i] == k[i]);
        CHECK(equal);
      }
  }

  SUBCASE("constant schedule gives identical kernels per color") {
    cfg = testutil::small_config(4);
    const PSFStack stack = psf_stack(mask, cfg, DefocusSchedule::constant(4, 1.5));
    for (int c = 0; c < 3; ++c)
      for (int n = 1; n < 4; ++n) {
        const auto a = stack.kernel(0, c);
        const auto b = stack.kernel(n, c);
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
      }
  }

  SUBCASE("length mismatch throws") {
    cfg = testutil::small_config(4);
    CHECK_THROWS_AS(psf_stack(mask, cfg, DefocusSchedule::constant(5, 0.0)),
                    std::invalid_argument);
  }
}

TEST_CASE("psf_grad matches central finite differences") {
  const auto cfg = testutil::small_config();
  const auto mask = PhaseMask::two_ring_default();
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> psi_dist(-5.5, 5.5);
  const double h = 1e-4;

  for (int trial = 0; trial < 10; ++trial) {
    const double psi = psi_dist(rng);
    const double lambda = cfg.wavelengths_nm[trial % 3];
    const std::vector<double> grad = psf_grad(mask, cfg, lambda, psi);
    const PsfResult plus = psf(mask, cfg, lambda, psi + h);
    const PsfResult minus = psf(mask, cfg, lambda, psi - h);
    double max_err = 0.0, max_fd = 0.0;
    for (size_t i = 0; i < grad.size(); ++i) {
      const double fd = (plus.kernel[i] - minus.kernel[i]) / (2.0 * h);
      max_err = std::max(max_err, std::abs(grad[i] - fd));
      max_fd = std::max(max_fd, std::abs(fd));
    }
    CHECK(max_err / max_fd < 1e-4);
  }
}

TEST_CASE("psf_grad analytic structure") {
  const auto cfg = testutil::small_config();

  SUBCASE("uncropped unnormalized derivative sums to zero (Parseval)") {
    const auto dfull =
        detail::psf_grad_full_grid(PhaseMask::two_ring_default(), cfg, 535.0, 2.0);
    double s = 0.0;
    for (double v : dfull) s += v;
    CHECK(std::abs(s) < 1e-8);
  }

  SUBCASE("clear aperture at focus has zero derivative at the center pixel") {
    const std::vector<double> grad = psf_grad(PhaseMask::clear(), cfg, 455.0, 0.0);
    const int k = cfg.kernel_size;
    CHECK(std::abs(grad[static_cast<size_t>(k / 2) * k + k / 2]) < 1e-8);
  }
}

TEST_CASE("configuration and schedule invariants are enforced") {
  auto cfg = testutil::small_config();

  cfg.kernel_size = 20;  // even
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.kernel_size = 257;  // larger than the pupil grid
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = testutil::small_config();
  cfg.time_samples = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = testutil::small_config();
  cfg.wavelengths_nm[1] = -5.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  PhaseMask bad;
  bad.rings = {{0.5, 0.4, 1.0}};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.rings = {{0.1, 0.5, 1.0}, {0.4, 0.8, 2.0}};  // overlapping
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  DefocusSchedule s = DefocusSchedule::linear(5, -4.0, 4.0);
  s.psi[2] = 7.0;  // outside bounds
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);

  CHECK(normalized_time(0, 49) == doctest::Approx(-1.0));
  CHECK(normalized_time(48, 49) == doctest::Approx(1.0));
  CHECK(normalized_time(24, 49) == doctest::Approx(0.0));
}
