#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "codedblur/metrics.hpp"
#include "codedblur/rng.hpp"
#include "testutil.hpp"

using namespace codedblur;
using namespace codedblur::metrics;

namespace {

/// Brute-force SSIM oracle: direct weighted sums at every valid window
/// position, no separable filtering.
double ssim_oracle(const LinearImage& a, const LinearImage& b) {
  const int win = 11;
  std::vector<double> w(static_cast<size_t>(win) * win);
  double wsum = 0.0;
  for (int y = 0; y < win; ++y)
    for (int x = 0; x < win; ++x) {
      const double dy = y - 5.0, dx = x - 5.0;
      w[static_cast<size_t>(y) * win + x] = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5));
      wsum += w[static_cast<size_t>(y) * win + x];
    }
  for (double& v : w) v /= wsum;
  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0.0;
  int count = 0;
  for (int c = 0; c < a.channels; ++c)
    for (int y = 0; y + win <= a.height; ++y)
      for (int x = 0; x + win <= a.width; ++x) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int i = 0; i < win; ++i)
          for (int j = 0; j < win; ++j) {
            const double wv = w[static_cast<size_t>(i) * win + j];
            const double va = a.at(c, y + i, x + j), vb = b.at(c, y + i, x + j);
            ma += wv * va;
            mb += wv * vb;
            maa += wv * va * va;
            mbb += wv * vb * vb;
            mab += wv * va * vb;
          }
        const double sa = maa - ma * ma, sb = mbb - mb * mb, sab = mab - ma * mb;
        total += (2 * ma * mb + c1) * (2 * sab + c2) /
                 ((ma * ma + mb * mb + c1) * (sa + sb + c2));
        ++count;
      }
  return total / count;
}

}  // namespace

TEST_CASE("psnr") {
  const LinearImage a = dataset::synthetic_texture(32, 32, 1);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, a) > 0);

  LinearImage b = a;
  for (double& v : b.data) v += 0.1;  // MSE = 0.01
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));
  CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)));

  LinearImage c(32, 33, 3);
  CHECK_THROWS_AS(psnr(a, c), std::invalid_argument);
  CHECK_THROWS_AS(psnr(a, a, 0.0), std::invalid_argument);
}

TEST_CASE("ssim") {
  const LinearImage a = dataset::synthetic_texture(24, 28, 2);

  SUBCASE("identical images score 1") {
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("matches the direct-summation oracle") {
    LinearImage b = imaging::add_awgn(a, 0.05, 3);
    CHECK(ssim(a, b) == doctest::Approx(ssim_oracle(a, b)).epsilon(1e-9));
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)));
  }

  SUBCASE("inverted high-contrast image scores below 0.1") {
    // High-contrast bars.
    LinearImage hc(32, 32, 3);
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) hc.at(c, y, x) = ((x / 4) % 2) ? 0.95 : 0.05;
    LinearImage inv = hc;
    for (double& v : inv.data) v = 1.0 - v;
    CHECK(ssim(hc, inv) < 0.1);
  }

  SUBCASE("images smaller than the window throw") {
    const LinearImage tiny(8, 8, 3, 0.5);
    CHECK_THROWS_AS(ssim(tiny, tiny), std::invalid_argument);
  }
}

TEST_CASE("ssim3d") {
  const LinearImage base = dataset::synthetic_texture(24, 24, 4);
  FrameSequence a;
  a.frames.assign(7, base);

  SUBCASE("identical sequences score 1") {
    CHECK(ssim3d(a, a) == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("frame-constant sequences reduce to 2-D ssim") {
    FrameSequence b;
    b.frames.assign(7, imaging::add_awgn(base, 0.04, 9));
    CHECK(ssim3d(a, b) == doctest::Approx(ssim(a.frames[0], b.frames[0])).epsilon(1e-6));
  }

  SUBCASE("independent noise lowers the score monotonically") {
    double prev = 1.0;
    for (double sigma : {0.01, 0.02, 0.03}) {
      FrameSequence b;
      for (int f = 0; f < 7; ++f)
        b.frames.push_back(imaging::add_awgn(base, sigma, 100 + f));
      const double s = ssim3d(a, b);
      CHECK(s < prev);
      prev = s;
    }
  }

  SUBCASE("short sequences throw") {
    FrameSequence shorty;
    shorty.frames.assign(5, base);
    CHECK_THROWS_AS(ssim3d(shorty, shorty), std::invalid_argument);
  }
}

TEST_CASE("vid_aggregate") {
  CHECK(vid_aggregate(0.1, 0.1, 0.1) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(vid_aggregate(1.0, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(vid_aggregate(0.1, 0.01, 0.001) == doctest::Approx(20.0).epsilon(1e-12));

  // Strictly decreasing in every argument.
  const double base = vid_aggregate(0.2, 0.3, 0.4);
  CHECK(vid_aggregate(0.25, 0.3, 0.4) < base);
  CHECK(vid_aggregate(0.2, 0.35, 0.4) < base);
  CHECK(vid_aggregate(0.2, 0.3, 0.45) < base);

  CHECK_THROWS_AS(vid_aggregate(0.0, 0.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(vid_aggregate(0.1, -0.1, 0.1), std::invalid_argument);
}

TEST_CASE("direction_accuracy") {
  std::vector<VelocityPair> all_good = {{{8, 0}, {10, 0}}, {{-6, 1}, {-12, 0}}};
  CHECK(direction_accuracy(all_good) == 1.0);

  std::vector<VelocityPair> flipped = {{{-8, 0}, {10, 0}}, {{6, 0}, {-12, 0}}};
  CHECK(direction_accuracy(flipped) == 0.0);

  std::vector<VelocityPair> ortho = {{{0, 5}, {10, 0}}};
  CHECK(direction_accuracy(ortho) == 0.0);  // zero dot counts as failure

  CHECK_THROWS_AS(direction_accuracy(std::vector<VelocityPair>{}), std::invalid_argument);
}

TEST_CASE("noise_sweep") {
  const auto cfg = testutil::small_config(9);
  const auto stack = optics::psf_stack(optics::PhaseMask::two_ring_default(), cfg,
                                       optics::DefocusSchedule::linear(9, -4.0, 4.0));
  recon::DecoderOptions decoder;
  decoder.v_max = 16.0;

  SweepSpec spec;
  spec.seed = 11;
  for (int i = 0; i < 2; ++i) {
    SweepScene s;
    s.id = "scene" + std::to_string(i);
    s.base = dataset::synthetic_texture(64, 64, 50 + i);
    s.velocity = {i == 0 ? 10.0 : -12.0, 0.0};
    spec.scenes.push_back(std::move(s));
  }

  SUBCASE("row count is |sigmas| x |ratios| and output is reproducible") {
    spec.sigmas = {0.0, 0.02};
    spec.exposure_ratios = {1.0, 2.0 / 3.0};
    const auto rows = noise_sweep(spec, stack, decoder);
    CHECK(rows.size() == 4);
    const auto rows2 = noise_sweep(spec, stack, decoder);
    CHECK(sweep_csv(rows) == sweep_csv(rows2));
    CHECK(sweep_csv(rows).rfind("sigma,exposure_ratio,psnr_mean,ssim_mean,dir_acc\n", 0) == 0);
  }

  SUBCASE("identity decoding of static uncoded scenes reports infinite PSNR") {
    SweepSpec st = spec;
    for (auto& s : st.scenes) s.velocity = {0.0, 0.0};
    st.sigmas = {0.0};
    st.exposure_ratios = {1.0};
    st.coding = SweepCoding::Uncoded;
    st.decoder = SweepDecoder::Identity;
    const auto rows = noise_sweep(st, stack, decoder);
    REQUIRE(rows.size() == 1);
    CHECK(std::isinf(rows[0].psnr_mean));
    const std::string csv = sweep_csv(rows);
    CHECK(csv.find("inf") != std::string::npos);
  }

  SUBCASE("mean PSNR decreases as noise grows") {
    spec.sigmas = {0.0, 0.02};
    spec.exposure_ratios = {1.0};
    const auto rows = noise_sweep(spec, stack, decoder);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].psnr_mean >= rows[1].psnr_mean);
  }
}
