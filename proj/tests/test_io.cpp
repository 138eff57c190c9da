#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "codedblur/io.hpp"
#include "codedblur/rng.hpp"
#include "testutil.hpp"

using namespace codedblur;
using namespace codedblur::io;

TEST_CASE("pfm round trip is bit exact for float32 data") {
  testutil::TempDir tmp("pfm");
  LinearImage img(17, 23, 3);
  Rng rng(3);
  for (double& v : img.data) v = static_cast<float>(rng.uniform(-2.0, 2.0));

  write_pfm(tmp.path() / "a.pfm", img);
  const LinearImage back = read_pfm(tmp.path() / "a.pfm");
  CHECK(back.height == 17);
  CHECK(back.width == 23);
  CHECK(back.data == img.data);

  // write(read(x)) reproduces the file byte for byte.
  write_pfm(tmp.path() / "b.pfm", back);
  CHECK(testutil::files_identical(tmp.path() / "a.pfm", tmp.path() / "b.pfm"));

  SUBCASE("single channel uses the Pf header") {
    LinearImage gray(4, 4, 1, 0.25);
    write_pfm(tmp.path() / "g.pfm", gray);
    const std::string text = read_text_file(tmp.path() / "g.pfm");
    CHECK(text.rfind("Pf\n", 0) == 0);
    const LinearImage gback = read_pfm(tmp.path() / "g.pfm");
    CHECK(gback.channels == 1);
    CHECK(gback.data == gray.data);
  }

  SUBCASE("missing file raises a descriptive error") {
    CHECK_THROWS_WITH_AS(read_pfm(tmp.path() / "absent.pfm"),
                         doctest::Contains("absent.pfm"), std::runtime_error);
  }
}

TEST_CASE("png round trip is exact for 8-bit data") {
  testutil::TempDir tmp("png");
  LinearImage img(9, 11, 3);
  Rng rng(4);
  for (double& v : img.data) v = static_cast<double>(rng.next_u64() % 256) / 255.0;

  write_png(tmp.path() / "a.png", img);
  const LinearImage back = read_png(tmp.path() / "a.png");
  CHECK(back.data == img.data);

  write_png(tmp.path() / "b.png", back);
  CHECK(testutil::files_identical(tmp.path() / "a.png", tmp.path() / "b.png"));

  SUBCASE("writer clamps out-of-range values") {
    LinearImage wild(2, 2, 3);
    wild.data.assign(wild.data.size(), 1.7);
    wild.data[0] = -0.4;
    write_png(tmp.path() / "c.png", wild);
    const LinearImage c = read_png(tmp.path() / "c.png");
    CHECK(c.data[0] == 0.0);
    CHECK(c.data[1] == 1.0);
  }
}

TEST_CASE("schedule serialization") {
  testutil::TempDir tmp("sched");
  const std::vector<double> psi = {-4.0, 0.1234567890123456, 4.0, 1e-17, -0.0};
  write_schedule(tmp.path() / "s.txt", psi);
  const std::vector<double> back = read_schedule(tmp.path() / "s.txt", 5);
  CHECK(back == psi);

  CHECK_THROWS_WITH_AS(read_schedule(tmp.path() / "s.txt", 49),
                       doctest::Contains("expected 49"), std::runtime_error);

  // Canonical text drives the checksum.
  CHECK(sha256_hex(schedule_text(psi)) == sha256_hex(schedule_text(back)));
}

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("stack export layouts") {
  const auto cfg = testutil::small_config(5);
  const auto stack = optics::psf_stack(optics::PhaseMask::two_ring_default(), cfg,
                                       optics::DefocusSchedule::linear(5, -2.0, 2.0));

  const LinearImage img = stack_to_image(stack);
  CHECK(img.height == 5 * cfg.kernel_size);
  CHECK(img.width == cfg.kernel_size);
  CHECK(img.channels == 3);
  // Row block n reproduces kernel n.
  const auto k0 = stack.kernel(2, 1);
  double err = 0.0;
  for (int y = 0; y < cfg.kernel_size; ++y)
    for (int x = 0; x < cfg.kernel_size; ++x)
      err = std::max(err, std::abs(img.at(1, 2 * cfg.kernel_size + y, x) -
                                   k0[static_cast<size_t>(y) * cfg.kernel_size + x]));
  CHECK(err == 0.0);

  const LinearImage sheet = contact_sheet(stack);
  CHECK(sheet.width == 3 * cfg.kernel_size);   // ceil(sqrt(5)) = 3 columns
  CHECK(sheet.height == 2 * cfg.kernel_size);  // 2 rows
  double peak = 0.0;
  for (double v : sheet.data) peak = std::max(peak, v);
  CHECK(peak == doctest::Approx(1.0));
}
