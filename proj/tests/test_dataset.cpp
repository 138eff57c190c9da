#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "codedblur/dataset.hpp"
#include "codedblur/io.hpp"
#include "codedblur/rng.hpp"
#include "testutil.hpp"

using namespace codedblur;
using namespace codedblur::dataset;
using codedblur::optics::DefocusSchedule;
using codedblur::optics::PhaseMask;

namespace {

void write_scene_pngs(const std::filesystem::path& dir, int count, int h, int w,
                      std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%03d.png", i);
    io::write_png(dir / name, dataset::synthetic_texture(h, w, seed + i));
  }
}

}  // namespace

TEST_CASE("timing setup presets") {
  const TimingSetup a = TimingSetup::preset("48-8");
  CHECK(a.exposure_frames == 48);
  CHECK(a.reset_frames == 8);
  const TimingSetup b = TimingSetup::preset("32-16");
  CHECK(b.exposure_frames == 32);
  CHECK(b.reset_frames == 16);
  CHECK_THROWS_AS(TimingSetup::preset("1-8"), std::invalid_argument);
  CHECK_THROWS_AS(TimingSetup::preset("nonsense"), std::invalid_argument);
}

TEST_CASE("ingest_scene") {
  testutil::TempDir tmp("ingest");

  SUBCASE("decodes an ordered, inverse-CRF'd sequence") {
    write_scene_pngs(tmp.path(), 49, 16, 16, 100);
    const FrameSequence seq = ingest_scene(tmp.path(), 49);
    CHECK(seq.count() == 49);
    CHECK(seq.frames[0].channels == 3);
  }

  SUBCASE("too few frames") {
    write_scene_pngs(tmp.path(), 48, 16, 16, 100);
    CHECK_THROWS_WITH_AS(ingest_scene(tmp.path(), 49),
                         doctest::Contains("insufficient frames"), std::runtime_error);
  }

  SUBCASE("size mismatch names the offender") {
    write_scene_pngs(tmp.path(), 5, 16, 16, 100);
    io::write_png(tmp.path() / "frame_002.png", dataset::synthetic_texture(16, 18, 1));
    try {
      ingest_scene(tmp.path(), 5);
      FAIL("expected a shape mismatch error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("frame_002.png") != std::string::npos);
      CHECK(std::string(e.what()).find("shape mismatch") != std::string::npos);
    }
  }

  SUBCASE("undecodable file names the offender") {
    write_scene_pngs(tmp.path(), 5, 16, 16, 100);
    std::ofstream(tmp.path() / "frame_001.png") << "not a png";
    try {
      ingest_scene(tmp.path(), 5);
      FAIL("expected a decode error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find("frame_001.png") != std::string::npos);
    }
  }
}

TEST_CASE("synthesize_sample") {
  const auto cfg = testutil::small_config(49);
  const auto mask = PhaseMask::two_ring_default();
  const auto schedule = DefocusSchedule::linear(49, -4.0, 4.0);
  const auto stack = optics::psf_stack(mask, cfg, schedule);

  FrameSequence frames =
      dataset::translating_frames(dataset::synthetic_texture(40, 40, 7), 10.0, 0.0, 49);

  SUBCASE("seven GT frames at the 8k indices") {
    const auto out = synthesize_sample(frames, stack, schedule, 0.01, 5, false, "s0");
    CHECK(out.gt.count() == 7);
    CHECK(out.manifest.gt_indices == std::vector<int>{0, 8, 16, 24, 32, 40, 48});
    CHECK(out.manifest.timing == "single");
    CHECK(out.manifest.schedule_sha256 ==
          io::sha256_hex(io::schedule_text(schedule.psi)));
  }

  SUBCASE("noiseless static uncoded sample equals the input frame") {
    FrameSequence still;
    still.frames.assign(49, frames.frames[0]);
    const auto out = synthesize_sample(still, stack, schedule, 0.0, 5, true, "s1");
    CHECK(max_abs_diff(out.image, frames.frames[0]) < 1e-6);
    CHECK(out.manifest.timing == "single-uncoded");
  }

  SUBCASE("equal seeds give bitwise-identical output trees") {
    testutil::TempDir a("sample_a"), b("sample_b");
    synthesize_sample(frames, stack, schedule, 0.02, 99, false, "scene", a.path());
    synthesize_sample(frames, stack, schedule, 0.02, 99, false, "scene", b.path());
    for (const char* name : {"coded.pfm", "coded.png", "gt_00.pfm", "gt_06.pfm",
                             "manifest.json"})
      CHECK(testutil::files_identical(a.path() / name, b.path() / name));
  }

  SUBCASE("count mismatch throws") {
    FrameSequence wrong;
    wrong.frames.assign(48, frames.frames[0]);
    CHECK_THROWS_AS(synthesize_sample(wrong, stack, schedule, 0.0, 0, false, "x"),
                    std::invalid_argument);
  }
}

TEST_CASE("manifest JSON round trip with the exact key set") {
  SceneManifest m;
  m.scene = "s";
  m.schedule_sha256 = "abc";
  m.sigma = 0.01;
  m.seed = 42;
  m.timing = "single";
  m.gt_indices = {0, 8};
  m.files = {"coded.pfm"};
  const std::string text = m.to_json();
  for (const char* key : {"\"scene\"", "\"schedule_sha256\"", "\"sigma\"", "\"seed\"",
                          "\"timing\"", "\"gt_indices\"", "\"files\""})
    CHECK(text.find(key) != std::string::npos);
  const SceneManifest back = SceneManifest::from_json_text(text);
  CHECK(back.scene == m.scene);
  CHECK(back.seed == m.seed);
  CHECK(back.gt_indices == m.gt_indices);
}

TEST_CASE("resample_schedule") {
  const auto s = DefocusSchedule::linear(49, -4.0, 4.0);

  SUBCASE("identity at the same count") {
    const auto r = resample_schedule(s, 49);
    for (int i = 0; i < 49; ++i) CHECK(r.psi[i] == doctest::Approx(s.psi[i]).epsilon(1e-12));
  }

  SUBCASE("keeps endpoints and linearity") {
    const auto r = resample_schedule(s, 17);
    CHECK(r.psi.front() == doctest::Approx(-4.0));
    CHECK(r.psi.back() == doctest::Approx(4.0));
    for (int i = 1; i + 1 < 17; ++i)
      CHECK(r.psi[i + 1] - r.psi[i] ==
            doctest::Approx(r.psi[i] - r.psi[i - 1]).epsilon(1e-9));
  }
}

TEST_CASE("synthesize_vfi") {
  auto cfg = testutil::small_config(49);
  const auto mask = PhaseMask::two_ring_default();
  const auto schedule = DefocusSchedule::linear(49, -4.0, 4.0);

  const LinearImage base = dataset::synthetic_texture(32, 32, 13);

  SUBCASE("48-8 over 112 frames gives 2 blurred frames") {
    const FrameSequence seq = dataset::translating_frames(base, 6.0, 0.0, 112);
    const auto out = synthesize_vfi(seq, mask, cfg, schedule, TimingSetup::preset("48-8"),
                                    0.0, 3, "vfi");
    CHECK(out.blurred.count() == 2);
    CHECK(out.gt.count() == 14);
    CHECK(out.manifest.timing == "48-8");
  }

  SUBCASE("32-16 over 96 frames gives 2 blurred frames") {
    const FrameSequence seq = dataset::translating_frames(base, 6.0, 0.0, 96);
    const auto out = synthesize_vfi(seq, mask, cfg, schedule, TimingSetup::preset("32-16"),
                                    0.0, 3, "vfi");
    CHECK(out.blurred.count() == 2);
  }

  SUBCASE("E = N with zero reset matches synthesize_sample") {
    const FrameSequence seq = dataset::translating_frames(base, 6.0, 0.0, 49);
    TimingSetup t;
    t.exposure_frames = 49;
    t.reset_frames = 0;
    t.label = "49-0";
    const auto vfi = synthesize_vfi(seq, mask, cfg, schedule, t, 0.0, 3, "x");
    const auto stack = optics::psf_stack(mask, cfg, schedule);
    const auto sample = synthesize_sample(seq, stack, schedule, 0.0, 3, false, "x");
    CHECK(max_abs_diff(vfi.blurred.frames[0], sample.image) < 1e-6);
  }

  SUBCASE("too short a sequence throws") {
    const FrameSequence seq = dataset::translating_frames(base, 6.0, 0.0, 40);
    CHECK_THROWS_AS(synthesize_vfi(seq, mask, cfg, schedule, TimingSetup::preset("48-8"),
                                   0.0, 3, "x"),
                    std::invalid_argument);
  }

  SUBCASE("emitted frame count is floor(length / (E + R))") {
    for (int len : {56, 111, 112, 113, 168}) {
      const FrameSequence seq = dataset::translating_frames(base, 2.0, 0.0, len);
      const auto out = synthesize_vfi(seq, mask, cfg, schedule,
                                      TimingSetup::preset("48-8"), 0.0, 1, "x");
      CHECK(out.blurred.count() == len / 56);
    }
  }
}

TEST_CASE("scene seeds are order independent") {
  CHECK(scene_seed(5, "a") == scene_seed(5, "a"));
  CHECK(scene_seed(5, "a") != scene_seed(5, "b"));
  CHECK(scene_seed(5, "a") == (5ull ^ fnv1a64("a")));
}

TEST_CASE("synthetic scenes are deterministic and in range") {
  const LinearImage a = synthetic_texture(32, 24, 77);
  const LinearImage b = synthetic_texture(32, 24, 77);
  CHECK(a.data == b.data);
  for (double v : a.data) {
    CHECK(v >= 0.05);
    CHECK(v <= 0.95 + 1e-12);
  }
  const FrameSequence seq = translating_frames(a, 8.0, -4.0, 9);
  CHECK(seq.count() == 9);
  // t = 0 frame is the base itself.
  CHECK(max_abs_diff(seq.frames[4], a) < 1e-12);
}
