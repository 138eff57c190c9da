#include "codedblur/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "codedblur/codeopt.hpp"
#include "codedblur/dataset.hpp"
#include "codedblur/imaging.hpp"
#include "codedblur/io.hpp"
#include "codedblur/metrics.hpp"
#include "codedblur/optics.hpp"
#include "codedblur/parallel.hpp"
#include "codedblur/reconstruction.hpp"
#include "codedblur/rng.hpp"

namespace codedblur::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct ToolConfig {
  optics::OpticalConfig optics_cfg;
  double psi_min = -6.0;
  double psi_max = 6.0;
  optics::PhaseMask mask = optics::PhaseMask::two_ring_default();
  std::string schedule = "linear:-4:4";
  recon::DecoderOptions decoder;
  double grid_step = 2.0;
  bool horizontal_only = true;
  std::string output = "out";
  int workers = 0;
  std::uint64_t seed = 0;
};

[[noreturn]] void config_error(const std::string& msg) {
  throw std::runtime_error("config: " + msg);
}

void reject_unknown(const nlohmann::json& j, const std::string& scope,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) config_error("unknown key \"" + key + "\" in " + scope);
  }
}

ToolConfig parse_config(const fs::path& path) {
  ToolConfig cfg;
  if (path.empty()) return cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    config_error(path.string() + ": " + e.what());
  }
  reject_unknown(j, "config", {"optics", "mask", "schedule", "decoder", "output", "workers", "seed"});
  if (j.contains("optics")) {
    const auto& o = j["optics"];
    reject_unknown(o, "optics",
                   {"aperture_radius_mm", "wavelengths_nm", "reference_wavelength_nm",
                    "focal_length_mm", "pixel_pitch_um", "pupil_grid", "kernel_size",
                    "time_samples", "exposure_s", "psi_bounds"});
    auto& oc = cfg.optics_cfg;
    if (o.contains("aperture_radius_mm")) oc.aperture_radius_mm = o["aperture_radius_mm"];
    if (o.contains("wavelengths_nm")) {
      const auto w = o["wavelengths_nm"].get<std::vector<double>>();
      if (w.size() != 3) config_error("wavelengths_nm must have 3 entries");
      std::copy(w.begin(), w.end(), oc.wavelengths_nm.begin());
    }
    if (o.contains("reference_wavelength_nm"))
      oc.reference_wavelength_nm = o["reference_wavelength_nm"];
    if (o.contains("focal_length_mm")) oc.focal_length_mm = o["focal_length_mm"];
    if (o.contains("pixel_pitch_um")) oc.pixel_pitch_um = o["pixel_pitch_um"];
    if (o.contains("pupil_grid")) oc.pupil_grid = o["pupil_grid"];
    if (o.contains("kernel_size")) oc.kernel_size = o["kernel_size"];
    if (o.contains("time_samples")) oc.time_samples = o["time_samples"];
    if (o.contains("exposure_s")) oc.exposure_s = o["exposure_s"];
    if (o.contains("psi_bounds")) {
      const auto b = o["psi_bounds"].get<std::vector<double>>();
      if (b.size() != 2) config_error("psi_bounds must have 2 entries");
      cfg.psi_min = b[0];
      cfg.psi_max = b[1];
    }
  }
  if (j.contains("mask")) {
    const auto& m = j["mask"];
    reject_unknown(m, "mask", {"rings"});
    cfg.mask.rings.clear();
    for (const auto& r : m.value("rings", nlohmann::json::array())) {
      const auto v = r.get<std::vector<double>>();
      if (v.size() != 3) config_error("each mask ring needs [inner, outer, phase]");
      cfg.mask.rings.push_back({v[0], v[1], v[2]});
    }
  }
  if (j.contains("schedule")) cfg.schedule = j["schedule"].get<std::string>();
  if (j.contains("decoder")) {
    const auto& d = j["decoder"];
    reject_unknown(d, "decoder",
                   {"v_max", "grid_step", "horizontal_only", "epsilon_score",
                    "epsilon_deconv", "taper_px"});
    if (d.contains("v_max")) cfg.decoder.v_max = d["v_max"];
    if (d.contains("grid_step")) cfg.grid_step = d["grid_step"];
    if (d.contains("horizontal_only")) cfg.horizontal_only = d["horizontal_only"];
    if (d.contains("epsilon_score")) cfg.decoder.epsilon_score = d["epsilon_score"];
    if (d.contains("epsilon_deconv")) cfg.decoder.epsilon_deconv = d["epsilon_deconv"];
    if (d.contains("taper_px")) cfg.decoder.taper_px = d["taper_px"];
  }
  if (j.contains("output")) cfg.output = j["output"].get<std::string>();
  if (j.contains("workers")) cfg.workers = j["workers"];
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  return cfg;
}

ordered_json config_json(const ToolConfig& cfg) {
  ordered_json o;
  o["optics"] = {{"aperture_radius_mm", cfg.optics_cfg.aperture_radius_mm},
                 {"wavelengths_nm", cfg.optics_cfg.wavelengths_nm},
                 {"reference_wavelength_nm", cfg.optics_cfg.reference_wavelength_nm},
                 {"focal_length_mm", cfg.optics_cfg.focal_length_mm},
                 {"pixel_pitch_um", cfg.optics_cfg.pixel_pitch_um},
                 {"pupil_grid", cfg.optics_cfg.pupil_grid},
                 {"kernel_size", cfg.optics_cfg.kernel_size},
                 {"time_samples", cfg.optics_cfg.time_samples},
                 {"exposure_s", cfg.optics_cfg.exposure_s},
                 {"psi_bounds", {cfg.psi_min, cfg.psi_max}}};
  ordered_json rings = nlohmann::json::array();
  for (const auto& r : cfg.mask.rings)
    rings.push_back({r.inner_radius_norm, r.outer_radius_norm, r.phase_rad_at_reference});
  o["mask"] = {{"rings", rings}};
  o["schedule"] = cfg.schedule;
  o["decoder"] = {{"v_max", cfg.decoder.v_max},
                  {"grid_step", cfg.grid_step},
                  {"horizontal_only", cfg.horizontal_only},
                  {"epsilon_score", cfg.decoder.epsilon_score},
                  {"epsilon_deconv", cfg.decoder.epsilon_deconv},
                  {"taper_px", cfg.decoder.taper_px}};
  o["output"] = cfg.output;
  o["workers"] = cfg.workers;
  o["seed"] = cfg.seed;
  return o;
}

/// Schedule spec: "linear:a:b", "constant:v", or a file path.
optics::DefocusSchedule load_schedule(const std::string& spec, const ToolConfig& cfg,
                                      std::map<std::string, std::string>* input_hashes) {
  const int n = cfg.optics_cfg.time_samples;
  if (spec.rfind("linear:", 0) == 0) {
    double a = 0.0, b = 0.0;
    if (std::sscanf(spec.c_str(), "linear:%lf:%lf", &a, &b) != 2)
      config_error("bad schedule spec \"" + spec + "\"");
    return optics::DefocusSchedule::linear(n, a, b, cfg.psi_min, cfg.psi_max);
  }
  if (spec.rfind("constant:", 0) == 0) {
    double v = 0.0;
    if (std::sscanf(spec.c_str(), "constant:%lf", &v) != 1)
      config_error("bad schedule spec \"" + spec + "\"");
    return optics::DefocusSchedule::constant(n, v, cfg.psi_min, cfg.psi_max);
  }
  optics::DefocusSchedule s;
  s.psi = io::read_schedule(spec, n);
  s.psi_min = cfg.psi_min;
  s.psi_max = cfg.psi_max;
  if (input_hashes) (*input_hashes)[spec] = io::sha256_file(spec);
  return s;
}

std::string dir_checksum(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files)
    acc += f.filename().string() + ":" + io::sha256_file(f) + "\n";
  return io::sha256_hex(acc);
}

/// Run-scoped bookkeeping: resolved config echo plus summary.json.
struct RunContext {
  ToolConfig cfg;
  fs::path out_dir;
  std::string command;
  std::map<std::string, std::string> inputs;
  std::vector<std::string> outputs;
  std::string config_sha;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void open(const ToolConfig& c, const std::string& cmd, const fs::path& out) {
    cfg = c;
    command = cmd;
    out_dir = out;
    fs::create_directories(out_dir);
    set_max_workers(cfg.workers);
    // The echo describes the computation; it lives inside the output directory,
    // so the destination itself is normalized away.
    ToolConfig echo = cfg;
    echo.output = ".";
    const std::string blob = config_json(echo).dump(2) + "\n";
    io::write_text_file(out_dir / "config.resolved.json", blob);
    config_sha = io::sha256_hex(blob);
    outputs.push_back("config.resolved.json");
  }

  void add_input_file(const fs::path& p) { inputs[p.string()] = io::sha256_file(p); }
  void add_input_dir(const fs::path& p) { inputs[p.string()] = dir_checksum(p); }

  void close() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ordered_json s;
    s["command"] = command;
    s["config_sha256"] = config_sha;
    ordered_json in = ordered_json::object();
    for (const auto& [k, v] : inputs) in[k] = v;
    s["inputs"] = in;
    std::sort(outputs.begin(), outputs.end());
    s["outputs"] = outputs;
    s["wall_time_s"] = wall;
    io::write_text_file(out_dir / "summary.json", s.dump(2) + "\n");
  }
};

LinearImage load_signal_image(const fs::path& path) {
  if (path.extension() == ".pfm") return io::read_pfm(path);
  if (path.extension() == ".png") return imaging::inverse_crf(io::read_png(path));
  throw std::runtime_error(path.string() + ": expected .pfm or .png");
}

LinearImage display_normalized(const LinearImage& img) {
  double peak = 0.0;
  for (double v : img.data) peak = std::max(peak, v);
  LinearImage out = img;
  if (peak > 0.0)
    for (double& v : out.data) v /= peak;
  return imaging::crf(out);
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::vector<metrics::SweepScene> load_sweep_scenes(const std::string& spec,
                                                   const ToolConfig& cfg,
                                                   RunContext& ctx) {
  std::vector<metrics::SweepScene> scenes;
  auto assign_velocity = [&](const std::string& id) {
    Rng rng(seed_mix(cfg.seed, fnv1a64("velocity:" + id)));
    const double mag = rng.uniform(8.0, 24.0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return recon::MotionHypothesis{sign * mag, 0.0};
  };
  if (spec.rfind("synthetic:", 0) == 0) {
    const int count = std::stoi(spec.substr(10));
    if (count <= 0) config_error("synthetic scene count must be positive");
    for (int i = 0; i < count; ++i) {
      char id[32];
      std::snprintf(id, sizeof(id), "synthetic_%03d", i);
      metrics::SweepScene s;
      s.id = id;
      s.base = dataset::synthetic_texture(128, 128, seed_mix(cfg.seed, fnv1a64(s.id)));
      s.velocity = assign_velocity(s.id);
      scenes.push_back(std::move(s));
    }
    return scenes;
  }
  const fs::path dir(spec);
  if (!fs::is_directory(dir)) config_error("scene spec must be a directory or synthetic:N");
  ctx.add_input_dir(dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".png") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) config_error(spec + " contains no PNG images");
  for (const auto& f : files) {
    metrics::SweepScene s;
    s.id = f.stem().string();
    s.base = imaging::inverse_crf(io::read_png(f));
    s.velocity = assign_velocity(s.id);
    scenes.push_back(std::move(s));
  }
  return scenes;
}

std::string velocity_csv(const recon::MotionScoreTable& table) {
  std::ostringstream os;
  os << "vx,vy,score\n";
  char buf[120];
  for (const auto& e : table.entries) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.17g\n", e.velocity.vx, e.velocity.vy,
                  e.score);
    os << buf;
  }
  return os.str();
}

int run_impl(int argc, const char* const* argv) {
  CLI::App app{"Dynamic phase-coded imaging toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // allow global flags after the subcommand name

  std::string config_path, out_override, psi_spec_cli;
  int workers_cli = -1;
  std::int64_t seed_cli = -1;
  app.add_option("--config", config_path, "JSON tool configuration")->expected(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_override, "Output directory (or file for trace)");
    sub->add_option("--workers", workers_cli, "Worker thread cap (0 = hardware)");
    sub->add_option("--seed", seed_cli, "Global seed");
    sub->add_option("--psi", psi_spec_cli,
                    "Schedule: file path, linear:a:b, or constant:v");
  };

  auto* c_psf = app.add_subcommand("psf", "Export the PSF stack and contact sheet");
  add_common(c_psf);

  auto* c_trace = app.add_subcommand("trace", "Render a moving-point trace");
  std::string velocity_str = "24,0";
  add_common(c_trace);
  c_trace->add_option("--velocity", velocity_str, "Total displacement vx,vy in px");

  auto* c_synth = app.add_subcommand("synth", "Synthesize a coded sample from a scene");
  std::string scene_dir, timing_label, from_manifest;
  double sigma = 0.01;
  bool uncoded = false;
  add_common(c_synth);
  c_synth->add_option("--scene", scene_dir, "Directory of PNG frames")->required();
  c_synth->add_option("--sigma", sigma, "AWGN sigma (fraction of dynamic range)");
  c_synth->add_flag("--uncoded", uncoded, "Temporal mean instead of coded blur");
  c_synth->add_option("--timing", timing_label, "VFI timing setup, e.g. 48-8 or 32-16");
  c_synth->add_option("--from-manifest", from_manifest,
                      "Reproduce sigma/seed/timing from a manifest.json");

  auto* c_est = app.add_subcommand("estimate", "Estimate global motion from a coded image");
  std::string image_path;
  add_common(c_est);
  c_est->add_option("--image", image_path, "Coded image (.pfm signal space or .png)")
      ->required();

  auto* c_rec = app.add_subcommand("reconstruct", "Recover a frame burst from a coded image");
  int frame_count = 25;
  add_common(c_rec);
  c_rec->add_option("--image", image_path, "Coded image (.pfm signal space or .png)")
      ->required();
  c_rec->add_option("--frames", frame_count, "Number of frames M");

  auto* c_opt = app.add_subcommand("optimize", "Learn a defocus schedule");
  codeopt::OptimizerConfig opt_cfg;
  add_common(c_opt);
  c_opt->add_option("--iters", opt_cfg.max_iters, "Max iterations");
  c_opt->add_option("--step", opt_cfg.step, "Initial step size");
  c_opt->add_option("--momentum", opt_cfg.momentum, "Momentum in [0,1)");

  auto* c_eval = app.add_subcommand("eval", "Score a reconstruction against ground truth");
  std::string recon_dir, gt_dir, vid_losses;
  add_common(c_eval);
  c_eval->add_option("--recon", recon_dir, "Directory of reconstructed .pfm frames")
      ->required();
  c_eval->add_option("--gt", gt_dir, "Directory of ground-truth .pfm frames")->required();
  c_eval->add_option("--vid-losses", vid_losses,
                     "Three externally computed feature losses l1,l2,l3");

  auto* c_sweep = app.add_subcommand("sweep-noise", "Noise/exposure robustness sweep");
  std::string scenes_spec = "synthetic:20", sigmas_str = "0,0.01,0.02,0.03,0.05",
              ratios_str = "1,0.66666666666666663";
  bool sweep_uncoded = false, sweep_identity = false;
  add_common(c_sweep);
  c_sweep->add_option("--scenes", scenes_spec, "synthetic:N or a directory of PNG bases");
  c_sweep->add_option("--sigmas", sigmas_str, "Comma-separated sigma list");
  c_sweep->add_option("--ratios", ratios_str, "Comma-separated exposure ratios");
  c_sweep->add_flag("--uncoded", sweep_uncoded, "Temporal-mean synthesis");
  c_sweep->add_flag("--identity", sweep_identity, "Identity decoder (no deconvolution)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  ToolConfig cfg = parse_config(config_path.empty() ? fs::path{} : fs::path(config_path));
  if (!out_override.empty()) cfg.output = out_override;
  if (workers_cli >= 0) cfg.workers = workers_cli;
  if (seed_cli >= 0) cfg.seed = static_cast<std::uint64_t>(seed_cli);
  if (!psi_spec_cli.empty()) cfg.schedule = psi_spec_cli;
  cfg.optics_cfg.validate();
  cfg.mask.validate();

  RunContext ctx;
  const auto stack_for = [&](const optics::DefocusSchedule& s) {
    return optics::psf_stack(cfg.mask, cfg.optics_cfg, s);
  };

  if (*c_psf) {
    ctx.open(cfg, "psf", cfg.output);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    const auto schedule = load_schedule(cfg.schedule, cfg, &ctx.inputs);
    const auto stack = stack_for(schedule);
    io::write_pfm(ctx.out_dir / "kernels.pfm", io::stack_to_image(stack));
    io::write_png(ctx.out_dir / "contact.png", imaging::crf(io::contact_sheet(stack)));
    io::write_schedule(ctx.out_dir / "schedule.txt", schedule.psi);
    ctx.outputs.insert(ctx.outputs.end(), {"kernels.pfm", "contact.png", "schedule.txt"});
    ctx.close();
    return 0;
  }

  if (*c_trace) {
    double vx = 0.0, vy = 0.0;
    if (std::sscanf(velocity_str.c_str(), "%lf,%lf", &vx, &vy) != 2)
      throw CLI::ValidationError("--velocity", "expected vx,vy");
    fs::path out_png(cfg.output);
    fs::path dir = out_png.extension() == ".png" ? out_png.parent_path() : out_png;
    if (dir.empty()) dir = ".";
    if (out_png.extension() != ".png") out_png = dir / "trace.png";
    ctx.open(cfg, "trace", dir);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    const auto schedule = load_schedule(cfg.schedule, cfg, &ctx.inputs);
    const auto stack = stack_for(schedule);
    const LinearImage trace = imaging::point_trace(stack, vx, vy);
    io::write_png(out_png, display_normalized(trace));
    io::write_pfm(out_png.parent_path() / (out_png.stem().string() + ".pfm"), trace);
    ctx.outputs.push_back(out_png.filename().string());
    ctx.outputs.push_back(out_png.stem().string() + ".pfm");
    ctx.close();
    return 0;
  }

  if (*c_synth) {
    ctx.open(cfg, "synth", cfg.output);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    const auto schedule = load_schedule(cfg.schedule, cfg, &ctx.inputs);
    if (!from_manifest.empty()) {
      ctx.add_input_file(from_manifest);
      const auto m = dataset::SceneManifest::from_json_text(io::read_text_file(from_manifest));
      sigma = m.sigma;
      cfg.seed = m.seed;
      uncoded = m.timing == "single-uncoded";
      if (m.timing != "single" && m.timing != "single-uncoded") timing_label = m.timing;
      const std::string sha = io::sha256_hex(io::schedule_text(schedule.psi));
      if (sha != m.schedule_sha256)
        throw std::runtime_error("schedule does not match manifest checksum");
    }
    ctx.add_input_dir(scene_dir);
    const std::string scene_id = fs::path(scene_dir).filename().string();
    if (timing_label.empty()) {
      const auto frames = dataset::ingest_scene(scene_dir, cfg.optics_cfg.time_samples);
      FrameSequence head;
      head.frames.assign(frames.frames.begin(),
                         frames.frames.begin() + cfg.optics_cfg.time_samples);
      const auto stack = stack_for(schedule);
      const auto sample = dataset::synthesize_sample(head, stack, schedule, sigma, cfg.seed,
                                                     uncoded, scene_id, ctx.out_dir);
      ctx.outputs.insert(ctx.outputs.end(), sample.manifest.files.begin(),
                         sample.manifest.files.end());
    } else {
      const auto timing = dataset::TimingSetup::preset(timing_label);
      const auto frames = dataset::ingest_scene(
          scene_dir, timing.exposure_frames + timing.reset_frames);
      const auto vfi = dataset::synthesize_vfi(frames, cfg.mask, cfg.optics_cfg, schedule,
                                               timing, sigma, cfg.seed, scene_id, ctx.out_dir);
      ctx.outputs.insert(ctx.outputs.end(), vfi.manifest.files.begin(),
                         vfi.manifest.files.end());
    }
    ctx.close();
    return 0;
  }

  if (*c_est || *c_rec) {
    ctx.open(cfg, *c_est ? "estimate" : "reconstruct", cfg.output);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    const auto schedule = load_schedule(cfg.schedule, cfg, &ctx.inputs);
    ctx.add_input_file(image_path);
    const LinearImage B = load_signal_image(image_path);
    const auto stack = stack_for(schedule);
    const auto grid =
        recon::hypothesis_grid(cfg.decoder.v_max, cfg.grid_step, cfg.horizontal_only);
    if (*c_est) {
      const auto [v, table] =
          recon::estimate_motion(B, stack, grid, cfg.decoder.epsilon_score, cfg.decoder);
      io::write_text_file(ctx.out_dir / "scores.csv", velocity_csv(table));
      ordered_json e;
      e["vx"] = v.vx;
      e["vy"] = v.vy;
      io::write_text_file(ctx.out_dir / "estimate.json", e.dump(2) + "\n");
      ctx.outputs.insert(ctx.outputs.end(), {"scores.csv", "estimate.json"});
    } else {
      const auto video = recon::reconstruct_video(B, stack, grid, frame_count,
                                                  cfg.decoder.epsilon_deconv, cfg.decoder);
      io::write_text_file(ctx.out_dir / "scores.csv", velocity_csv(video.scores));
      ordered_json e;
      e["vx"] = video.velocity.vx;
      e["vy"] = video.velocity.vy;
      io::write_text_file(ctx.out_dir / "estimate.json", e.dump(2) + "\n");
      ctx.outputs.insert(ctx.outputs.end(), {"scores.csv", "estimate.json"});
      for (int k = 0; k < video.frames.count(); ++k) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%02d.pfm", k);
        io::write_pfm(ctx.out_dir / name, video.frames.frames[k]);
        ctx.outputs.emplace_back(name);
        std::snprintf(name, sizeof(name), "frame_%02d.png", k);
        io::write_png(ctx.out_dir / name, imaging::crf(video.frames.frames[k]));
        ctx.outputs.emplace_back(name);
      }
    }
    ctx.close();
    return 0;
  }

  if (*c_opt) {
    ctx.open(cfg, "optimize", cfg.output);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    const auto init = load_schedule(cfg.schedule, cfg, &ctx.inputs);
    const auto obj = codeopt::CodeObjective::horizontal_default();
    const auto result = codeopt::optimize_schedule(init, cfg.mask, cfg.optics_cfg, obj, opt_cfg);
    io::write_schedule(ctx.out_dir / "schedule.txt", result.schedule.psi);
    io::write_text_file(ctx.out_dir / "history.csv", codeopt::history_csv(result.history));
    const auto stack = stack_for(result.schedule);
    io::write_png(ctx.out_dir / "contact.png", imaging::crf(io::contact_sheet(stack)));
    ctx.outputs.insert(ctx.outputs.end(), {"schedule.txt", "history.csv", "contact.png"});
    ctx.close();
    return 0;
  }

  if (*c_eval) {
    ctx.open(cfg, "eval", cfg.output);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    ctx.add_input_dir(recon_dir);
    ctx.add_input_dir(gt_dir);
    auto load_frames = [](const fs::path& dir) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pfm") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      FrameSequence seq;
      for (const auto& f : files) seq.frames.push_back(io::read_pfm(f));
      return seq;
    };
    const FrameSequence rec = load_frames(recon_dir);
    const FrameSequence gt = load_frames(gt_dir);
    if (rec.count() == 0 || rec.count() != gt.count())
      throw std::runtime_error("eval: reconstruction and GT frame counts differ");
    std::ostringstream csv;
    csv << "frame,psnr,ssim\n";
    double psnr_mean = 0.0, ssim_mean = 0.0;
    for (int k = 0; k < rec.count(); ++k) {
      const double p = metrics::psnr(rec.frames[k], gt.frames[k]);
      const double s = metrics::ssim(rec.frames[k], gt.frames[k]);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", k, p, s);
      csv << buf;
      psnr_mean += p / rec.count();
      ssim_mean += s / rec.count();
    }
    ordered_json m;
    m["psnr_mean"] = psnr_mean;
    m["ssim_mean"] = ssim_mean;
    if (rec.count() >= 7) m["ssim3d"] = metrics::ssim3d(rec, gt);
    if (!vid_losses.empty()) {
      const auto l = parse_double_list(vid_losses);
      if (l.size() != 3) throw std::runtime_error("--vid-losses needs exactly 3 values");
      m["vid_db"] = metrics::vid_aggregate(l[0], l[1], l[2]);
    }
    io::write_text_file(ctx.out_dir / "metrics.csv", csv.str());
    io::write_text_file(ctx.out_dir / "metrics.json", m.dump(2) + "\n");
    ctx.outputs.insert(ctx.outputs.end(), {"metrics.csv", "metrics.json"});
    ctx.close();
    return 0;
  }

  if (*c_sweep) {
    ctx.open(cfg, "sweep-noise", cfg.output);
    if (!config_path.empty()) ctx.add_input_file(config_path);
    const auto schedule = load_schedule(cfg.schedule, cfg, &ctx.inputs);
    const auto stack = stack_for(schedule);
    metrics::SweepSpec spec;
    spec.sigmas = parse_double_list(sigmas_str);
    spec.exposure_ratios = parse_double_list(ratios_str);
    spec.scenes = load_sweep_scenes(scenes_spec, cfg, ctx);
    spec.seed = cfg.seed;
    spec.coding = sweep_uncoded ? metrics::SweepCoding::Uncoded : metrics::SweepCoding::Coded;
    spec.decoder =
        sweep_identity ? metrics::SweepDecoder::Identity : metrics::SweepDecoder::Tikhonov;
    spec.horizontal_grid = cfg.horizontal_only;
    spec.grid_step = cfg.grid_step;
    const auto rows = metrics::noise_sweep(spec, stack, cfg.decoder);
    io::write_text_file(ctx.out_dir / "sweep.csv", metrics::sweep_csv(rows));
    ctx.outputs.emplace_back("sweep.csv");
    ctx.close();
    return 0;
  }

  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  try {
    return run_impl(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace codedblur::cli
