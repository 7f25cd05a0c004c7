// panoreg: synthesize two-panorama room scenes, derive horizon maps,
// register them, fuse layouts, and score the results.
//
// Exit codes: 0 success, 1 usage/schema/IO error, 2 registration failure.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panoreg/io.hpp"
#include "panoreg/losses.hpp"
#include "panoreg/pipeline.hpp"
#include "panoreg/sweep.hpp"

namespace fs = std::filesystem;
using namespace panoreg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRegistrationFailure = 2;

std::string scene_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%03d.json", index);
  return buf;
}

std::string pair_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return buf;
}

struct SynthArgs {
  int count = 10;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::string shape = "manhattan";
  std::size_t vertex_budget = 10;
  double extent = 5.0;
  double ceiling_min = 1.6;
  double ceiling_max = 3.0;
  std::size_t grid_n = 256;
};

RoomPolygon synth_room(const SynthArgs& args, std::uint64_t seed) {
  if (args.shape == "manhattan" || args.shape == "star") {
    return generate_room({args.vertex_budget, args.extent, args.shape == "manhattan", seed});
  }
  if (args.shape == "convex") {
    return generate_convex_room(args.vertex_budget, args.extent, seed);
  }
  if (args.shape == "lshape") {
    return generate_l_room(args.extent, seed).room;
  }
  throw Error(ErrorCode::kSchemaError, "unknown shape '" + args.shape + "'");
}

int run_synth(const SynthArgs& args) {
  const fs::path dir(args.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIoError, "cannot create output directory '" + dir.string() + "'");
  }
  Json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["type"] = "manifest";
  manifest["base_seed"] = args.seed;
  manifest["count"] = args.count;
  Json scenes = Json::array();
  for (int i = 0; i < args.count; ++i) {
    const std::uint64_t scene_seed = derive_seed(args.seed, static_cast<std::uint64_t>(i));
    RoomScene scene;
    if (args.shape == "lshape") {
      scene = make_l_scene(args.extent, scene_seed);
      scene.ceiling_height =
          Rng(derive_seed(scene_seed, 3)).uniform(args.ceiling_min, args.ceiling_max);
    } else {
      scene = make_scene(synth_room(args, scene_seed), derive_seed(scene_seed, 1),
                         args.ceiling_min, args.ceiling_max);
    }
    const std::string file = scene_file_name(i);
    write_json_file(dir / file, scene_to_json(scene, args.grid_n));
    scenes.push_back(Json{{"id", pair_id(i)}, {"file", file}, {"seed", scene_seed}});
  }
  manifest["scenes"] = scenes;
  write_json_file(dir / "manifest.json", manifest);
  return kExitOk;
}

std::vector<std::pair<std::string, fs::path>> manifest_scenes(const fs::path& dir) {
  const Json manifest = parse_json_file(dir / "manifest.json");
  io_detail::check_header(manifest, "manifest");
  std::vector<std::pair<std::string, fs::path>> out;
  for (const Json& entry : io_detail::require(manifest, "scenes")) {
    out.emplace_back(io_detail::require(entry, "id").get<std::string>(),
                     dir / io_detail::require(entry, "file").get<std::string>());
  }
  return out;
}

MapsPair oracle_maps_for_scene(const fs::path& scene_file, std::size_t grid_override) {
  const auto [scene, grid_n] = scene_from_json(parse_json_file(scene_file));
  const SampleGrid grid(grid_override > 0 ? grid_override : grid_n);
  auto [maps1, maps2] = ground_truth_maps(scene, grid);
  return MapsPair{std::move(maps1), std::move(maps2), MapsProvenance::kOracle};
}

int run_gt_maps(const std::string& scene_path, const std::string& out_path,
                const std::string& dir_path, std::size_t grid_override) {
  if (!dir_path.empty()) {
    const fs::path dir(dir_path);
    for (const auto& [id, scene_file] : manifest_scenes(dir)) {
      const MapsPair maps = oracle_maps_for_scene(scene_file, grid_override);
      write_json_file(dir / ("maps_" + id + ".oracle.json"), maps_to_json(maps));
    }
    return kExitOk;
  }
  const MapsPair maps = oracle_maps_for_scene(scene_path, grid_override);
  write_json_file(out_path, maps_to_json(maps));
  return kExitOk;
}

int run_perturb(const std::string& maps_path, const std::string& out_path,
                const std::string& dir_path, const NoiseSpec& noise) {
  auto perturb_pair = [&](const MapsPair& maps, std::uint64_t seed) {
    MapsPair out = maps;
    NoiseSpec n1 = noise;
    n1.seed = derive_seed(seed, 0);
    NoiseSpec n2 = noise;
    n2.seed = derive_seed(seed, 1);
    out.pano1 = perturb_maps(maps.pano1, n1);
    out.pano2 = perturb_maps(maps.pano2, n2);
    out.provenance = MapsProvenance::kPerturbed;
    return out;
  };
  if (!dir_path.empty()) {
    const fs::path dir(dir_path);
    std::uint64_t index = 0;
    for (const auto& [id, scene_file] : manifest_scenes(dir)) {
      (void)scene_file;
      const MapsPair maps =
          maps_from_json(parse_json_file(dir / ("maps_" + id + ".oracle.json")));
      const MapsPair noisy = perturb_pair(maps, derive_seed(noise.seed, index++));
      write_json_file(dir / ("maps_" + id + ".perturbed.json"), maps_to_json(noisy));
    }
    return kExitOk;
  }
  const MapsPair maps = maps_from_json(parse_json_file(maps_path));
  write_json_file(out_path, maps_to_json(perturb_pair(maps, noise.seed)));
  return kExitOk;
}

int run_register(const std::string& maps_path, const std::string& out_path,
                 const RansacConfig& cfg) {
  const MapsPair maps = maps_from_json(parse_json_file(maps_path));
  try {
    const RegistrationResult result = register_maps(maps.pano1, maps.pano2, cfg);
    write_json_file(out_path, pose_result_to_json(result));
  } catch (const Error& e) {
    if (!e.is_registration_failure()) throw;
    write_json_file(out_path, pose_failure_to_json(e));
    std::cerr << e.what() << "\n";
    return kExitRegistrationFailure;
  }
  return kExitOk;
}

int run_fuse(const std::string& maps_path, const std::string& pose_path,
             const std::string& out_path, const std::string& mesh_path,
             const std::string& boundary) {
  const MapsPair maps = maps_from_json(parse_json_file(maps_path));
  const PoseFile pose = pose_from_json(parse_json_file(pose_path));
  if (!pose.success) {
    std::cerr << "pose file records a failed registration; nothing to fuse\n";
    return kExitRegistrationFailure;
  }
  const SampleGrid grid(maps.grid_n());
  const BoundarySource source =
      boundary == "ceiling" ? BoundarySource::kCeiling : BoundarySource::kFloor;
  const LayoutSolid l1 = boundary_to_layout(maps.pano1, grid, source);
  const LayoutSolid l2 = boundary_to_layout(maps.pano2, grid, source);
  const LayoutSolid fused = union_layouts(l1, apply_pose(l2, pose.pose));
  write_json_file(out_path, layout_to_json(fused));
  if (!mesh_path.empty()) {
    atomic_write_file(mesh_path, layout_to_obj(fused));
  }
  return kExitOk;
}

struct EvalInputs {
  std::string id;
  fs::path scene;
  fs::path maps;  // maps actually registered (possibly perturbed)
  std::optional<fs::path> oracle_maps;
  fs::path pose;
  std::optional<fs::path> layout;
};

PairRecord evaluate_pair(const EvalInputs& in, bool with_losses, std::string* loss_lines) {
  const auto [scene, scene_grid_n] = scene_from_json(parse_json_file(in.scene));
  const MapsPair maps = maps_from_json(parse_json_file(in.maps));
  const SampleGrid grid(maps.grid_n());
  const PoseFile pose = pose_from_json(parse_json_file(in.pose));

  PairRecord rec;
  rec.scene_id = in.id;
  const auto [pred_depth, gt_depth] = fused_depth_sets(maps.pano1, maps.pano2, scene, grid);
  rec.delta1 = delta_metric(pred_depth, gt_depth, 1);
  if (pose.success) {
    rec.success = true;
    rec.errors = angular_errors(pose.pose, scene.relative_pose());
    if (in.layout) {
      const LayoutSolid layout = layout_from_json(parse_json_file(*in.layout));
      const LayoutSolid truth = scene_layout(scene);
      rec.iou2d = iou_2d(layout, truth);
      rec.iou3d = iou_3d(layout, truth);
    }
  }

  if (with_losses && loss_lines) {
    MapsPair oracle;
    if (in.oracle_maps) {
      oracle = maps_from_json(parse_json_file(*in.oracle_maps));
    } else {
      auto [gt1, gt2] = ground_truth_maps(scene, grid);
      oracle = MapsPair{std::move(gt1), std::move(gt2), MapsProvenance::kOracle};
    }
    auto depth_set = [&](const MapsPair& pair) {
      const double h1 = estimate_layout_height(pair.pano1.ceiling, pair.pano1.floor);
      const double h2 = estimate_layout_height(pair.pano2.ceiling, pair.pano2.floor);
      return std::array<HorizonDepthMap, 4>{
          boundary_to_depth(pair.pano1.floor, 1.0),
          boundary_to_depth(pair.pano1.ceiling, h1 - 1.0),
          boundary_to_depth(pair.pano2.floor, 1.0),
          boundary_to_depth(pair.pano2.ceiling, h2 - 1.0)};
    };
    LossComponents c;
    c.layout = layout_loss(depth_set(maps), depth_set(oracle));
    c.correspondence =
        correspondence_loss(maps.pano1.correspondence, oracle.pano1.correspondence,
                            oracle.pano1.covisibility);
    const LossWeights weights;
    c.covisibility =
        covis_loss(maps.pano1.covisibility, oracle.pano1.covisibility, weights.alpha);
    // Cycle terms: the predicted reverse maps evaluated at the oracle
    // forward correspondence positions should return the query u and the
    // oracle covisibility.
    std::vector<double> composed_corr(grid.n), composed_covis(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
      const double pos = oracle.pano1.correspondence[i] * static_cast<double>(grid.n);
      composed_corr[i] = interp_cyclic(maps.pano2.correspondence, pos);
      composed_covis[i] = interp_cyclic(maps.pano2.covisibility, pos);
    }
    std::tie(c.cycle_correspondence, c.cycle_covisibility) = cycle_losses(
        composed_corr, composed_covis, grid, oracle.pano1.covisibility, weights.alpha);
    *loss_lines += "# losses " + in.id + ": layout=" + format_metric(c.layout) +
                   " corr=" + format_metric(c.correspondence) +
                   " covis=" + format_metric(c.covisibility) +
                   " cycle_corr=" + format_metric(c.cycle_correspondence) +
                   " cycle_covis=" + format_metric(c.cycle_covisibility) +
                   " total=" + format_metric(total_loss(c, weights)) + "\n";
  }
  return rec;
}

int run_eval(const EvalInputs& single, const std::string& dir_path, const std::string& out_path,
             bool with_losses) {
  MetricsReport report;
  std::string loss_lines;
  if (!dir_path.empty()) {
    const fs::path dir(dir_path);
    for (const auto& [id, scene_file] : manifest_scenes(dir)) {
      EvalInputs in;
      in.id = id;
      in.scene = scene_file;
      const fs::path perturbed = dir / ("maps_" + id + ".perturbed.json");
      const fs::path oracle = dir / ("maps_" + id + ".oracle.json");
      in.maps = fs::exists(perturbed) ? perturbed : oracle;
      if (fs::exists(oracle)) in.oracle_maps = oracle;
      in.pose = dir / ("pose_" + id + ".json");
      const fs::path layout = dir / ("layout_" + id + ".json");
      if (fs::exists(layout)) in.layout = layout;
      report.pairs.push_back(evaluate_pair(in, with_losses, &loss_lines));
    }
  } else {
    report.pairs.push_back(evaluate_pair(single, with_losses, &loss_lines));
  }
  atomic_write_file(out_path, loss_lines + metrics_to_csv(report));
  return kExitOk;
}

int run_batch_register_fuse(const std::string& dir_path, const RansacConfig& cfg,
                            const std::string& boundary) {
  // `register --dir`: registers and fuses every manifest pair, producing
  // the per-pair files `eval --dir` expects.
  const fs::path dir(dir_path);
  int failures = 0;
  for (const auto& [id, scene_file] : manifest_scenes(dir)) {
    (void)scene_file;
    const fs::path perturbed = dir / ("maps_" + id + ".perturbed.json");
    const fs::path maps_path =
        fs::exists(perturbed) ? perturbed : dir / ("maps_" + id + ".oracle.json");
    const int rc =
        run_register(maps_path.string(), (dir / ("pose_" + id + ".json")).string(), cfg);
    if (rc != kExitOk) {
      ++failures;
      continue;
    }
    run_fuse(maps_path.string(), (dir / ("pose_" + id + ".json")).string(),
             (dir / ("layout_" + id + ".json")).string(), "", boundary);
  }
  return failures == 0 ? kExitOk : kExitRegistrationFailure;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_path) {
  std::string path = config_path;
  if (path.empty()) {
    if (const char* env = std::getenv("PANOREG_SWEEP_CONFIG")) path = env;
  }
  if (path.empty()) {
    throw Error(ErrorCode::kIoError,
                "no sweep config given (use --config or PANOREG_SWEEP_CONFIG)");
  }
  const SweepConfig cfg = sweep_config_from_json(parse_json_file(path));
  atomic_write_file(out_path, sweep_to_csv(run_sweep(cfg)));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-panorama room layout registration toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::size_t grid_n = 256;
  app.add_option("--seed", seed, "base RNG seed")->capture_default_str();
  app.add_option("--grid-n", grid_n, "horizon samples per panorama")->capture_default_str();
  app.fallthrough();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate ground-truth scene files");
  synth_cmd->add_option("--count", synth.count, "number of scenes")->capture_default_str();
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--shape", synth.shape, "manhattan|star|convex|lshape")
      ->capture_default_str();
  synth_cmd->add_option("--vertex-budget", synth.vertex_budget, "max polygon vertices")
      ->capture_default_str();
  synth_cmd->add_option("--extent", synth.extent, "room size scale")->capture_default_str();
  synth_cmd->add_option("--ceiling-min", synth.ceiling_min, "")->capture_default_str();
  synth_cmd->add_option("--ceiling-max", synth.ceiling_max, "")->capture_default_str();

  std::string scene_path, maps_path, pose_path, layout_path, out_path, dir_path;
  std::string mesh_path, boundary = "floor", oracle_maps_path;

  auto* gt_cmd = app.add_subcommand("gt-maps", "cast oracle horizon maps for scenes");
  gt_cmd->add_option("--scene", scene_path, "scene file");
  gt_cmd->add_option("--out", out_path, "output maps file");
  gt_cmd->add_option("--dir", dir_path, "process a synth output directory");

  NoiseSpec noise;
  auto* perturb_cmd = app.add_subcommand("perturb", "apply calibrated noise to oracle maps");
  perturb_cmd->add_option("--maps", maps_path, "input maps file");
  perturb_cmd->add_option("--out", out_path, "output maps file");
  perturb_cmd->add_option("--dir", dir_path, "process a synth output directory");
  perturb_cmd->add_option("--sigma-v", noise.sigma_v, "boundary noise std")
      ->capture_default_str();
  perturb_cmd->add_option("--sigma-o", noise.sigma_o, "correspondence noise std")
      ->capture_default_str();
  perturb_cmd->add_option("--outlier-frac", noise.outlier_frac,
                          "correspondence outlier fraction")
      ->capture_default_str();
  perturb_cmd->add_option("--flip-p", noise.flip_p, "covisibility flip probability")
      ->capture_default_str();

  RansacConfig ransac;
  auto* register_cmd = app.add_subcommand("register", "estimate the relative pose from maps");
  register_cmd->add_option("--maps", maps_path, "input maps file");
  register_cmd->add_option("--out", out_path, "output pose file");
  register_cmd->add_option("--dir", dir_path, "register+fuse a synth output directory");
  register_cmd->add_option("--iterations", ransac.iterations, "")->capture_default_str();
  register_cmd->add_option("--inlier-tol", ransac.inlier_tol,
                           "inlier radius (<=0: 5% of median depth)")
      ->capture_default_str();
  register_cmd->add_option("--covis-threshold", ransac.covis_threshold, "")
      ->capture_default_str();
  register_cmd->add_option("--min-inliers", ransac.min_inliers, "")->capture_default_str();
  std::string reg_boundary = "ceiling";
  register_cmd->add_option("--boundary", reg_boundary, "ceiling|floor|both")
      ->capture_default_str();
  register_cmd->add_flag("--estimate-scale", ransac.estimate_scale,
                         "fit a similarity instead of a rigid pose");

  auto* fuse_cmd = app.add_subcommand("fuse", "union the two layouts under a pose");
  fuse_cmd->add_option("--maps", maps_path, "input maps file")->required();
  fuse_cmd->add_option("--pose", pose_path, "pose file from register")->required();
  fuse_cmd->add_option("--out", out_path, "output layout file")->required();
  fuse_cmd->add_option("--mesh", mesh_path, "also write an extruded OBJ mesh");
  fuse_cmd->add_option("--boundary", boundary, "floor|ceiling footprint source")
      ->capture_default_str();

  bool with_losses = false;
  auto* eval_cmd = app.add_subcommand("eval", "score layouts and poses against ground truth");
  eval_cmd->add_option("--scene", scene_path, "ground-truth scene file");
  eval_cmd->add_option("--maps", maps_path, "maps used for registration");
  eval_cmd->add_option("--oracle-maps", oracle_maps_path, "oracle maps for --losses");
  eval_cmd->add_option("--pose", pose_path, "estimated pose file");
  eval_cmd->add_option("--layout", layout_path, "fused layout file");
  eval_cmd->add_option("--dir", dir_path, "process a synth output directory");
  eval_cmd->add_option("--out", out_path, "output CSV")->required();
  eval_cmd->add_flag("--losses", with_losses, "also report reference loss values");

  std::string config_path;
  auto* sweep_cmd = app.add_subcommand("sweep", "noise-robustness sweep to CSV");
  sweep_cmd->add_option("--config", config_path, "sweep config JSON");
  sweep_cmd->add_option("--out", out_path, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) {
      synth.seed = seed;
      synth.grid_n = grid_n;
      return run_synth(synth);
    }
    if (gt_cmd->parsed()) {
      const std::size_t grid_override = (app.count("--grid-n") > 0) ? grid_n : 0;
      if (dir_path.empty() && (scene_path.empty() || out_path.empty())) {
        throw Error(ErrorCode::kIoError, "gt-maps needs --dir or both --scene and --out");
      }
      return run_gt_maps(scene_path, out_path, dir_path, grid_override);
    }
    if (perturb_cmd->parsed()) {
      noise.seed = seed;
      if (dir_path.empty() && (maps_path.empty() || out_path.empty())) {
        throw Error(ErrorCode::kIoError, "perturb needs --dir or both --maps and --out");
      }
      return run_perturb(maps_path, out_path, dir_path, noise);
    }
    if (register_cmd->parsed()) {
      ransac.seed = seed;
      if (reg_boundary == "floor") {
        ransac.boundary_source = BoundarySource::kFloor;
      } else if (reg_boundary == "both") {
        ransac.boundary_source = BoundarySource::kBoth;
      } else if (reg_boundary != "ceiling") {
        throw Error(ErrorCode::kSchemaError, "unknown --boundary '" + reg_boundary + "'");
      }
      if (!dir_path.empty()) return run_batch_register_fuse(dir_path, ransac, boundary);
      if (maps_path.empty() || out_path.empty()) {
        throw Error(ErrorCode::kIoError, "register needs --dir or both --maps and --out");
      }
      return run_register(maps_path, out_path, ransac);
    }
    if (fuse_cmd->parsed()) {
      if (boundary != "floor" && boundary != "ceiling") {
        throw Error(ErrorCode::kSchemaError, "unknown --boundary '" + boundary + "'");
      }
      return run_fuse(maps_path, pose_path, out_path, mesh_path, boundary);
    }
    if (eval_cmd->parsed()) {
      EvalInputs in;
      if (dir_path.empty()) {
        if (scene_path.empty() || maps_path.empty() || pose_path.empty()) {
          throw Error(ErrorCode::kIoError, "eval needs --dir or --scene, --maps and --pose");
        }
        in.id = fs::path(scene_path).stem().string();
        in.scene = scene_path;
        in.maps = maps_path;
        if (!oracle_maps_path.empty()) in.oracle_maps = oracle_maps_path;
        in.pose = pose_path;
        if (!layout_path.empty()) in.layout = layout_path;
      }
      return run_eval(in, dir_path, out_path, with_losses);
    }
    if (sweep_cmd->parsed()) {
      return run_sweep_cmd(config_path, out_path);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return e.is_registration_failure() ? kExitRegistrationFailure : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
