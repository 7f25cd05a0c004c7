#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "panoreg/io.hpp"
#include "panoreg/pipeline.hpp"
#include "panoreg/scene.hpp"

namespace panoreg {

// Noise-robustness sweep: a Cartesian grid of noise cells, each evaluated
// on the same base set of scenes (paired design; only the noise changes
// across cells). Deterministic given the base seed.
struct SweepConfig {
  std::vector<double> sigma_v{0.0};
  std::vector<double> sigma_o{0.0};
  std::vector<double> outlier_frac{0.0};
  std::vector<double> flip_p{0.0};
  int scenes_per_cell = 10;
  std::uint64_t base_seed = 0;
  std::size_t grid_n = 256;
  RoomSpec room;
  RansacConfig ransac;
};

inline SweepConfig sweep_config_from_json(const Json& j) {
  io_detail::check_header(j, "sweep_config");
  SweepConfig cfg;
  const Json& grid = io_detail::require(j, "grid");
  auto axis = [&](const char* key) {
    const std::vector<double> v = io_detail::double_array(grid, key, 0);
    if (v.empty()) {
      throw Error(ErrorCode::kSchemaError, std::string("sweep axis '") + key + "' is empty");
    }
    return v;
  };
  cfg.sigma_v = axis("sigma_v");
  cfg.sigma_o = axis("sigma_o");
  cfg.outlier_frac = axis("outlier_frac");
  cfg.flip_p = axis("flip_p");
  const Json& per_cell = io_detail::require(j, "scenes_per_cell");
  if (!per_cell.is_number_integer() || per_cell.get<int>() < 1) {
    throw Error(ErrorCode::kSchemaError, "scenes_per_cell must be >= 1");
  }
  cfg.scenes_per_cell = per_cell.get<int>();
  cfg.base_seed = io_detail::require(j, "base_seed").get<std::uint64_t>();
  if (j.contains("grid_n")) cfg.grid_n = j.at("grid_n").get<std::size_t>();
  if (j.contains("room")) {
    const Json& room = j.at("room");
    if (room.contains("vertex_budget")) cfg.room.vertex_budget = room.at("vertex_budget").get<std::size_t>();
    if (room.contains("extent")) cfg.room.extent = room.at("extent").get<double>();
    if (room.contains("manhattan")) cfg.room.manhattan = room.at("manhattan").get<bool>();
  }
  if (j.contains("ransac")) {
    const Json& r = j.at("ransac");
    if (r.contains("iterations")) cfg.ransac.iterations = r.at("iterations").get<int>();
    if (r.contains("inlier_tol")) cfg.ransac.inlier_tol = r.at("inlier_tol").get<double>();
    if (r.contains("covis_threshold")) cfg.ransac.covis_threshold = r.at("covis_threshold").get<double>();
    if (r.contains("min_inliers")) cfg.ransac.min_inliers = r.at("min_inliers").get<int>();
    if (r.contains("estimate_scale")) cfg.ransac.estimate_scale = r.at("estimate_scale").get<bool>();
  }
  return cfg;
}

struct SweepRow {
  double sigma_v = 0.0, sigma_o = 0.0, outlier_frac = 0.0, flip_p = 0.0;
  int n_scenes = 0;
  double success_rate = 0.0;
  double mean_rot_err = 0.0;    // over successful pairs
  double mean_trans_err = 0.0;  // over successful pairs
  double r_maa5 = 0.0, r_maa10 = 0.0, t_maa5 = 0.0, t_maa10 = 0.0;
  double mean_iou2d = 0.0, mean_iou3d = 0.0, mean_delta1 = 0.0;
};

inline std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  // The same scenes are reused in every cell so curves compare like with
  // like; noise seeds vary per (cell, scene).
  std::vector<RoomScene> scenes;
  scenes.reserve(static_cast<std::size_t>(cfg.scenes_per_cell));
  for (int s = 0; s < cfg.scenes_per_cell; ++s) {
    const std::uint64_t scene_seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(s));
    RoomSpec room_spec = cfg.room;
    room_spec.seed = scene_seed;
    scenes.push_back(make_scene(generate_room(room_spec), derive_seed(scene_seed, 1)));
  }
  const SampleGrid grid(cfg.grid_n);

  std::vector<SweepRow> rows;
  std::size_t cell = 0;
  for (double sv : cfg.sigma_v) {
    for (double so : cfg.sigma_o) {
      for (double of : cfg.outlier_frac) {
        for (double fp : cfg.flip_p) {
          SweepRow row;
          row.sigma_v = sv;
          row.sigma_o = so;
          row.outlier_frac = of;
          row.flip_p = fp;
          row.n_scenes = cfg.scenes_per_cell;
          MetricsReport report;
          for (int s = 0; s < cfg.scenes_per_cell; ++s) {
            NoiseSpec noise;
            noise.sigma_v = sv;
            noise.sigma_o = so;
            noise.outlier_frac = of;
            noise.flip_p = fp;
            noise.seed = derive_seed(cfg.base_seed,
                                     0x1000000ULL + cell * static_cast<std::size_t>(cfg.scenes_per_cell) +
                                         static_cast<std::size_t>(s));
            RansacConfig ransac = cfg.ransac;
            ransac.seed = derive_seed(noise.seed, 9);
            const PairOutcome outcome = evaluate_scene_pair(scenes[static_cast<std::size_t>(s)],
                                                            grid, noise, ransac);
            PairRecord rec;
            rec.errors = outcome.errors;
            rec.iou2d = outcome.iou2d;
            rec.iou3d = outcome.iou3d;
            rec.delta1 = outcome.delta1;
            rec.success = outcome.success;
            report.pairs.push_back(rec);
          }
          row.success_rate = static_cast<double>(report.success_count()) /
                             static_cast<double>(report.pairs.size());
          row.mean_rot_err =
              report.mean_over_successful([](const PairRecord& p) { return p.errors.rot_err; });
          row.mean_trans_err = report.mean_over_successful(
              [](const PairRecord& p) { return p.errors.trans_ang_err; });
          row.r_maa5 = report.r_maa(5);
          row.r_maa10 = report.r_maa(10);
          row.t_maa5 = report.t_maa(5);
          row.t_maa10 = report.t_maa(10);
          row.mean_iou2d = report.mean_over_all([](const PairRecord& p) { return p.iou2d; });
          row.mean_iou3d = report.mean_over_all([](const PairRecord& p) { return p.iou3d; });
          row.mean_delta1 = report.mean_over_all([](const PairRecord& p) { return p.delta1; });
          rows.push_back(row);
          ++cell;
        }
      }
    }
  }
  return rows;
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "sigma_v,sigma_o,outlier_frac,flip_p,n_scenes,success_rate,mean_rot_err_deg,"
      "mean_trans_ang_err_deg,r_maa5,r_maa10,t_maa5,t_maa10,mean_iou2d,mean_iou3d,mean_delta1\n";
  for (const SweepRow& r : rows) {
    out += format_metric(r.sigma_v) + "," + format_metric(r.sigma_o) + "," +
           format_metric(r.outlier_frac) + "," + format_metric(r.flip_p) + "," +
           std::to_string(r.n_scenes) + "," + format_metric(r.success_rate) + "," +
           format_metric(r.mean_rot_err) + "," + format_metric(r.mean_trans_err) + "," +
           format_metric(r.r_maa5) + "," + format_metric(r.r_maa10) + "," +
           format_metric(r.t_maa5) + "," + format_metric(r.t_maa10) + "," +
           format_metric(r.mean_iou2d) + "," + format_metric(r.mean_iou3d) + "," +
           format_metric(r.mean_delta1) + "\n";
  }
  return out;
}

}  // namespace panoreg
