#include "panoreg/io.hpp"

#include <filesystem>

#include <gtest/gtest.h>

#include "panoreg/rng.hpp"
#include "panoreg/scene.hpp"
#include "panoreg/sweep.hpp"

namespace panoreg {
namespace {

namespace fs = std::filesystem;

template <typename F>
void ExpectError(F&& f, ErrorCode code) {
  try {
    f();
    FAIL() << "expected " << error_code_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / "panoreg_io_test";
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

TEST_F(IoTest, SceneRoundTripIsExact) {
  const RoomScene scene = make_scene(generate_room({10, 5.0, true, 42}), 43);
  const fs::path file = dir_ / "scene.json";
  write_json_file(file, scene_to_json(scene, 256));
  const auto [loaded, grid_n] = scene_from_json(parse_json_file(file));
  EXPECT_EQ(grid_n, 256u);
  ASSERT_EQ(loaded.room.size(), scene.room.size());
  for (std::size_t i = 0; i < scene.room.size(); ++i) {
    EXPECT_EQ(loaded.room.vertices[i].x, scene.room.vertices[i].x);
    EXPECT_EQ(loaded.room.vertices[i].z, scene.room.vertices[i].z);
  }
  EXPECT_EQ(loaded.cam1.position.x, scene.cam1.position.x);
  EXPECT_EQ(loaded.cam1.yaw, scene.cam1.yaw);
  EXPECT_EQ(loaded.cam2.position.z, scene.cam2.position.z);
  EXPECT_EQ(loaded.ceiling_height, scene.ceiling_height);
}

TEST_F(IoTest, MapsRoundTripIsExact) {
  const RoomScene scene = make_scene(generate_room({10, 5.0, true, 50}), 51);
  auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(64));
  NoiseSpec noise{0.01, 0.01, 0.2, 0.05, 7};
  maps1 = perturb_maps(maps1, noise);
  const MapsPair pair{maps1, maps2, MapsProvenance::kPerturbed};
  const fs::path file = dir_ / "maps.json";
  write_json_file(file, maps_to_json(pair));
  const MapsPair loaded = maps_from_json(parse_json_file(file));
  EXPECT_EQ(loaded.provenance, MapsProvenance::kPerturbed);
  EXPECT_EQ(loaded.pano1.ceiling.values, maps1.ceiling.values);
  EXPECT_EQ(loaded.pano1.floor.values, maps1.floor.values);
  EXPECT_EQ(loaded.pano1.correspondence, maps1.correspondence);
  EXPECT_EQ(loaded.pano1.covisibility, maps1.covisibility);
  EXPECT_EQ(loaded.pano2.ceiling.values, maps2.ceiling.values);
}

TEST_F(IoTest, PoseAndLayoutRoundTrip) {
  RegistrationResult res;
  res.pose = PlanarPose(0.7, {1.25, -3.5});
  res.rmse = 0.001953125;
  res.inlier_mask = {true, false, true};
  res.n_candidates = 512;
  const fs::path pose_file = dir_ / "pose.json";
  write_json_file(pose_file, pose_result_to_json(res));
  const PoseFile loaded = pose_from_json(parse_json_file(pose_file));
  EXPECT_TRUE(loaded.success);
  EXPECT_DOUBLE_EQ(loaded.pose.theta, res.pose.theta);
  EXPECT_EQ(loaded.pose.t.x, res.pose.t.x);
  EXPECT_EQ(loaded.rmse, res.rmse);
  EXPECT_EQ(loaded.n_inliers, 2u);

  LayoutSolid layout;
  layout.footprint = footprint_from_ring({{0, 0}, {2, 0}, {2, 2}, {0, 2}});
  layout.footprint.parts[0].holes.push_back(Ring{{0.5, 0.5}, {0.5, 1.0}, {1.0, 1.0}, {1.0, 0.5}});
  layout.height = 2.25;
  layout.disconnected = false;
  layout.repaired = true;
  const fs::path layout_file = dir_ / "layout.json";
  write_json_file(layout_file, layout_to_json(layout));
  const LayoutSolid loaded_layout = layout_from_json(parse_json_file(layout_file));
  EXPECT_EQ(loaded_layout.height, 2.25);
  EXPECT_TRUE(loaded_layout.repaired);
  ASSERT_EQ(loaded_layout.footprint.parts.size(), 1u);
  ASSERT_EQ(loaded_layout.footprint.parts[0].holes.size(), 1u);
  EXPECT_NEAR(footprint_area(loaded_layout.footprint), 4.0 - 0.25, 1e-12);
}

TEST_F(IoTest, FailedPoseFile) {
  const Error failure(ErrorCode::kNoConsensus, "no model reached the inlier minimum");
  const fs::path file = dir_ / "pose_failed.json";
  write_json_file(file, pose_failure_to_json(failure));
  const PoseFile loaded = pose_from_json(parse_json_file(file));
  EXPECT_FALSE(loaded.success);
}

TEST_F(IoTest, SchemaRejection) {
  const RoomScene scene = make_scene(generate_room({8, 5.0, true, 60}), 61);
  Json j = scene_to_json(scene, 64);

  Json wrong_version = j;
  wrong_version["format_version"] = 2;
  ExpectError([&] { scene_from_json(wrong_version); }, ErrorCode::kSchemaError);

  Json wrong_type = j;
  wrong_type["type"] = "horizon_maps";
  ExpectError([&] { scene_from_json(wrong_type); }, ErrorCode::kSchemaError);

  Json missing = j;
  missing.erase("ceiling_height");
  ExpectError([&] { scene_from_json(missing); }, ErrorCode::kSchemaError);

  Json low_ceiling = j;
  low_ceiling["ceiling_height"] = 0.8;  // below camera height
  ExpectError([&] { scene_from_json(low_ceiling); }, ErrorCode::kSchemaError);

  Json cam_outside = j;
  cam_outside["cam1"]["position"] = Json::array({100.0, 100.0});
  ExpectError([&] { scene_from_json(cam_outside); }, ErrorCode::kSchemaError);

  auto [maps1, maps2] = ground_truth_maps(scene, SampleGrid(64));
  Json maps_json = maps_to_json(MapsPair{maps1, maps2, MapsProvenance::kOracle});
  Json bad_floor = maps_json;
  bad_floor["pano1"]["floor"][0] = -0.5;  // floor values must be positive
  ExpectError([&] { maps_from_json(bad_floor); }, ErrorCode::kSchemaError);
  Json bad_corr = maps_json;
  bad_corr["pano1"]["correspondence"][3] = 1.0;  // o must be < 1
  ExpectError([&] { maps_from_json(bad_corr); }, ErrorCode::kSchemaError);
  Json bad_len = maps_json;
  bad_len["pano1"]["covisibility"].erase(0);
  ExpectError([&] { maps_from_json(bad_len); }, ErrorCode::kSchemaError);
  Json bad_prov = maps_json;
  bad_prov["provenance"] = "network";
  ExpectError([&] { maps_from_json(bad_prov); }, ErrorCode::kSchemaError);
}

TEST_F(IoTest, FileErrors) {
  ExpectError([&] { read_file(dir_ / "missing.json"); }, ErrorCode::kIoError);
  const fs::path garbled = dir_ / "garbled.json";
  atomic_write_file(garbled, "{not json");
  ExpectError([&] { parse_json_file(garbled); }, ErrorCode::kSchemaError);
  EXPECT_EQ(read_file(garbled), "{not json");
  EXPECT_FALSE(fs::exists(dir_ / "garbled.json.tmp"));
}

TEST_F(IoTest, MetricsCsvFormatting) {
  MetricsReport report;
  PairRecord ok;
  ok.scene_id = "000";
  ok.errors = PairErrors{1.5, 2.25, true};
  ok.iou2d = 0.5;
  ok.iou3d = 1.0 / 3.0;
  ok.delta1 = 1.0;
  ok.success = true;
  PairRecord bad;
  bad.scene_id = "001";
  report.pairs = {ok, bad};
  const std::string csv = metrics_to_csv(report);
  EXPECT_NE(csv.find("000,1.500000,2.250000,0.500000,0.333333,1.000000,1\n"), std::string::npos);
  EXPECT_NE(csv.find("001,inf,inf,0.000000,0.000000,0.000000,0\n"), std::string::npos);
  // Aggregate angular means run over successful pairs only.
  EXPECT_NE(csv.find("aggregate,1.500000,2.250000,0.250000,0.166667,0.500000,0.500000\n"),
            std::string::npos);
  EXPECT_NE(csv.find("scene_id,rot_err_deg,trans_ang_err_deg,iou2d,iou3d,delta1,success"),
            std::string::npos);
}

TEST_F(IoTest, ObjExportShape) {
  LayoutSolid layout;
  layout.footprint = footprint_from_ring({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  layout.height = 2.0;
  const std::string obj = layout_to_obj(layout);
  // 4 floor + 4 ceiling vertices, 4 wall quads + floor + ceiling faces.
  std::size_t v_count = 0, f_count = 0, pos = 0;
  for (pos = obj.find("\nv "); pos != std::string::npos; pos = obj.find("\nv ", pos + 1)) ++v_count;
  for (pos = obj.find("\nf "); pos != std::string::npos; pos = obj.find("\nf ", pos + 1)) ++f_count;
  if (obj.rfind("v ", 0) == 0) ++v_count;
  EXPECT_EQ(v_count, 8u);
  EXPECT_EQ(f_count, 6u);
}

TEST_F(IoTest, SweepConfigParsing) {
  Json j;
  j["format_version"] = 1;
  j["type"] = "sweep_config";
  j["grid"] = Json{{"sigma_v", Json::array({0.0, 0.01})},
                   {"sigma_o", Json::array({0.005})},
                   {"outlier_frac", Json::array({0.0, 0.3})},
                   {"flip_p", Json::array({0.0})}};
  j["scenes_per_cell"] = 5;
  j["base_seed"] = 99;
  j["grid_n"] = 128;
  j["room"] = Json{{"vertex_budget", 8}, {"extent", 4.5}, {"manhattan", false}};
  j["ransac"] = Json{{"iterations", 500}, {"min_inliers", 10}};
  const SweepConfig cfg = sweep_config_from_json(j);
  EXPECT_EQ(cfg.sigma_v.size(), 2u);
  EXPECT_EQ(cfg.scenes_per_cell, 5);
  EXPECT_EQ(cfg.base_seed, 99u);
  EXPECT_EQ(cfg.grid_n, 128u);
  EXPECT_FALSE(cfg.room.manhattan);
  EXPECT_EQ(cfg.ransac.iterations, 500);
  EXPECT_EQ(cfg.ransac.min_inliers, 10);

  Json empty_axis = j;
  empty_axis["grid"]["sigma_v"] = Json::array();
  ExpectError([&] { sweep_config_from_json(empty_axis); }, ErrorCode::kSchemaError);
  Json bad_cells = j;
  bad_cells["scenes_per_cell"] = 0;
  ExpectError([&] { sweep_config_from_json(bad_cells); }, ErrorCode::kSchemaError);
}

}  // namespace
}  // namespace panoreg
