#pragma once

#include <utility>
#include <vector>

#include "panoreg/fusion.hpp"
#include "panoreg/metrics.hpp"
#include "panoreg/registration.hpp"
#include "panoreg/scene.hpp"

namespace panoreg {

// End-to-end outcome for one scene: oracle maps (optionally perturbed),
// registration, fusion, and metrics against the ground truth.
struct PairOutcome {
  bool success = false;
  RegistrationResult registration;  // meaningful only on success
  PairErrors errors = PairErrors::failed();
  double iou2d = 0.0;
  double iou3d = 0.0;
  double delta1 = 0.0;
};

// Predicted depth maps (floor at exact height 1, ceiling at the estimated
// layout height) concatenated for both panoramas, with the matching
// ground-truth cast depths; the delta metric runs over this fused set.
inline std::pair<HorizonDepthMap, HorizonDepthMap> fused_depth_sets(
    const HorizonMaps& maps1, const HorizonMaps& maps2, const RoomScene& scene,
    const SampleGrid& grid) {
  HorizonDepthMap pred, gt;
  auto append = [&](const HorizonMaps& maps, const Camera& cam) {
    const HorizonDepthMap truth = cast_horizon_depth(scene.room, cam.position, cam.yaw, grid);
    const double height = estimate_layout_height(maps.ceiling, maps.floor);
    const HorizonDepthMap floor = boundary_to_depth(maps.floor, 1.0);
    const HorizonDepthMap ceiling = boundary_to_depth(maps.ceiling, height - 1.0);
    pred.values.insert(pred.values.end(), floor.values.begin(), floor.values.end());
    gt.values.insert(gt.values.end(), truth.values.begin(), truth.values.end());
    pred.values.insert(pred.values.end(), ceiling.values.begin(), ceiling.values.end());
    gt.values.insert(gt.values.end(), truth.values.begin(), truth.values.end());
  };
  append(maps1, scene.cam1);
  append(maps2, scene.cam2);
  return {std::move(pred), std::move(gt)};
}

inline PairOutcome evaluate_scene_pair(const RoomScene& scene, const SampleGrid& grid,
                                       const NoiseSpec& noise, const RansacConfig& cfg) {
  auto [maps1, maps2] = ground_truth_maps(scene, grid);
  if (!noise.is_zero()) {
    NoiseSpec n1 = noise;
    n1.seed = derive_seed(noise.seed, 0);
    NoiseSpec n2 = noise;
    n2.seed = derive_seed(noise.seed, 1);
    maps1 = perturb_maps(maps1, n1);
    maps2 = perturb_maps(maps2, n2);
  }

  PairOutcome out;
  const auto [pred_depth, gt_depth] = fused_depth_sets(maps1, maps2, scene, grid);
  out.delta1 = delta_metric(pred_depth, gt_depth, 1);

  try {
    out.registration = register_maps(maps1, maps2, cfg);
  } catch (const Error& e) {
    if (e.is_registration_failure()) return out;  // success stays false
    throw;
  }
  out.success = true;
  out.errors = angular_errors(out.registration.pose, scene.relative_pose());

  const LayoutSolid layout1 = boundary_to_layout(maps1, grid);
  const LayoutSolid layout2 = boundary_to_layout(maps2, grid);
  const LayoutSolid fused = union_layouts(layout1, apply_pose(layout2, out.registration.pose));
  const LayoutSolid truth = scene_layout(scene);
  out.iou2d = iou_2d(fused, truth);
  out.iou3d = iou_3d(fused, truth);
  return out;
}

}  // namespace panoreg
