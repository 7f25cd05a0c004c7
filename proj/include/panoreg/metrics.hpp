#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "panoreg/errors.hpp"
#include "panoreg/fusion.hpp"
#include "panoreg/horizon.hpp"
#include "panoreg/pose.hpp"

namespace panoreg {

// Registration errors for one panorama pair, in degrees.
struct PairErrors {
  double rot_err = 0.0;        // [0, 180]
  double trans_ang_err = 0.0;  // [0, 180]
  bool pose_valid = true;

  static PairErrors failed() {
    return PairErrors{std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity(), false};
  }
};

// Angular pose errors: rotation error is the wrapped angle difference,
// translation error the angle between the two translation vectors. A
// near-zero ground-truth translation compares magnitudes instead: 0 if the
// estimate is also near zero, 180 otherwise.
inline PairErrors angular_errors(const PlanarPose& est, const PlanarPose& gt,
                                 double zero_eps = 1e-9) {
  PairErrors e;
  e.rot_err = std::abs(degrees(wrap_angle(est.theta - gt.theta)));
  const double gt_norm = gt.t.norm();
  const double est_norm = est.t.norm();
  if (gt_norm < zero_eps) {
    e.trans_ang_err = (est_norm < zero_eps) ? 0.0 : 180.0;
  } else if (est_norm < zero_eps) {
    e.trans_ang_err = 180.0;
  } else {
    e.trans_ang_err = degrees(std::atan2(std::abs(est.t.cross(gt.t)), est.t.dot(gt.t)));
  }
  return e;
}

// Mean average accuracy: mean over integer sub-thresholds t = 1..threshold
// of the fraction of errors <= t degrees. Failures enter as +inf and count
// as misses at every sub-threshold.
inline double maa(const std::vector<double>& errors_deg, int threshold_deg) {
  if (errors_deg.empty()) throw Error(ErrorCode::kEmptyInput, "maa over empty error list");
  if (threshold_deg < 1) throw Error(ErrorCode::kEmptyInput, "maa threshold must be >= 1");
  double acc_sum = 0.0;
  for (int t = 1; t <= threshold_deg; ++t) {
    std::size_t hits = 0;
    for (double e : errors_deg) {
      if (e <= static_cast<double>(t)) ++hits;
    }
    acc_sum += static_cast<double>(hits) / static_cast<double>(errors_deg.size());
  }
  return acc_sum / static_cast<double>(threshold_deg);
}

inline double iou_2d(const LayoutSolid& pred, const LayoutSolid& gt) {
  const double inter = footprint_overlap_area(pred.footprint, gt.footprint);
  const double uni = pred.area() + gt.area() - inter;
  if (uni <= 0.0) throw Error(ErrorCode::kClippingFailure, "iou_2d union has no area");
  return inter / uni;
}

// Volume IoU of the extruded prisms; both share the floor plane y = -1.
inline double iou_3d(const LayoutSolid& pred, const LayoutSolid& gt) {
  const double inter_area = footprint_overlap_area(pred.footprint, gt.footprint);
  const double v_inter = inter_area * std::min(pred.height, gt.height);
  const double v_union = pred.area() * pred.height + gt.area() * gt.height - v_inter;
  if (v_union <= 0.0) throw Error(ErrorCode::kClippingFailure, "iou_3d union has no volume");
  return v_inter / v_union;
}

// Depth-threshold accuracy: fraction of samples with
// max(pred/gt, gt/pred) < 1.25^i.
inline double delta_metric(const HorizonDepthMap& pred, const HorizonDepthMap& gt, int i = 1) {
  if (pred.values.size() != gt.values.size()) {
    throw Error(ErrorCode::kLengthMismatch, "delta_metric maps must have equal length");
  }
  if (pred.values.empty()) throw Error(ErrorCode::kEmptyInput, "delta_metric on empty maps");
  const double bound = std::pow(1.25, i);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < pred.values.size(); ++k) {
    const double d = pred.values[k];
    const double g = gt.values[k];
    if (!(d > 0.0) || !(g > 0.0)) {
      throw Error(ErrorCode::kNonPositiveDepth, "delta_metric needs positive depths");
    }
    if (std::max(d / g, g / d) < bound) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(pred.values.size());
}

// One evaluated pair, as reported in the CSV.
struct PairRecord {
  std::string scene_id;
  PairErrors errors = PairErrors::failed();
  double iou2d = 0.0;
  double iou3d = 0.0;
  double delta1 = 0.0;
  bool success = false;
};

struct MetricsReport {
  std::vector<PairRecord> pairs;

  std::size_t success_count() const {
    std::size_t c = 0;
    for (const PairRecord& p : pairs) c += p.success ? 1 : 0;
    return c;
  }

  std::vector<double> rot_errors() const {
    std::vector<double> e;
    e.reserve(pairs.size());
    for (const PairRecord& p : pairs) e.push_back(p.errors.rot_err);
    return e;
  }

  std::vector<double> trans_errors() const {
    std::vector<double> e;
    e.reserve(pairs.size());
    for (const PairRecord& p : pairs) e.push_back(p.errors.trans_ang_err);
    return e;
  }

  double r_maa(int threshold) const { return maa(rot_errors(), threshold); }
  double t_maa(int threshold) const { return maa(trans_errors(), threshold); }

  // Mean of a per-pair field over all pairs (failures contribute their
  // stored value, typically 0 for IoU-style fields).
  template <typename Getter>
  double mean_over_all(Getter&& get) const {
    if (pairs.empty()) throw Error(ErrorCode::kEmptyInput, "empty metrics report");
    double sum = 0.0;
    for (const PairRecord& p : pairs) sum += get(p);
    return sum / static_cast<double>(pairs.size());
  }

  // Mean of an angular error over successful pairs only; +inf if none.
  template <typename Getter>
  double mean_over_successful(Getter&& get) const {
    double sum = 0.0;
    std::size_t count = 0;
    for (const PairRecord& p : pairs) {
      if (p.success) {
        sum += get(p);
        ++count;
      }
    }
    return count > 0 ? sum / static_cast<double>(count)
                     : std::numeric_limits<double>::infinity();
  }
};

}  // namespace panoreg
