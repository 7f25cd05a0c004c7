#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "panoreg/errors.hpp"
#include "panoreg/grid.hpp"
#include "panoreg/horizon.hpp"
#include "panoreg/pose.hpp"
#include "panoreg/rng.hpp"
#include "panoreg/scene.hpp"
#include "panoreg/vec.hpp"

namespace panoreg {

// Matched boundary samples: src points live in the pano-1 frame, dst
// points in the pano-2 frame (obtained by correspondence interpolation),
// weight is the covisibility of the pair.
struct MatchedPairs {
  std::vector<Vec2> src;
  std::vector<Vec2> dst;
  std::vector<double> weight;

  std::size_t size() const { return src.size(); }
};


struct RansacConfig {
  int iterations = 1000;
  // <= 0 selects the data-driven default 0.05 * median(src depths).
  double inlier_tol = 0.0;
  int min_sample = 2;
  double covis_threshold = 0.5;
  int min_inliers = 8;
  std::uint64_t seed = 0;
  BoundarySource boundary_source = BoundarySource::kCeiling;
  // Estimate a similarity (with scale) instead of a rigid transform.
  bool estimate_scale = false;
  // The pano-2 point set is resampled to oversample * n depth samples
  // before correspondence interpolation. The u -> boundary-point map is
  // strongly non-linear where walls graze the view direction, so denser
  // interpolation nodes cut the tangential interpolation bias
  // quadratically.
  int interp_oversample = 8;
};

struct RegistrationResult {
  PlanarPose pose;
  double scale = 1.0;  // 1 unless estimate_scale was set
  std::vector<bool> inlier_mask;
  double rmse = 0.0;  // over inliers only
  int n_candidates = 0;
};

// For each correspondence value o_i, the cyclic linear interpolation of
// the pano-2 boundary points at fractional index o_i * m.
inline std::vector<Vec2> interpolate_correspondence(const PlanePointSet& p2,
                                                    const std::vector<double>& o,
                                                    const SampleGrid& grid) {
  if (p2.points.empty() || o.empty()) {
    throw Error(ErrorCode::kEmptyInput, "interpolate_correspondence needs non-empty inputs");
  }
  if (p2.points.size() != grid.n) {
    throw Error(ErrorCode::kLengthMismatch, "point set does not match the sample grid");
  }
  const double m = static_cast<double>(p2.points.size());
  std::vector<Vec2> out;
  out.reserve(o.size());
  for (double oi : o) {
    out.push_back(interp_cyclic(p2.points, wrap_unit(oi) * m));
  }
  return out;
}

// Keep pairs whose covisibility weight reaches the threshold.
inline MatchedPairs covisibility_filter(const MatchedPairs& pairs, double threshold,
                                        std::size_t min_keep = 2) {
  if (pairs.src.size() != pairs.dst.size() || pairs.src.size() != pairs.weight.size()) {
    throw Error(ErrorCode::kLengthMismatch, "matched pair arrays must have equal length");
  }
  MatchedPairs out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs.weight[i] >= threshold) {
      out.src.push_back(pairs.src[i]);
      out.dst.push_back(pairs.dst[i]);
      out.weight.push_back(pairs.weight[i]);
    }
  }
  if (out.size() < min_keep) {
    throw Error(ErrorCode::kTooFewPairs, "covisibility filter left too few pairs");
  }
  return out;
}

namespace detail {

struct FitSums {
  double sw = 0.0;
  Vec2 src_mean, dst_mean;
  double cross = 0.0, dot = 0.0, dst_var = 0.0;
};

template <typename Pick>
FitSums accumulate_fit(std::size_t n, Pick&& pick) {
  FitSums sums;
  Vec2 src_sum, dst_sum;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [s, d, w] = pick(k);
    src_sum = src_sum + s * w;
    dst_sum = dst_sum + d * w;
    sums.sw += w;
  }
  if (sums.sw <= 0.0) {
    throw Error(ErrorCode::kDegenerateConfiguration, "total fit weight is zero");
  }
  sums.src_mean = src_sum / sums.sw;
  sums.dst_mean = dst_sum / sums.sw;
  for (std::size_t k = 0; k < n; ++k) {
    const auto [s, d, w] = pick(k);
    const Vec2 sc = s - sums.src_mean;
    const Vec2 dc = d - sums.dst_mean;
    sums.cross += w * dc.cross(sc);
    sums.dot += w * dc.dot(sc);
    sums.dst_var += w * dc.squared_norm();
  }
  return sums;
}

inline void fit_from_sums(const FitSums& sums, bool with_scale, PlanarPose& pose,
                          double& scale) {
  const double mag = std::hypot(sums.cross, sums.dot);
  if (mag < 1e-15 * (1.0 + sums.dst_var)) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "points are coincident; rotation is unconstrained");
  }
  const double theta = std::atan2(sums.cross, sums.dot);
  scale = 1.0;
  if (with_scale) {
    if (sums.dst_var <= 0.0) {
      throw Error(ErrorCode::kDegenerateConfiguration, "dst points are coincident");
    }
    scale = mag / sums.dst_var;
  }
  pose = PlanarPose(theta, Vec2{});
  pose.t = sums.src_mean - pose.rotate(sums.dst_mean) * scale;
}

}  // namespace detail

// Weighted least-squares rigid alignment: argmin over (theta, t) of
// sum_i w_i * |R(theta)*dst_i + t - src_i|^2, solved in closed form from
// the centered cross-covariance. Empty `weights` means uniform.
inline PlanarPose fit_rigid_2d(const std::vector<Vec2>& src, const std::vector<Vec2>& dst,
                               const std::vector<double>& weights = {}) {
  if (src.size() != dst.size() || (!weights.empty() && weights.size() != src.size())) {
    throw Error(ErrorCode::kLengthMismatch, "fit_rigid_2d arrays must have equal length");
  }
  if (src.size() < 2) {
    throw Error(ErrorCode::kTooFewPairs, "fit_rigid_2d needs at least 2 points");
  }
  auto pick = [&](std::size_t k) {
    return std::tuple<Vec2, Vec2, double>(src[k], dst[k], weights.empty() ? 1.0 : weights[k]);
  };
  const detail::FitSums sums = detail::accumulate_fit(src.size(), pick);
  PlanarPose pose;
  double scale = 1.0;
  detail::fit_from_sums(sums, /*with_scale=*/false, pose, scale);
  return pose;
}

// Similarity variant (rotation, translation, isotropic scale).
inline std::pair<PlanarPose, double> fit_similarity_2d(const std::vector<Vec2>& src,
                                                       const std::vector<Vec2>& dst,
                                                       const std::vector<double>& weights = {}) {
  if (src.size() != dst.size() || (!weights.empty() && weights.size() != src.size())) {
    throw Error(ErrorCode::kLengthMismatch, "fit_similarity_2d arrays must have equal length");
  }
  if (src.size() < 2) {
    throw Error(ErrorCode::kTooFewPairs, "fit_similarity_2d needs at least 2 points");
  }
  auto pick = [&](std::size_t k) {
    return std::tuple<Vec2, Vec2, double>(src[k], dst[k], weights.empty() ? 1.0 : weights[k]);
  };
  const detail::FitSums sums = detail::accumulate_fit(src.size(), pick);
  PlanarPose pose;
  double scale = 1.0;
  detail::fit_from_sums(sums, /*with_scale=*/true, pose, scale);
  return {pose, scale};
}

// RANSAC over matched pairs. Deterministic for a given seed: iteration i
// draws from an engine derived from (seed, i), and the sampler operates on
// a canonical lexicographic ordering of the pairs so the result does not
// depend on input order. Ties between models with equal inlier counts go
// to the lower inlier RMSE, then the lower iteration index. The best
// model is refit on all of its inliers.
inline RegistrationResult ransac_pose(const MatchedPairs& pairs, const RansacConfig& cfg) {
  const std::size_t n = pairs.size();
  if (pairs.dst.size() != n || pairs.weight.size() != n) {
    throw Error(ErrorCode::kLengthMismatch, "matched pair arrays must have equal length");
  }
  if (n < static_cast<std::size_t>(std::max(cfg.min_sample, 2))) {
    throw Error(ErrorCode::kTooFewPairs, "not enough pairs for RANSAC");
  }

  double tol = cfg.inlier_tol;
  if (tol <= 0.0) {
    std::vector<double> depths(n);
    for (std::size_t i = 0; i < n; ++i) depths[i] = pairs.src[i].norm();
    std::nth_element(depths.begin(), depths.begin() + static_cast<std::ptrdiff_t>(n / 2),
                     depths.end());
    tol = 0.05 * depths[n / 2];
    if (tol <= 0.0) {
      throw Error(ErrorCode::kDegenerateConfiguration, "source depths are all zero");
    }
  }

  std::vector<std::size_t> canonical(n);
  std::iota(canonical.begin(), canonical.end(), std::size_t{0});
  std::sort(canonical.begin(), canonical.end(), [&](std::size_t a, std::size_t b) {
    const auto key = [&](std::size_t k) {
      return std::tuple<double, double, double, double, double>(
          pairs.src[k].x, pairs.src[k].z, pairs.dst[k].x, pairs.dst[k].z, pairs.weight[k]);
    };
    return key(a) < key(b);
  });

  // Iterating in canonical order keeps floating-point accumulation, and
  // therefore the result, bitwise independent of the input pair order.
  auto evaluate = [&](const PlanarPose& pose, double scale, std::vector<bool>* mask) {
    std::size_t count = 0;
    double sse = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t k = canonical[c];
      const Vec2 r = pose.rotate(pairs.dst[k]) * scale + pose.t - pairs.src[k];
      const double e2 = r.squared_norm();
      const bool inlier = e2 < tol * tol;
      if (mask) (*mask)[k] = inlier;
      if (inlier) {
        ++count;
        sse += e2;
      }
    }
    const double rmse = count > 0 ? std::sqrt(sse / static_cast<double>(count))
                                  : std::numeric_limits<double>::infinity();
    return std::pair<std::size_t, double>(count, rmse);
  };

  const std::size_t sample_size = static_cast<std::size_t>(std::max(cfg.min_sample, 2));
  std::size_t best_count = 0;
  double best_rmse = std::numeric_limits<double>::infinity();
  PlanarPose best_pose;
  double best_scale = 1.0;
  int candidates = 0;

  std::vector<std::size_t> sample(sample_size);
  for (int it = 0; it < cfg.iterations; ++it) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(it)));
    // Distinct canonical indices by rejection; fine for tiny sample sizes.
    for (std::size_t s = 0; s < sample_size; ++s) {
      std::size_t pick;
      bool fresh;
      do {
        pick = canonical[rng.index(n)];
        fresh = true;
        for (std::size_t q = 0; q < s; ++q) fresh &= (sample[q] != pick);
      } while (!fresh);
      sample[s] = pick;
    }
    std::vector<Vec2> s_src, s_dst;
    s_src.reserve(sample_size);
    s_dst.reserve(sample_size);
    for (std::size_t idx : sample) {
      s_src.push_back(pairs.src[idx]);
      s_dst.push_back(pairs.dst[idx]);
    }
    PlanarPose pose;
    double scale = 1.0;
    try {
      if (cfg.estimate_scale) {
        std::tie(pose, scale) = fit_similarity_2d(s_src, s_dst);
      } else {
        pose = fit_rigid_2d(s_src, s_dst);
      }
    } catch (const Error&) {
      continue;  // degenerate minimal sample
    }
    ++candidates;
    const auto [count, rmse] = evaluate(pose, scale, nullptr);
    if (count > best_count || (count == best_count && rmse < best_rmse)) {
      best_count = count;
      best_rmse = rmse;
      best_pose = pose;
      best_scale = scale;
    }
  }

  if (best_count < static_cast<std::size_t>(std::max(cfg.min_inliers, cfg.min_sample))) {
    throw Error(ErrorCode::kNoConsensus, "no model reached the inlier minimum");
  }

  auto gather_and_fit = [&](const std::vector<bool>& mask, PlanarPose& pose, double& scale,
                            double& rmse) {
    std::vector<Vec2> in_src, in_dst;
    std::vector<double> in_w;
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t k = canonical[c];
      if (mask[k]) {
        in_src.push_back(pairs.src[k]);
        in_dst.push_back(pairs.dst[k]);
        in_w.push_back(pairs.weight[k]);
      }
    }
    if (cfg.estimate_scale) {
      std::tie(pose, scale) = fit_similarity_2d(in_src, in_dst, in_w);
    } else {
      pose = fit_rigid_2d(in_src, in_dst, in_w);
      scale = 1.0;
    }
    double sse = 0.0;
    for (std::size_t k = 0; k < in_src.size(); ++k) {
      sse += (pose.rotate(in_dst[k]) * scale + pose.t - in_src[k]).squared_norm();
    }
    rmse = std::sqrt(sse / static_cast<double>(in_src.size()));
  };

  // Refit on all inliers of the best model, then iteratively tighten the
  // inlier radius toward 3 * RMSE and refit. Residuals just under the
  // (deliberately generous) consensus radius would otherwise bias the
  // least-squares solution; the tightening loop converges onto the
  // well-explained subset. It stops rather than drop below min_inliers.
  std::vector<bool> mask(n);
  evaluate(best_pose, best_scale, &mask);
  RegistrationResult result;
  result.n_candidates = candidates;
  gather_and_fit(mask, result.pose, result.scale, result.rmse);
  double radius = tol;
  for (int round = 0; round < 5; ++round) {
    const double tightened = std::max(3.0 * result.rmse, 1e-9);
    if (tightened >= radius) break;
    std::vector<bool> next(n);
    std::size_t count = 0;
    for (std::size_t c = 0; c < n; ++c) {
      const std::size_t k = canonical[c];
      const Vec2 r =
          result.pose.rotate(pairs.dst[k]) * result.scale + result.pose.t - pairs.src[k];
      next[k] = r.squared_norm() < tightened * tightened;
      count += next[k] ? 1 : 0;
    }
    if (count < static_cast<std::size_t>(std::max(cfg.min_inliers, cfg.min_sample))) break;
    if (next == mask) break;
    mask = std::move(next);
    radius = tightened;
    gather_and_fit(mask, result.pose, result.scale, result.rmse);
  }
  result.inlier_mask = mask;
  return result;
}

namespace detail {

inline HorizonDepthMap source_depths(const HorizonMaps& maps, BoundarySource source,
                                     std::size_t m) {
  if (source == BoundarySource::kFloor) {
    return boundary_to_depth(maps.floor, 1.0, m);
  }
  const double height = estimate_layout_height(maps.ceiling, maps.floor) - 1.0;
  return boundary_to_depth(maps.ceiling, height, m);
}

}  // namespace detail

// Builds matched boundary-point pairs from two panoramas' horizon maps:
// boundary-to-depth on the chosen boundary, depth to XZ points,
// correspondence interpolation, covisibility weights. The pano-2 points
// are resampled to oversample * n before the interpolation.
inline MatchedPairs build_matched_pairs(const HorizonMaps& maps1, const HorizonMaps& maps2,
                                        BoundarySource source = BoundarySource::kCeiling,
                                        int oversample = 8) {
  if (maps1.size() != maps2.size()) {
    throw Error(ErrorCode::kLengthMismatch, "horizon maps must share one grid size");
  }
  const SampleGrid grid(maps1.size());
  const SampleGrid dense(grid.n * static_cast<std::size_t>(std::max(oversample, 1)));
  MatchedPairs pairs;
  auto append = [&](BoundarySource one_source) {
    const PlanePointSet p1 =
        depth_to_plane_points(detail::source_depths(maps1, one_source, grid.n), grid);
    const PlanePointSet p2 =
        depth_to_plane_points(detail::source_depths(maps2, one_source, dense.n), dense);
    const std::vector<Vec2> dst = interpolate_correspondence(p2, maps1.correspondence, dense);
    pairs.src.insert(pairs.src.end(), p1.points.begin(), p1.points.end());
    pairs.dst.insert(pairs.dst.end(), dst.begin(), dst.end());
    pairs.weight.insert(pairs.weight.end(), maps1.covisibility.begin(),
                        maps1.covisibility.end());
  };
  if (source == BoundarySource::kBoth) {
    append(BoundarySource::kCeiling);
    append(BoundarySource::kFloor);
  } else {
    append(source);
  }
  return pairs;
}

// Full registration: matched pairs -> covisibility filter -> RANSAC.
inline RegistrationResult register_maps(const HorizonMaps& maps1, const HorizonMaps& maps2,
                                        const RansacConfig& cfg = {}) {
  const MatchedPairs pairs =
      build_matched_pairs(maps1, maps2, cfg.boundary_source, cfg.interp_oversample);
  const MatchedPairs kept = covisibility_filter(
      pairs, cfg.covis_threshold, static_cast<std::size_t>(std::max(cfg.min_sample, 2)));
  return ransac_pose(kept, cfg);
}

}  // namespace panoreg
