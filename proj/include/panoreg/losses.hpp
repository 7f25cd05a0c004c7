#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "panoreg/errors.hpp"
#include "panoreg/grid.hpp"
#include "panoreg/horizon.hpp"

namespace panoreg {

// Reference loss semantics for the four 1D map heads, usable to validate
// an external training pipeline and to score perturbed maps against the
// oracle. Everything here is a plain fold over the inputs; no
// vectorization tricks, no hidden state.

// Predictions are clamped into [kLogEps, 1 - kLogEps] before logs.
inline constexpr double kLogEps = 1e-7;

struct LossWeights {
  double lambda1 = 1.0;  // layout
  double lambda2 = 1.0;  // correspondence
  double lambda3 = 1.0;  // covisibility
  double lambda4 = 1.0;  // cycle correspondence
  double lambda5 = 1.0;  // cycle covisibility
  double alpha = 0.1;    // positive-sample weight in the covisibility loss
};

// The printed form of the cyclic distance has an asymmetric second branch
// |1 - gt + pred| that fails to wrap when pred > gt; the symmetric mode
// replaces it with 1 - |pred - gt|. Both are kept so either convention can
// be scored.
enum class CyclicMode { kPaper, kSymmetric };

inline double cyclic_distance(double pred, double gt, CyclicMode mode) {
  const double direct = std::abs(pred - gt);
  if (mode == CyclicMode::kPaper) {
    return std::min(direct, std::abs(1.0 - gt + pred));
  }
  return std::min(direct, 1.0 - direct);
}

// Mean L1 distance between predicted and ground-truth horizon-depth maps,
// summed over the four maps (ceiling/floor for both panoramas) and
// normalized by the map length only.
inline double layout_loss(const std::array<HorizonDepthMap, 4>& pred,
                          const std::array<HorizonDepthMap, 4>& gt) {
  const std::size_t m = pred[0].values.size();
  if (m == 0) throw Error(ErrorCode::kEmptyInput, "layout_loss on empty maps");
  double sum = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    if (pred[j].values.size() != m || gt[j].values.size() != m) {
      throw Error(ErrorCode::kLengthMismatch, "layout_loss maps must share one length");
    }
    for (std::size_t i = 0; i < m; ++i) {
      sum += std::abs(pred[j].values[i] - gt[j].values[i]);
    }
  }
  return sum / static_cast<double>(m);
}

// Weighted binary cross-entropy of the covisibility map, negated so the
// value is a loss (0 at saturated correct predictions, positive
// otherwise). alpha weights the positive terms.
inline double covis_loss(const std::vector<double>& pred, const std::vector<double>& gt,
                         double alpha) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kLengthMismatch, "covis_loss arrays must have equal length");
  }
  if (pred.empty()) throw Error(ErrorCode::kEmptyInput, "covis_loss on empty arrays");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double c = std::clamp(pred[i], kLogEps, 1.0 - kLogEps);
    sum += alpha * gt[i] * std::log(c) + (1.0 - gt[i]) * std::log(1.0 - c);
  }
  return -sum / static_cast<double>(pred.size());
}

// Cyclic correspondence distance averaged over all N samples; samples
// whose ground-truth covisibility is below 0.5 contribute zero.
inline double correspondence_loss(const std::vector<double>& pred,
                                  const std::vector<double>& gt,
                                  const std::vector<double>& gt_covis,
                                  CyclicMode mode = CyclicMode::kSymmetric) {
  if (pred.size() != gt.size() || pred.size() != gt_covis.size()) {
    throw Error(ErrorCode::kLengthMismatch, "correspondence_loss arrays must have equal length");
  }
  if (pred.empty()) throw Error(ErrorCode::kEmptyInput, "correspondence_loss on empty arrays");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (gt_covis[i] >= 0.5) {
      sum += cyclic_distance(pred[i], gt[i], mode);
    }
  }
  return sum / static_cast<double>(pred.size());
}

// Cycle-consistency terms. The caller supplies the network outputs already
// evaluated at the ground-truth correspondence positions:
// `composed_corr[i]` should reproduce u_i, `composed_covis[i]` the
// ground-truth covisibility.
inline std::pair<double, double> cycle_losses(const std::vector<double>& composed_corr,
                                              const std::vector<double>& composed_covis,
                                              const SampleGrid& grid,
                                              const std::vector<double>& gt_covis, double alpha,
                                              CyclicMode mode = CyclicMode::kSymmetric) {
  if (composed_corr.size() != grid.n || composed_covis.size() != grid.n ||
      gt_covis.size() != grid.n) {
    throw Error(ErrorCode::kLengthMismatch, "cycle_losses arrays must match the grid");
  }
  std::vector<double> u(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) u[i] = grid.u(i);
  const double corr = correspondence_loss(composed_corr, u, gt_covis, mode);
  const double covis = covis_loss(composed_covis, gt_covis, alpha);
  return {corr, covis};
}

struct LossComponents {
  double layout = 0.0;
  double correspondence = 0.0;
  double covisibility = 0.0;
  double cycle_correspondence = 0.0;
  double cycle_covisibility = 0.0;
};

inline double total_loss(const LossComponents& c, const LossWeights& w = {}) {
  return w.lambda1 * c.layout + w.lambda2 * c.correspondence + w.lambda3 * c.covisibility +
         w.lambda4 * c.cycle_correspondence + w.lambda5 * c.cycle_covisibility;
}

}  // namespace panoreg
