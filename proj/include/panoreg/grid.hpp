#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "panoreg/errors.hpp"

namespace panoreg {

// Wrap to [0, 1). Panorama u coordinates are periodic.
inline double wrap_unit(double u) {
  double w = u - std::floor(u);
  if (w >= 1.0) w = 0.0;  // guards u = -1e-17 style results
  return w;
}

// Uniform horizontal sample positions u_i = i/n, i = 0..n-1.
struct SampleGrid {
  std::size_t n = 0;

  SampleGrid() = default;
  explicit SampleGrid(std::size_t n_) : n(n_) {
    if (n < 4) throw Error(ErrorCode::kSchemaError, "sample grid needs n >= 4");
  }

  double u(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(n); }

  bool operator==(const SampleGrid&) const = default;
};

// Linear interpolation of a periodic sequence at fractional index f
// (period = values.size(); index m wraps to 0). T needs +, * double.
template <typename T>
T interp_cyclic(const std::vector<T>& values, double frac_index) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "interp_cyclic on empty sequence");
  const std::size_t m = values.size();
  double f = frac_index - std::floor(frac_index / static_cast<double>(m)) * static_cast<double>(m);
  if (f >= static_cast<double>(m)) f = 0.0;
  const std::size_t k = static_cast<std::size_t>(f) % m;
  const double t = f - static_cast<double>(k);
  if (t == 0.0) return values[k];
  const std::size_t k1 = (k + 1) % m;
  return values[k] * (1.0 - t) + values[k1] * t;
}

// Resample a periodic sequence from n to m samples (u_j = j/m positions).
// m == n returns the input unchanged.
template <typename T>
std::vector<T> resample_cyclic(const std::vector<T>& values, std::size_t m) {
  if (values.empty()) throw Error(ErrorCode::kEmptyInput, "resample_cyclic on empty sequence");
  if (m == values.size()) return values;
  std::vector<T> out;
  out.reserve(m);
  const double scale = static_cast<double>(values.size()) / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.push_back(interp_cyclic(values, static_cast<double>(j) * scale));
  }
  return out;
}

}  // namespace panoreg
