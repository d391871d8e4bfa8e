#pragma once

#include <cstddef>
#include <span>

#include "rankreg/panel.hpp"

namespace rankreg::kernels::detail {

inline double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

/// sum_j ((o_j - mean o) - (a_j - mean a))^2 for one batch.
inline double centered_sse(const QuarterBatch& b, std::span<const double> p) {
  const std::size_t n = b.size(), F = b.n_features;
  double mean_o = 0.0, mean_a = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    mean_o += dot(b.X.data() + j * F, p.data(), F);
    mean_a += b.y[j];
  }
  mean_o /= static_cast<double>(n);
  mean_a /= static_cast<double>(n);
  double sse = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = (dot(b.X.data() + j * F, p.data(), F) - mean_o) - (b.y[j] - mean_a);
    sse += e * e;
  }
  return sse;
}

}  // namespace rankreg::kernels::detail
