#include <omp.h>

#include "kernels_common.hpp"
#include "rankreg/kernels.hpp"

// Parallel loops run over independent output elements only; the inner
// accumulation order matches the serial reference exactly.

namespace rankreg::kernels::omp {

void predict_rows(std::span<const double> X, std::size_t n_features, std::span<const double> p,
                  std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j)
    out[static_cast<std::size_t>(j)] =
        detail::dot(X.data() + static_cast<std::size_t>(j) * n_features, p.data(), n_features);
}

void transpose_times(std::span<const double> X, std::size_t n_features, std::span<const double> r,
                     std::span<double> out) {
  const auto F = static_cast<std::ptrdiff_t>(n_features);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t f = 0; f < F; ++f) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += X[j * n_features + static_cast<std::size_t>(f)] * r[j];
    out[static_cast<std::size_t>(f)] = s;
  }
}

void batch_sse(std::span<const QuarterBatch> batches, std::span<const double> p, std::span<double> out) {
  const auto L = static_cast<std::ptrdiff_t>(batches.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t l = 0; l < L; ++l)
    out[static_cast<std::size_t>(l)] = detail::centered_sse(batches[static_cast<std::size_t>(l)], p);
}

void dominance(std::span<const double> risk, std::span<const double> expected,
               std::vector<std::uint32_t>& dominated_by, std::vector<std::vector<std::uint32_t>>& dominates) {
  const std::size_t n = risk.size();
  dominated_by.assign(n, 0);
  dominates.assign(n, {});
  const auto N = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t ii = 0; ii < N; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (kernels::dominates(risk[j], expected[j], risk[i], expected[i])) ++dominated_by[i];
      if (kernels::dominates(risk[i], expected[i], risk[j], expected[j]))
        dominates[i].push_back(static_cast<std::uint32_t>(j));
    }
  }
}

}  // namespace rankreg::kernels::omp
