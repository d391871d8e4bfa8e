#include "kernels_common.hpp"
#include "rankreg/kernels.hpp"

namespace rankreg::kernels::serial {

void predict_rows(std::span<const double> X, std::size_t n_features, std::span<const double> p,
                  std::span<double> out) {
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = detail::dot(X.data() + j * n_features, p.data(), n_features);
}

void transpose_times(std::span<const double> X, std::size_t n_features, std::span<const double> r,
                     std::span<double> out) {
  for (std::size_t f = 0; f < n_features; ++f) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += X[j * n_features + f] * r[j];
    out[f] = s;
  }
}

void batch_sse(std::span<const QuarterBatch> batches, std::span<const double> p, std::span<double> out) {
  for (std::size_t l = 0; l < batches.size(); ++l) out[l] = detail::centered_sse(batches[l], p);
}

void dominance(std::span<const double> risk, std::span<const double> expected,
               std::vector<std::uint32_t>& dominated_by, std::vector<std::vector<std::uint32_t>>& dominates) {
  const std::size_t n = risk.size();
  dominated_by.assign(n, 0);
  dominates.assign(n, {});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (kernels::dominates(risk[j], expected[j], risk[i], expected[i])) ++dominated_by[i];
      if (kernels::dominates(risk[i], expected[i], risk[j], expected[j]))
        dominates[i].push_back(static_cast<std::uint32_t>(j));
    }
  }
}

}  // namespace rankreg::kernels::serial
