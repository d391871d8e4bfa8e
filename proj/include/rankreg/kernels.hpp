#pragma once

// Data-parallel inner loops. Each kernel has a plain serial reference in
// `kernels::serial` and an OpenMP version in `kernels::omp` with the same
// signature. The OpenMP versions partition work so that every output element
// is accumulated in the same order as the serial loop, which keeps results
// bit-identical regardless of thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rankreg {

struct QuarterBatch;

namespace kernels {

enum class Exec { Serial, Parallel };

namespace serial {

/// out[j] = sum_f X[j, f] * p[f]
void predict_rows(std::span<const double> X, std::size_t n_features, std::span<const double> p,
                  std::span<double> out);

/// out[f] = sum_j X[j, f] * r[j]
void transpose_times(std::span<const double> X, std::size_t n_features, std::span<const double> r,
                     std::span<double> out);

/// Unregularized centralized squared error of every batch under coefficients p.
void batch_sse(std::span<const QuarterBatch> batches, std::span<const double> p, std::span<double> out);

/// dominated_by[i] = number of points that dominate point i; dominates[i] lists
/// the indices point i dominates, ascending. Lower risk and higher expected win.
void dominance(std::span<const double> risk, std::span<const double> expected,
               std::vector<std::uint32_t>& dominated_by, std::vector<std::vector<std::uint32_t>>& dominates);

}  // namespace serial

namespace omp {

void predict_rows(std::span<const double> X, std::size_t n_features, std::span<const double> p,
                  std::span<double> out);
void transpose_times(std::span<const double> X, std::size_t n_features, std::span<const double> r,
                     std::span<double> out);
void batch_sse(std::span<const QuarterBatch> batches, std::span<const double> p, std::span<double> out);
void dominance(std::span<const double> risk, std::span<const double> expected,
               std::vector<std::uint32_t>& dominated_by, std::vector<std::vector<std::uint32_t>>& dominates);

}  // namespace omp

inline void predict_rows(Exec e, std::span<const double> X, std::size_t n_features, std::span<const double> p,
                         std::span<double> out) {
  e == Exec::Parallel ? omp::predict_rows(X, n_features, p, out) : serial::predict_rows(X, n_features, p, out);
}

inline void transpose_times(Exec e, std::span<const double> X, std::size_t n_features, std::span<const double> r,
                            std::span<double> out) {
  e == Exec::Parallel ? omp::transpose_times(X, n_features, r, out) : serial::transpose_times(X, n_features, r, out);
}

inline void batch_sse(Exec e, std::span<const QuarterBatch> batches, std::span<const double> p,
                      std::span<double> out) {
  e == Exec::Parallel ? omp::batch_sse(batches, p, out) : serial::batch_sse(batches, p, out);
}

inline void dominance(Exec e, std::span<const double> risk, std::span<const double> expected,
                      std::vector<std::uint32_t>& dominated_by, std::vector<std::vector<std::uint32_t>>& dominates) {
  e == Exec::Parallel ? omp::dominance(risk, expected, dominated_by, dominates)
                      : serial::dominance(risk, expected, dominated_by, dominates);
}

/// a dominates b: no worse on both objectives and strictly better on one.
inline bool dominates(double risk_a, double exp_a, double risk_b, double exp_b) {
  return risk_a <= risk_b && exp_a >= exp_b && (risk_a < risk_b || exp_a > exp_b);
}

}  // namespace kernels
}  // namespace rankreg
