#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankreg/kernels.hpp"
#include "rankreg/panel.hpp"

namespace rankreg {

enum class ModelKind { SimpleSGD, SimpleSGD_L2, RankRegression, RankRegression_L2, Naive };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::RankRegression_L2, ModelKind::RankRegression,
                                               ModelKind::SimpleSGD_L2, ModelKind::SimpleSGD, ModelKind::Naive};

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

inline bool is_rank_model(ModelKind k) { return k == ModelKind::RankRegression || k == ModelKind::RankRegression_L2; }
inline bool is_simple_model(ModelKind k) { return k == ModelKind::SimpleSGD || k == ModelKind::SimpleSGD_L2; }
inline bool uses_l2(ModelKind k) { return k == ModelKind::SimpleSGD_L2 || k == ModelKind::RankRegression_L2; }

/// Linear score without intercept over normalized features.
struct LinearModel {
  std::vector<double> coefficients;
  Normalizer normalizer;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  long long patience = 30000;
  long long max_iterations = 800000;
  std::uint64_t seed = 0;
  long long loss_eval_stride = 100;
  /// An evaluation resets the patience clock only when it beats the running
  /// minimum by more than this fraction of it. Smaller gains still update
  /// the best snapshot.
  double min_rel_improvement = 1e-10;
  kernels::Exec exec = kernels::Exec::Serial;

  void validate() const;
};

enum class StopReason { Patience, Cap };
std::string_view to_string(StopReason r);

struct LossSample {
  long long iteration;
  double loss;
};

struct TrainTrace {
  long long iterations_run = 0;
  double best_loss = 0.0;
  long long best_iteration = 0;
  std::vector<LossSample> loss_history;
  StopReason stop_reason = StopReason::Patience;
};

struct TrainResult {
  LinearModel model;
  TrainTrace trace;
};

double predict(const LinearModel& model, std::span<const double> x);

std::vector<double> centralize(std::span<const double> v);

double rr_batch_loss(std::span<const double> coefficients, const QuarterBatch& batch, double l2_weight);
inline double rr_batch_loss(const LinearModel& m, const QuarterBatch& b, double l2) {
  return rr_batch_loss(m.coefficients, b, l2);
}

/// 2 X^T (O - A) + l2 * p, where O and A are the centralized outputs and targets.
std::vector<double> rr_batch_gradient(std::span<const double> coefficients, const QuarterBatch& batch,
                                      double l2_weight, kernels::Exec exec = kernels::Exec::Serial);
inline std::vector<double> rr_batch_gradient(const LinearModel& m, const QuarterBatch& b, double l2) {
  return rr_batch_gradient(m.coefficients, b, l2);
}

/// Sum of rr_batch_loss over all batches.
double rr_full_loss(std::span<const double> coefficients, std::span<const QuarterBatch> batches, double l2_weight,
                    kernels::Exec exec = kernels::Exec::Serial);

/// Sum over every sample of (o - a)^2 + l2 / 2 * |p|^2.
double simple_full_loss(std::span<const double> coefficients, std::span<const QuarterBatch> batches,
                        double l2_weight);

/// One full-batch gradient step per quarter, visiting quarters cyclically in
/// the given order. Returns the best-loss snapshot.
TrainResult train_rank_regression(std::span<const QuarterBatch> train, const TrainConfig& cfg, double l2_weight);

/// Per-sample SGD over a seeded shuffle that is redrawn every epoch.
TrainResult train_simple_sgd(std::span<const QuarterBatch> train, const TrainConfig& cfg, double l2_weight);

/// Previous-quarter return as score; NaN (unknown) maps to -infinity.
std::vector<double> naive_rank_scores(std::span<const double> prev_quarter_returns);

}  // namespace rankreg
