#include "rankreg/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "kernels_common.hpp"
#include "rankreg/error.hpp"

namespace rankreg {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::SimpleSGD: return "SimpleSGD";
    case ModelKind::SimpleSGD_L2: return "SimpleSGD_L2";
    case ModelKind::RankRegression: return "RankRegression";
    case ModelKind::RankRegression_L2: return "RankRegression_L2";
    case ModelKind::Naive: return "Naive";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  for (auto k : kAllModelKinds)
    if (to_string(k) == name) return k;
  throw Error(ErrorKind::InvalidArgument, "unknown model kind '" + std::string(name) + "'");
}

std::string_view to_string(StopReason r) { return r == StopReason::Patience ? "patience" : "cap"; }

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorKind::InvalidArgument, "learning_rate must be finite and non-negative");
  if (patience <= 0 || max_iterations <= 0 || loss_eval_stride <= 0)
    throw Error(ErrorKind::InvalidArgument, "patience, max_iterations and loss_eval_stride must be positive");
  if (patience > max_iterations) throw Error(ErrorKind::InvalidArgument, "patience exceeds max_iterations");
  if (!(min_rel_improvement >= 0.0)) throw Error(ErrorKind::InvalidArgument, "min_rel_improvement must be >= 0");
}

double predict(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.coefficients.size()) {
    throw Error(ErrorKind::Dimension, "feature vector has " + std::to_string(x.size()) + " entries, model has " +
                                          std::to_string(model.coefficients.size()));
  }
  return kernels::detail::dot(model.coefficients.data(), x.data(), x.size());
}

std::vector<double> centralize(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  if (out.empty()) return out;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto& x : out) x -= mean;
  return out;
}

namespace {

void require_batch(const QuarterBatch& b, std::size_t n_coefficients) {
  if (b.size() < 2)
    throw Error(ErrorKind::DegenerateBatch, "batch '" + b.quarter_id + "' has fewer than 2 companies");
  if (b.n_features != n_coefficients) throw Error(ErrorKind::Dimension, "batch feature count does not match model");
}

double squared_norm(std::span<const double> p) { return kernels::detail::dot(p.data(), p.data(), p.size()); }

// Centralized residual (O - A) for one batch given precomputed centered targets.
void centered_residual(const QuarterBatch& b, std::span<const double> p, std::span<const double> centered_y,
                       kernels::Exec exec, std::vector<double>& scores) {
  scores.resize(b.size());
  kernels::predict_rows(exec, b.X, b.n_features, p, scores);
  const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) scores[j] = (scores[j] - mean) - centered_y[j];
}

/// Running-minimum bookkeeping shared by both trainers.
class StoppingRule {
 public:
  StoppingRule(const TrainConfig& cfg, std::size_t n_features) : cfg_(cfg), best_p_(n_features, 0.0) {}

  /// Returns true when training should stop at this evaluation.
  bool observe(long long iteration, double loss, std::span<const double> p) {
    if (!std::isfinite(loss)) throw DivergenceError(iteration, cfg_.learning_rate);
    trace_.loss_history.push_back({iteration, loss});
    if (trace_.loss_history.size() == 1) {
      accept(iteration, loss, p);
      last_reset_ = iteration;
    } else {
      if (loss < best_ - cfg_.min_rel_improvement * std::abs(best_)) last_reset_ = iteration;
      if (loss < best_) accept(iteration, loss, p);
    }
    trace_.iterations_run = iteration;
    if (iteration - last_reset_ >= cfg_.patience) {
      trace_.stop_reason = StopReason::Patience;
      return true;
    }
    if (iteration >= cfg_.max_iterations) {
      trace_.stop_reason = StopReason::Cap;
      return true;
    }
    return false;
  }

  TrainResult finish() {
    trace_.best_loss = best_;
    TrainResult r;
    r.model.coefficients = best_p_;
    r.model.normalizer = Normalizer::identity(best_p_.size());
    r.trace = std::move(trace_);
    return r;
  }

  bool is_eval_point(long long iteration) const {
    return iteration % cfg_.loss_eval_stride == 0 || iteration >= cfg_.max_iterations ||
           iteration - last_reset_ >= cfg_.patience;
  }

 private:
  void accept(long long iteration, double loss, std::span<const double> p) {
    best_ = loss;
    trace_.best_iteration = iteration;
    std::copy(p.begin(), p.end(), best_p_.begin());
  }

  const TrainConfig& cfg_;
  TrainTrace trace_;
  std::vector<double> best_p_;
  double best_ = std::numeric_limits<double>::infinity();
  long long last_reset_ = 0;
};

void require_finite(std::span<const double> p, long long iteration, double lr) {
  for (double v : p)
    if (!std::isfinite(v)) throw DivergenceError(iteration, lr);
}

std::size_t common_features(std::span<const QuarterBatch> batches) {
  if (batches.empty()) throw Error(ErrorKind::InvalidArgument, "training needs at least one batch");
  const std::size_t F = batches.front().n_features;
  for (const auto& b : batches) require_batch(b, F);
  return F;
}

}  // namespace

double rr_batch_loss(std::span<const double> p, const QuarterBatch& batch, double l2_weight) {
  require_batch(batch, p.size());
  return kernels::detail::centered_sse(batch, p) + l2_weight * 0.5 * squared_norm(p);
}

std::vector<double> rr_batch_gradient(std::span<const double> p, const QuarterBatch& batch, double l2_weight,
                                      kernels::Exec exec) {
  require_batch(batch, p.size());
  const auto centered_y = centralize(batch.y);
  std::vector<double> residual;
  centered_residual(batch, p, centered_y, exec, residual);
  std::vector<double> grad(p.size());
  kernels::transpose_times(exec, batch.X, batch.n_features, residual, grad);
  for (std::size_t f = 0; f < grad.size(); ++f) grad[f] = 2.0 * grad[f] + l2_weight * p[f];
  return grad;
}

double rr_full_loss(std::span<const double> p, std::span<const QuarterBatch> batches, double l2_weight,
                    kernels::Exec exec) {
  std::vector<double> per_batch(batches.size());
  kernels::batch_sse(exec, batches, p, per_batch);
  double total = 0.0;
  for (double v : per_batch) total += v;
  return total + static_cast<double>(batches.size()) * l2_weight * 0.5 * squared_norm(p);
}

double simple_full_loss(std::span<const double> p, std::span<const QuarterBatch> batches, double l2_weight) {
  double sse = 0.0;
  std::size_t n = 0;
  for (const auto& b : batches) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double e = kernels::detail::dot(b.X.data() + j * b.n_features, p.data(), b.n_features) - b.y[j];
      sse += e * e;
    }
    n += b.size();
  }
  return sse + static_cast<double>(n) * l2_weight * 0.5 * squared_norm(p);
}

TrainResult train_rank_regression(std::span<const QuarterBatch> train, const TrainConfig& cfg, double l2_weight) {
  cfg.validate();
  const std::size_t F = common_features(train);
  std::vector<std::vector<double>> centered_y;
  centered_y.reserve(train.size());
  for (const auto& b : train) centered_y.push_back(centralize(b.y));

  std::vector<double> p(F, 0.0), residual, grad(F);
  StoppingRule rule(cfg, F);
  long long it = 0;
  if (rule.observe(it, rr_full_loss(p, train, l2_weight, cfg.exec), p)) return rule.finish();
  while (true) {
    const auto& b = train[static_cast<std::size_t>(it) % train.size()];
    centered_residual(b, p, centered_y[static_cast<std::size_t>(it) % train.size()], cfg.exec, residual);
    kernels::transpose_times(cfg.exec, b.X, F, residual, grad);
    for (std::size_t f = 0; f < F; ++f) p[f] -= cfg.learning_rate * (2.0 * grad[f] + l2_weight * p[f]);
    ++it;
    require_finite(p, it, cfg.learning_rate);
    if (rule.is_eval_point(it) && rule.observe(it, rr_full_loss(p, train, l2_weight, cfg.exec), p)) break;
  }
  return rule.finish();
}

TrainResult train_simple_sgd(std::span<const QuarterBatch> train, const TrainConfig& cfg, double l2_weight) {
  cfg.validate();
  const std::size_t F = common_features(train);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> order;
  for (std::size_t l = 0; l < train.size(); ++l)
    for (std::size_t j = 0; j < train[l].size(); ++j)
      order.emplace_back(static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(j));

  std::mt19937_64 rng(cfg.seed);
  std::vector<double> p(F, 0.0);
  StoppingRule rule(cfg, F);
  long long it = 0;
  std::size_t cursor = order.size();
  if (rule.observe(it, simple_full_loss(p, train, l2_weight), p)) return rule.finish();
  while (true) {
    if (cursor == order.size()) {
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const auto [l, j] = order[cursor++];
    const double* x = train[l].X.data() + static_cast<std::size_t>(j) * F;
    const double err = kernels::detail::dot(x, p.data(), F) - train[l].y[j];
    for (std::size_t f = 0; f < F; ++f) p[f] -= cfg.learning_rate * (2.0 * err * x[f] + l2_weight * p[f]);
    ++it;
    require_finite(p, it, cfg.learning_rate);
    if (rule.is_eval_point(it) && rule.observe(it, simple_full_loss(p, train, l2_weight), p)) break;
  }
  return rule.finish();
}

std::vector<double> naive_rank_scores(std::span<const double> prev_quarter_returns) {
  std::vector<double> out(prev_quarter_returns.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = prev_quarter_returns[i];
    out[i] = std::isfinite(r) ? r : -std::numeric_limits<double>::infinity();
  }
  return out;
}

}  // namespace rankreg
