#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rankreg/metrics.hpp"
#include "rankreg/models.hpp"
#include "rankreg/panel.hpp"

namespace rankreg {

struct ExperimentConfig {
  std::size_t window_length = 10;
  std::vector<ModelKind> model_kinds{std::begin(kAllModelKinds), std::end(kAllModelKinds)};
  TrainConfig train;
  double l2_weight = 1.0;
  std::size_t ap_k = 100;
  std::vector<std::size_t> top_ns{20, 50};
  Relevance relevance = Relevance::FixedK;
  std::size_t curve_max_n = 100;
  int jobs = 1;

  void validate() const;
};

struct ModelOutcome {
  std::optional<MetricReport> metrics;  // empty when training failed
  std::optional<std::string> error;
  std::optional<LinearModel> model;     // absent for Naive
  std::optional<TrainTrace> trace;
  Curve curve;
  /// Test-quarter scores in company index order (NaN for companies not ranked).
  std::vector<double> scores;
};

struct WindowReport {
  std::size_t index = 0;
  RollingWindow window;
  std::string test_quarter_id;
  std::uint64_t seed = 0;
  std::size_t universe_size = 0;
  std::map<ModelKind, ModelOutcome> per_model;
  std::vector<std::string> warnings;
};

struct BacktestReport {
  ExperimentConfig config;
  std::vector<WindowReport> windows;
  std::map<ModelKind, MetricReport> aggregate;
  std::map<ModelKind, std::size_t> aggregate_windows;  // windows contributing to each aggregate

  bool any_diverged() const;
};

/// splitmix64-style mix so each window's seed depends only on its index.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Trains every configured model on `train_quarters` and evaluates each test
/// quarter separately. Shared by run_window and holdout_experiment.
std::vector<WindowReport> evaluate_split(const PanelDataset& ds, std::size_t first_train, std::size_t n_train,
                                         std::span<const std::size_t> test_quarters, const ExperimentConfig& cfg,
                                         std::uint64_t seed);

WindowReport run_window(const PanelDataset& ds, const RollingWindow& window, const ExperimentConfig& cfg,
                        std::size_t window_index);

BacktestReport run_backtest(const PanelDataset& ds, const ExperimentConfig& cfg);

/// Mean of per-window metrics for every model kind.
void aggregate(BacktestReport& report);

std::vector<WindowReport> holdout_experiment(const PanelDataset& ds, std::size_t n_train, const ExperimentConfig& cfg);

}  // namespace rankreg
