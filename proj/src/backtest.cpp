#include "rankreg/backtest.hpp"

#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include "rankreg/error.hpp"

namespace rankreg {

void ExperimentConfig::validate() const {
  if (window_length < 2) throw Error(ErrorKind::InvalidWindow, "window_length must be at least 2");
  if (model_kinds.empty()) throw Error(ErrorKind::InvalidArgument, "no model kinds configured");
  if (!(l2_weight >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be non-negative");
  if (ap_k == 0 || curve_max_n == 0) throw Error(ErrorKind::InvalidArgument, "ap_k and curve_max_n must be positive");
  for (auto n : top_ns)
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "top_ns entries must be positive");
  if (jobs < 1) throw Error(ErrorKind::InvalidArgument, "jobs must be at least 1");
  train.validate();
}

bool BacktestReport::any_diverged() const {
  for (const auto& w : windows)
    for (const auto& [kind, outcome] : w.per_model)
      if (outcome.error) return true;
  return false;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::size_t clamp_cutoff(std::size_t want, std::size_t universe, const char* name, std::vector<std::string>& warnings) {
  if (want <= universe) return want;
  std::ostringstream os;
  os << name << " cutoff " << want << " clamped to universe size " << universe;
  warnings.push_back(os.str());
  return universe;
}

struct TrainedModels {
  std::map<ModelKind, ModelOutcome> outcomes;
};

TrainedModels train_all(const PanelDataset& train_slice, const ExperimentConfig& cfg, std::uint64_t seed) {
  TrainedModels out;
  TrainConfig tc = cfg.train;
  tc.seed = seed;

  std::optional<std::vector<QuarterBatch>> rank_batches, simple_batches;
  std::optional<Normalizer> rank_norm, simple_norm;
  for (auto kind : cfg.model_kinds) {
    ModelOutcome outcome;
    if (kind != ModelKind::Naive) {
      const bool rank = is_rank_model(kind);
      auto& norm = rank ? rank_norm : simple_norm;
      auto& batches = rank ? rank_batches : simple_batches;
      if (!norm) {
        norm = fit_normalizer(train_slice, !rank);
        batches = quarter_batches(apply_normalizer(*norm, train_slice));
      }
      const double l2 = uses_l2(kind) ? cfg.l2_weight : 0.0;
      try {
        auto result = rank ? train_rank_regression(*batches, tc, l2) : train_simple_sgd(*batches, tc, l2);
        result.model.normalizer = *norm;
        outcome.model = std::move(result.model);
        outcome.trace = std::move(result.trace);
      } catch (const DivergenceError& e) {
        outcome.error = e.what();
      }
    }
    out.outcomes.emplace(kind, std::move(outcome));
  }
  return out;
}

}  // namespace

std::vector<WindowReport> evaluate_split(const PanelDataset& ds, std::size_t first_train, std::size_t n_train,
                                         std::span<const std::size_t> test_quarters, const ExperimentConfig& cfg,
                                         std::uint64_t seed) {
  cfg.validate();
  const PanelDataset train_slice = impute_missing(select_quarters(ds, first_train, n_train));
  const TrainedModels trained = train_all(train_slice, cfg, seed);

  const std::size_t C = ds.n_companies(), F = ds.n_features;
  std::vector<double> risk(C);
  {
    std::vector<double> history(n_train);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t q = 0; q < n_train; ++q)
        history[q] = train_slice.has_target(q, c) ? train_slice.target(q, c) : std::numeric_limits<double>::quiet_NaN();
      risk[c] = return_risk(history);
    }
  }

  std::vector<WindowReport> reports;
  for (std::size_t t : test_quarters) {
    if (t == 0 || t >= ds.n_quarters()) throw Error(ErrorKind::InvalidWindow, "test quarter out of range");
    WindowReport rep;
    rep.window = {first_train, n_train, t};
    rep.test_quarter_id = ds.quarter_ids[t];
    rep.seed = seed;

    std::vector<std::size_t> universe;
    for (std::size_t c = 0; c < C; ++c)
      if (ds.has_target(t, c)) universe.push_back(c);
    rep.universe_size = universe.size();
    if (universe.empty()) throw Error(ErrorKind::DegenerateBatch, "test quarter '" + rep.test_quarter_id + "' has no targets");

    const std::size_t ap_k = clamp_cutoff(cfg.ap_k, universe.size(), "AP@k", rep.warnings);
    std::vector<std::size_t> top_ns;
    for (auto n : cfg.top_ns) top_ns.push_back(clamp_cutoff(n, universe.size(), "top-n", rep.warnings));
    const std::size_t curve_n = std::min(cfg.curve_max_n, universe.size());

    std::vector<double> row(F);
    for (const auto& [kind, trained_outcome] : trained.outcomes) {
      ModelOutcome outcome = trained_outcome;
      if (outcome.error) {
        rep.per_model.emplace(kind, std::move(outcome));
        continue;
      }
      outcome.scores.assign(C, std::numeric_limits<double>::quiet_NaN());
      if (kind == ModelKind::Naive) {
        std::vector<double> prev(universe.size());
        for (std::size_t i = 0; i < universe.size(); ++i)
          prev[i] = ds.has_target(t - 1, universe[i]) ? ds.target(t - 1, universe[i])
                                                      : std::numeric_limits<double>::quiet_NaN();
        const auto s = naive_rank_scores(prev);
        for (std::size_t i = 0; i < universe.size(); ++i) outcome.scores[universe[i]] = s[i];
      } else {
        const auto& model = *outcome.model;
        for (std::size_t c : universe) {
          for (std::size_t f = 0; f < F; ++f) {
            const std::size_t cell = ds.cell(t, c, f);
            row[f] = model.normalizer.normalize_feature(f, ds.missing_mask[cell] ? 0.0 : ds.features[cell]);
          }
          outcome.scores[c] = predict(model, row);
        }
      }

      std::vector<RankedEntry> entries;
      std::vector<RiskReturnPoint> points;
      for (std::size_t c : universe) {
        entries.push_back({ds.company_ids[c], outcome.scores[c], ds.target(t, c)});
        points.push_back({ds.company_ids[c], risk[c], outcome.scores[c], ds.target(t, c)});
      }
      const RankedList ranked(std::move(entries));
      MetricReport m;
      m.ap_k = ap_k;
      m.ap_at_k = ap_at_k(ranked, ap_k, cfg.relevance);
      for (std::size_t i = 0; i < top_ns.size(); ++i) {
        m.top[cfg.top_ns[i]] = top_n_return(ranked, top_ns[i]);
        m.riskless[cfg.top_ns[i]] = riskless_n(points, top_ns[i]);
      }
      outcome.metrics = std::move(m);
      outcome.curve = cumulative_mean_curve(ranked, curve_n);
      rep.per_model.emplace(kind, std::move(outcome));
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

WindowReport run_window(const PanelDataset& ds, const RollingWindow& window, const ExperimentConfig& cfg,
                        std::size_t window_index) {
  if (window.length != cfg.window_length || window.test_quarter != window.last_train() + 1 ||
      window.test_quarter >= ds.n_quarters())
    throw Error(ErrorKind::InvalidWindow, "window does not fit the dataset and configuration");
  const std::size_t test[] = {window.test_quarter};
  auto reports = evaluate_split(ds, window.first_train, window.length, test, cfg,
                                derive_seed(cfg.train.seed, window_index));
  reports.front().index = window_index;
  return std::move(reports.front());
}

void aggregate(BacktestReport& report) {
  report.aggregate.clear();
  report.aggregate_windows.clear();
  for (auto kind : report.config.model_kinds) {
    MetricReport sum;
    sum.ap_k = report.config.ap_k;
    std::size_t count = 0;
    for (const auto& w : report.windows) {
      auto it = w.per_model.find(kind);
      if (it == w.per_model.end() || !it->second.metrics) continue;
      const auto& m = *it->second.metrics;
      sum.ap_at_k += m.ap_at_k;
      for (const auto& [n, v] : m.top) sum.top[n] += v;
      for (const auto& [n, v] : m.riskless) sum.riskless[n] += v;
      ++count;
    }
    if (count == 0) continue;
    const double d = static_cast<double>(count);
    sum.ap_at_k /= d;
    for (auto& [n, v] : sum.top) v /= d;
    for (auto& [n, v] : sum.riskless) v /= d;
    report.aggregate.emplace(kind, std::move(sum));
    report.aggregate_windows.emplace(kind, count);
  }
}

BacktestReport run_backtest(const PanelDataset& ds, const ExperimentConfig& cfg) {
  cfg.validate();
  const auto windows = rolling_windows(ds.n_quarters(), cfg.window_length);
  BacktestReport report;
  report.config = cfg;
  report.windows.resize(windows.size());
  std::vector<std::exception_ptr> failures(windows.size());

  const auto n = static_cast<std::ptrdiff_t>(windows.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      report.windows[k] = run_window(ds, windows[k], cfg, k);
    } catch (...) {
      failures[k] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  aggregate(report);
  return report;
}

std::vector<WindowReport> holdout_experiment(const PanelDataset& ds, std::size_t n_train, const ExperimentConfig& cfg) {
  if (n_train < 2 || n_train + 1 > ds.n_quarters()) {
    throw Error(ErrorKind::InvalidWindow, "holdout needs 2 <= n_train < n_quarters (n_train=" +
                                              std::to_string(n_train) + ", quarters=" +
                                              std::to_string(ds.n_quarters()) + ")");
  }
  std::vector<std::size_t> test(ds.n_quarters() - n_train);
  std::iota(test.begin(), test.end(), n_train);
  ExperimentConfig c = cfg;
  c.window_length = n_train;
  auto reports = evaluate_split(ds, 0, n_train, test, c, derive_seed(cfg.train.seed, 0));
  for (std::size_t i = 0; i < reports.size(); ++i) reports[i].index = i;
  return reports;
}

}  // namespace rankreg
