#include <doctest.h>

#include <cmath>

#include "rankreg/backtest.hpp"
#include "rankreg/error.hpp"
#include "rankreg/serialize.hpp"
#include "rankreg/synth.hpp"

using namespace rankreg;

namespace {

PanelDataset small_panel(std::uint64_t seed, std::size_t quarters = 14, double shock = 0.1, double noise = 0.05,
                         double missing = 0.05) {
  SynthConfig c;
  c.n_companies = 40;
  c.n_quarters = quarters;
  c.n_features = 5;
  c.noise_std = noise;
  c.shock_std = shock;
  c.missing_rate = missing;
  c.coefficient_std = 0.05;
  c.seed = seed;
  return generate(c).dataset;
}

ExperimentConfig quick(std::size_t w = 4) {
  ExperimentConfig e;
  e.window_length = w;
  e.train.patience = 1500;
  e.train.max_iterations = 50000;
  e.train.loss_eval_stride = 50;
  e.ap_k = 10;
  e.top_ns = {5, 10};
  return e;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("backtest window count and aggregation") {
  const auto ds = small_panel(1, 28);
  auto cfg = quick(10);
  cfg.model_kinds = {ModelKind::RankRegression_L2, ModelKind::Naive};
  const auto report = run_backtest(ds, cfg);
  CHECK(report.windows.size() == 18);
  CHECK_FALSE(report.any_diverged());
  for (auto kind : cfg.model_kinds) {
    std::vector<double> ap, top5, risk10;
    for (const auto& w : report.windows) {
      REQUIRE(w.per_model.count(kind));
      const auto& m = *w.per_model.at(kind).metrics;
      ap.push_back(m.ap_at_k);
      top5.push_back(m.top.at(5));
      risk10.push_back(m.riskless.at(10));
      CHECK(m.ap_at_k >= 0.0);
      CHECK(m.ap_at_k <= 1.0);
    }
    const auto& agg = report.aggregate.at(kind);
    CHECK(std::abs(agg.ap_at_k - mean_of(ap)) < 1e-12);
    CHECK(std::abs(agg.top.at(5) - mean_of(top5)) < 1e-12);
    CHECK(std::abs(agg.riskless.at(10) - mean_of(risk10)) < 1e-12);
  }
  cfg.window_length = 28;
  CHECK_THROWS_AS(run_backtest(ds, cfg), Error);
}

TEST_CASE("naive model scores the last training quarter's returns and ignores features") {
  const auto ds = small_panel(2);
  auto cfg = quick();
  cfg.model_kinds = {ModelKind::Naive};
  const auto windows = rolling_windows(ds.n_quarters(), cfg.window_length);
  const auto rep = run_window(ds, windows[3], cfg, 3);
  const auto& scores = rep.per_model.at(ModelKind::Naive).scores;
  const std::size_t last = windows[3].last_train();
  for (std::size_t c = 0; c < ds.n_companies(); ++c) CHECK(scores[c] == ds.target(last, c));

  auto permuted = ds;
  for (std::size_t q = 0; q < ds.n_quarters(); ++q)
    for (std::size_t c = 0; c < ds.n_companies(); ++c)
      for (std::size_t f = 0; f < ds.n_features; ++f) {
        const std::size_t g = ds.n_features - 1 - f;
        permuted.features[ds.cell(q, c, f)] = ds.features[ds.cell(q, c, g)];
        permuted.missing_mask[ds.cell(q, c, f)] = ds.missing_mask[ds.cell(q, c, g)];
      }
  const auto a = run_backtest(ds, cfg), b = run_backtest(permuted, cfg);
  CHECK(to_json(a).dump() == to_json(b).dump());
}

TEST_CASE("normalizers are fitted on the training slice only") {
  const auto ds = small_panel(3);
  auto cfg = quick();
  cfg.model_kinds = {ModelKind::RankRegression, ModelKind::SimpleSGD};
  const auto windows = rolling_windows(ds.n_quarters(), cfg.window_length);
  const auto rep = run_window(ds, windows[0], cfg, 0);
  const auto train = impute_missing(select_quarters(ds, 0, cfg.window_length));
  for (auto kind : cfg.model_kinds) {
    const auto& norm = rep.per_model.at(kind).model->normalizer;
    CHECK(norm.normalize_target == (kind == ModelKind::SimpleSGD));
    const auto on_train = apply_normalizer(norm, train);
    const auto on_test = apply_normalizer(norm, impute_missing(select_quarters(ds, windows[0].test_quarter, 1)));
    for (std::size_t f = 0; f < ds.n_features; ++f) {
      double s = 0, ss = 0, t = 0;
      for (std::size_t i = f; i < on_train.features.size(); i += ds.n_features) s += on_train.features[i];
      s /= static_cast<double>(on_train.features.size() / ds.n_features);
      for (std::size_t i = f; i < on_train.features.size(); i += ds.n_features) ss += std::pow(on_train.features[i] - s, 2);
      ss /= static_cast<double>(on_train.features.size() / ds.n_features);
      for (std::size_t i = f; i < on_test.features.size(); i += ds.n_features) t += on_test.features[i];
      t /= static_cast<double>(on_test.features.size() / ds.n_features);
      CHECK(std::abs(s) < 1e-9);
      CHECK(std::abs(ss - 1.0) < 1e-9);
      CHECK(std::abs(t) > 1e-9);
    }
  }
}

TEST_CASE("test-quarter targets never reach training") {
  const auto ds = small_panel(4);
  auto cfg = quick();
  const auto windows = rolling_windows(ds.n_quarters(), cfg.window_length);
  auto tampered = ds;
  const std::size_t t = windows[2].test_quarter;
  for (std::size_t c = 0; c < ds.n_companies(); ++c) tampered.targets[ds.sample(t, c)] = 100.0 * (c % 3) - 50.0;
  const auto a = run_window(ds, windows[2], cfg, 2), b = run_window(tampered, windows[2], cfg, 2);
  for (auto kind : cfg.model_kinds) {
    if (kind == ModelKind::Naive) continue;
    const auto& ma = *a.per_model.at(kind).model;
    const auto& mb = *b.per_model.at(kind).model;
    CHECK(ma.coefficients == mb.coefficients);
    CHECK(ma.normalizer.feature_means == mb.normalizer.feature_means);
    CHECK(ma.normalizer.feature_stds == mb.normalizer.feature_stds);
    CHECK(ma.normalizer.target_mean == mb.normalizer.target_mean);
    CHECK(a.per_model.at(kind).scores == b.per_model.at(kind).scores);
  }
  CHECK(to_json(a).dump() != to_json(b).dump());
}

TEST_CASE("identical rankings give identical metrics") {
  const auto ds = small_panel(5);
  auto cfg = quick();
  cfg.l2_weight = 0.0;  // RankRegression_L2 collapses onto RankRegression
  cfg.model_kinds = {ModelKind::RankRegression, ModelKind::RankRegression_L2};
  const auto rep = run_window(ds, rolling_windows(ds.n_quarters(), 4)[1], cfg, 1);
  const auto a = to_json(*rep.per_model.at(ModelKind::RankRegression).metrics);
  const auto b = to_json(*rep.per_model.at(ModelKind::RankRegression_L2).metrics);
  CHECK(a.dump() == b.dump());
}

TEST_CASE("window evaluation order and thread count do not change the report") {
  const auto ds = small_panel(6);
  auto cfg = quick();
  const auto serial = to_json(run_backtest(ds, cfg)).dump();
  cfg.jobs = 3;
  CHECK(to_json(run_backtest(ds, cfg)).dump() == serial);

  cfg.jobs = 1;
  const auto windows = rolling_windows(ds.n_quarters(), cfg.window_length);
  BacktestReport reversed;
  reversed.config = cfg;
  reversed.windows.resize(windows.size());
  for (std::size_t k = windows.size(); k-- > 0;) reversed.windows[k] = run_window(ds, windows[k], cfg, k);
  aggregate(reversed);
  CHECK(to_json(reversed).dump() == serial);
}

TEST_CASE("exactly linear targets are ranked almost perfectly") {
  const auto ds = small_panel(7, 14, 0.0, 0.0, 0.0);
  auto cfg = quick();
  const auto report = run_backtest(ds, cfg);
  // The per-sample ridge penalty on SimpleSGD_L2 tilts the direction, so it is left out.
  for (auto kind : {ModelKind::RankRegression, ModelKind::RankRegression_L2, ModelKind::SimpleSGD})
    for (const auto& w : report.windows) {
      INFO(to_string(kind), " window ", w.index);
      CHECK(w.per_model.at(kind).metrics->ap_at_k > 0.9);
    }
}

TEST_CASE("large quarter shocks favour rank regression over pointwise SGD") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = small_panel(100 + seed, 14, 1.0, 0.1, 0.0);
    auto cfg = quick();
    cfg.model_kinds = {ModelKind::RankRegression_L2, ModelKind::SimpleSGD_L2};
    cfg.train.seed = seed;
    const auto r = run_backtest(ds, cfg);
    wins += r.aggregate.at(ModelKind::RankRegression_L2).ap_at_k > r.aggregate.at(ModelKind::SimpleSGD_L2).ap_at_k;
  }
  CHECK(wins >= 4);
}

TEST_CASE("divergence is isolated per model") {
  const auto ds = small_panel(8);
  auto cfg = quick();
  cfg.train.learning_rate = 5.0;
  const auto r = run_backtest(ds, cfg);
  CHECK(r.any_diverged());
  for (const auto& w : r.windows) {
    CHECK(w.per_model.at(ModelKind::RankRegression).error.has_value());
    CHECK(w.per_model.at(ModelKind::Naive).metrics.has_value());
  }
  CHECK(r.aggregate.count(ModelKind::Naive) == 1);
  CHECK(r.aggregate.count(ModelKind::RankRegression) == 0);
}

TEST_CASE("cutoffs larger than the universe are clamped with a warning") {
  const auto ds = small_panel(9);
  auto cfg = quick();
  cfg.ap_k = 100;
  cfg.model_kinds = {ModelKind::Naive};
  const auto rep = run_window(ds, rolling_windows(ds.n_quarters(), 4)[0], cfg, 0);
  CHECK(rep.per_model.at(ModelKind::Naive).metrics->ap_k == 40);
  CHECK_FALSE(rep.warnings.empty());
  CHECK(rep.per_model.at(ModelKind::Naive).curve.points.size() == 40);
}

TEST_CASE("holdout experiment") {
  const auto ds = small_panel(10, 28);
  auto cfg = quick();
  const auto reps = holdout_experiment(ds, 26, cfg);
  REQUIRE(reps.size() == 2);
  CHECK(reps[0].test_quarter_id == ds.quarter_ids[26]);
  CHECK(reps[1].test_quarter_id == ds.quarter_ids[27]);
  for (const auto& r : reps) {
    CHECK(r.per_model.size() == 5);
    for (const auto& [kind, o] : r.per_model) CHECK(o.curve.points.size() == std::min<std::size_t>(100, 40));
  }
  // Models are trained once and shared across the held-out quarters.
  CHECK(reps[0].per_model.at(ModelKind::RankRegression).model->coefficients ==
        reps[1].per_model.at(ModelKind::RankRegression).model->coefficients);
  CHECK(holdout_experiment(ds, 27, cfg).size() == 1);
  CHECK_THROWS_AS(holdout_experiment(ds, 28, cfg), Error);
}
