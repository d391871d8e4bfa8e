// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "rankreg/backtest.hpp"
#include "rankreg/metrics.hpp"
#include "rankreg/models.hpp"
#include "rankreg/serialize.hpp"
#include "rankreg/synth.hpp"
#include "test_support.hpp"

using namespace rankreg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(const char* id, const char* title, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0 && secs >= limit_s) {
    o.pass = false;
    o.detail += "; over time limit";
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%s, %.2f s)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

SynthConfig desk_scale(std::uint64_t seed) {
  SynthConfig c;
  c.n_companies = 200;
  c.n_quarters = 28;
  c.n_features = 25;
  c.noise_std = 0.05;
  c.shock_std = 0.10;
  c.missing_rate = 0.05;
  c.seed = seed;
  return c;
}

Outcome gradient_check() {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> feats(1, 25), comps(2, 50);
  std::uniform_real_distribution<double> lambda(0.0, 2.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t F = feats(rng), n = comps(rng);
    const auto batch = testing::random_batch(rng, n, F);
    const auto p = testing::random_vector(rng, F, 0.5);
    const double l2 = t % 5 == 0 ? 0.0 : lambda(rng);
    const auto g = rr_batch_gradient(p, batch, l2);
    const auto fd = testing::finite_difference(p, batch, l2, 1e-6);
    for (std::size_t f = 0; f < F; ++f)
      worst = std::max(worst, std::abs(g[f] - fd[f]) / std::max({std::abs(g[f]), std::abs(fd[f]), 1e-8}));
  }
  return {worst < 1e-5, fmt("max relative error %.3g over 50 triples", worst)};
}

Outcome shift_invariance() {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> shift(0.0, 10.0);
  double loss_d = 0.0, grad_d = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto batch = testing::random_batch(rng, 5 + t, 1 + t % 25);
    auto moved = batch;
    const double c = shift(rng);
    for (auto& y : moved.y) y += c;
    const auto p = testing::random_vector(rng, batch.n_features, 0.5);
    const double l2 = t % 2;
    loss_d = std::max(loss_d, std::abs(rr_batch_loss(p, batch, l2) - rr_batch_loss(p, moved, l2)));
    grad_d = std::max(grad_d, max_abs_diff(rr_batch_gradient(p, batch, l2), rr_batch_gradient(p, moved, l2)));
  }

  const auto batches = testing::linear_batches(rng, 6, 40, 5, {0.05, -0.03, 0.02, 0.01, -0.04}, 0.05);
  auto moved = batches;
  for (auto& b : moved) {
    const double c = shift(rng);
    for (auto& y : b.y) y += c;
  }
  TrainConfig cfg;
  cfg.patience = 3000;
  cfg.loss_eval_stride = 10;
  double rr_d = 0.0;
  for (double l2 : {0.0, 1.0})
    rr_d = std::max(rr_d, max_abs_diff(train_rank_regression(batches, cfg, l2).model.coefficients,
                                       train_rank_regression(moved, cfg, l2).model.coefficients));
  const double sgd_d = max_abs_diff(train_simple_sgd(batches, cfg, 1.0).model.coefficients,
                                    train_simple_sgd(moved, cfg, 1.0).model.coefficients);
  const bool ok = loss_d < 1e-9 && grad_d < 1e-9 && rr_d < 1e-9 && sgd_d > 1e-3;
  return {ok, fmt("loss %.2g, gradient %.2g, rank coefficients %.2g, SGD coefficients %.3g", loss_d, grad_d, rr_d,
                  sgd_d)};
}

Outcome closed_form() {
  std::mt19937_64 rng(3);
  const std::size_t L = 4, n = 20, F = 5;
  const auto batches = testing::linear_batches(rng, L, n, F, {0.05, -0.03, 0.02, 0.0, 0.04}, 0.05);
  Eigen::MatrixXd Xc(L * n, F);
  Eigen::VectorXd yc(L * n);
  for (std::size_t l = 0; l < L; ++l) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(batches[l].X.data(), n, F);
    Eigen::Map<const Eigen::VectorXd> y(batches[l].y.data(), n);
    Xc.block(l * n, 0, n, F) = X.rowwise() - X.colwise().mean();
    yc.segment(l * n, n) = y.array() - y.mean();
  }
  double worst = 0.0;
  for (double l2 : {0.0, 1.0}) {
    const Eigen::MatrixXd A = Xc.transpose() * Xc + (L * l2 / 2.0) * Eigen::MatrixXd::Identity(F, F);
    const Eigen::VectorXd closed = A.ldlt().solve(Xc.transpose() * yc);
    TrainConfig cfg;
    cfg.learning_rate = 1e-4;
    cfg.loss_eval_stride = 10;
    const auto r = train_rank_regression(batches, cfg, l2);
    for (std::size_t f = 0; f < F; ++f) worst = std::max(worst, std::abs(r.model.coefficients[f] - closed[f]));
  }
  return {worst < 1e-3, fmt("max-norm distance %.3g for lambda in {0, 1}", worst)};
}

Outcome metric_oracles() {
  std::size_t ap_cases = 0, ap_bad = 0;
  for (std::size_t n = 1; n <= 8; ++n) {
    std::vector<double> actual(n);
    for (std::size_t i = 0; i < n; ++i) actual[i] = std::cos(2.3 * static_cast<double>(i) + 0.1);
    if (n > 4) actual[4] = actual[0];
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return actual[a] != actual[b] ? actual[a] > actual[b] : testing::id(a) < testing::id(b);
    });
    std::vector<std::string> truth;
    for (auto i : idx) truth.push_back(testing::id(i));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      std::vector<RankedEntry> entries;
      std::vector<std::string> predicted;
      for (std::size_t r = 0; r < n; ++r) {
        entries.push_back({testing::id(perm[r]), static_cast<double>(n - r), actual[perm[r]]});
        predicted.push_back(testing::id(perm[r]));
      }
      const RankedList list(entries);
      for (std::size_t k = 1; k <= n; ++k) {
        ap_cases += 2;
        ap_bad += std::abs(ap_at_k(list, k, Relevance::FixedK) - testing::literal_ap(predicted, truth, k, true)) > 1e-12;
        ap_bad +=
            std::abs(ap_at_k(list, k, Relevance::VaryingJ) - testing::literal_ap(predicted, truth, k, false)) > 1e-12;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> size(1, 100);
  std::uniform_int_distribution<int> grid(0, 9);
  std::size_t front_bad = 0, riskless_bad = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = size(rng);
    std::vector<RiskReturnPoint> pts;
    for (std::size_t i = 0; i < n; ++i) {
      const bool coarse = inst % 2 == 0;
      const double r = coarse ? grid(rng) : std::abs(testing::random_vector(rng, 1)[0]);
      const double e = coarse ? grid(rng) : testing::random_vector(rng, 1)[0];
      pts.push_back({testing::id(i), r, e, testing::random_vector(rng, 1, 0.1)[0]});
    }
    const auto fronts = pareto_fronts(pts);
    const auto oracle = testing::peeling_fronts(pts);
    bool same = fronts.size() == oracle.size();
    for (std::size_t k = 0; same && k < fronts.size(); ++k) {
      std::set<std::string> got;
      for (const auto& p : fronts[k]) got.insert(p.company_id);
      same = got == oracle[k];
    }
    front_bad += !same;
    for (std::size_t take : {std::size_t{1}, (n + 1) / 2, n})
      riskless_bad += std::abs(riskless_n(pts, take) - testing::oracle_riskless(pts, take)) > 1e-12;
  }
  const bool ok = ap_bad == 0 && front_bad == 0 && riskless_bad == 0;
  return {ok, fmt("AP mismatches %zu/%zu, front mismatches %zu/200, riskless mismatches %zu/600", ap_bad, ap_cases,
                  front_bad, riskless_bad)};
}

Outcome window_counts() {
  const std::size_t a = rolling_windows(28, 10).size(), b = rolling_windows(28, 15).size(),
                    c = rolling_windows(28, 20).size();
  return {a == 18 && b == 13 && c == 8, fmt("w=10,15,20 give %zu, %zu, %zu windows", a, b, c)};
}

long long max_iterations_seen = 0;

Outcome desk_scale_reproduction() {
  int rr_wins = 0, naive_last = 0;
  std::string seeds;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = generate(desk_scale(seed)).dataset;
    ExperimentConfig cfg;
    cfg.train.seed = seed;
    const auto report = run_backtest(ds, cfg);
    if (report.any_diverged()) return {false, fmt("seed %llu diverged", static_cast<unsigned long long>(seed))};
    if (report.windows.size() != 18) return {false, "unexpected window count"};
    for (const auto& w : report.windows)
      for (const auto& [kind, o] : w.per_model)
        if (o.trace) max_iterations_seen = std::max(max_iterations_seen, o.trace->iterations_run);
    const auto& agg = report.aggregate;
    const double rr = agg.at(ModelKind::RankRegression_L2).ap_at_k;
    const double sgd = agg.at(ModelKind::SimpleSGD_L2).ap_at_k;
    const double naive = agg.at(ModelKind::Naive).ap_at_k;
    rr_wins += rr > sgd;
    bool last = true;
    for (const auto& [kind, m] : agg)
      if (kind != ModelKind::Naive && m.ap_at_k <= naive) last = false;
    naive_last += last;
    seeds += fmt(" [%llu: rr=%.4f sgd=%.4f naive=%.4f]", static_cast<unsigned long long>(seed), rr, sgd, naive);
  }
  return {rr_wins >= 8 && naive_last >= 8,
          fmt("RankRegression_L2 beats SimpleSGD_L2 in %d/10 seeds, Naive last in %d/10;", rr_wins, naive_last) +
              seeds};
}

Outcome curve_shape() {
  int holds = 0;
  std::string seeds;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto ds = generate(desk_scale(100 + seed)).dataset;
    ExperimentConfig cfg;
    cfg.model_kinds = {ModelKind::RankRegression_L2};
    cfg.curve_max_n = ds.n_companies();
    cfg.train.seed = seed;
    const auto reports = holdout_experiment(ds, 26, cfg);
    bool ok = true;
    for (const auto& w : reports) {
      const auto& pts = w.per_model.at(ModelKind::RankRegression_L2).curve.points;
      if (pts.size() != w.universe_size) return {false, "curve does not reach the universe size"};
      const double at20 = pts[19].mean_return, at_all = pts.back().mean_return;
      ok = ok && at20 > at_all;
      seeds += fmt(" [%llu %s: %.4f vs %.4f]", static_cast<unsigned long long>(seed), w.test_quarter_id.c_str(), at20,
                   at_all);
    }
    holds += ok;
  }
  return {holds >= 8, fmt("top-20 mean exceeds universe mean in both held-out quarters for %d/10 seeds;", holds) +
                          seeds};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(const std::string& cmd) { return std::system((cmd + " > /dev/null").c_str()); }

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "rankreg_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = RANKREG_CLI_PATH;
  write_text_file(dir / "synth.json", to_json(desk_scale(7)).dump());
  if (run(cli + " synth --config " + (dir / "synth.json").string() + " --out " + dir.string()) != 0)
    return {false, "synth failed"};
  const std::string base = cli + " backtest --data " + (dir / "panel.csv").string() + " --seed 11 --out ";
  if (run(base + (dir / "a").string()) != 0 || run(base + (dir / "b").string()) != 0 ||
      run(base + (dir / "c").string() + " --jobs 4") != 0)
    return {false, "backtest failed"};
  const auto a = slurp(dir / "a" / "backtest_report.json");
  const bool rerun = a == slurp(dir / "b" / "backtest_report.json");
  const bool jobs = a == slurp(dir / "c" / "backtest_report.json");
  return {!a.empty() && rerun && jobs, fmt("rerun identical: %s, --jobs 4 identical to --jobs 1: %s (%zu bytes)",
                                           rerun ? "yes" : "no", jobs ? "yes" : "no", a.size())};
}

Outcome stopping_rule() {
  std::mt19937_64 rng(9);
  const auto batches = testing::linear_batches(rng, 5, 30, 4, {0.1, -0.2, 0.05, 0.0}, 0.05);
  TrainConfig frozen;
  frozen.learning_rate = 0.0;
  std::string detail;
  bool ok = true;
  for (bool rank : {true, false}) {
    const auto r = rank ? train_rank_regression(batches, frozen, 1.0) : train_simple_sgd(batches, frozen, 1.0);
    const long long first = r.trace.loss_history.empty() ? -1 : r.trace.loss_history.front().iteration;
    const long long past = r.trace.iterations_run - first;
    ok = ok && r.trace.stop_reason == StopReason::Patience && first >= 0 && past == frozen.patience;
    detail += fmt("%s stops %lld iterations after the first evaluation; ", rank ? "rank" : "sgd", past);
  }
  TrainConfig creeping;
  creeping.learning_rate = 1e-9;
  creeping.min_rel_improvement = 0.0;
  creeping.loss_eval_stride = 1000;
  const auto capped = train_rank_regression(batches, creeping, 0.0);
  ok = ok && capped.trace.stop_reason == StopReason::Cap && capped.trace.iterations_run == 800000;
  ok = ok && max_iterations_seen <= 800000;
  detail += fmt("steadily improving run capped at %lld; longest backtest run %lld", capped.trace.iterations_run,
                max_iterations_seen);
  return {ok, detail};
}

}  // namespace

int main() {
  criterion("AC1", "gradient matches central finite differences", 10, gradient_check);
  criterion("AC2", "per-quarter target shifts leave rank regression unchanged", 0, shift_invariance);
  criterion("AC3", "rank regression matches the ridge normal equations", 30, closed_form);
  criterion("AC4", "AP, Pareto front and riskless-n oracles", 60, metric_oracles);
  criterion("AC5", "rolling-window counts on 28 quarters", 0, window_counts);
  criterion("AC6", "desk-scale ranking of models over 10 seeds", 600, desk_scale_reproduction);
  criterion("AC7", "holdout curve: top 20 beat the universe mean", 0, curve_shape);
  criterion("AC8", "backtest output is deterministic across reruns and thread counts", 0, determinism);
  criterion("AC9", "stopping rule and iteration cap", 0, stopping_rule);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
