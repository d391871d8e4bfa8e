#include "rankreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "rankreg/error.hpp"

namespace rankreg {

RankedList::RankedList(std::vector<RankedEntry> entries) : entries_(std::move(entries)) {
  for (const auto& e : entries_)
    if (std::isnan(e.score)) throw Error(ErrorKind::InvalidArgument, "score of '" + e.company_id + "' is NaN");
  std::sort(entries_.begin(), entries_.end(), [](const RankedEntry& a, const RankedEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.company_id < b.company_id;
  });
  for (std::size_t i = 1; i < entries_.size(); ++i)
    if (entries_[i].company_id == entries_[i - 1].company_id)
      throw Error(ErrorKind::InvalidArgument, "duplicate company '" + entries_[i].company_id + "' in ranking");
}

std::string_view to_string(Relevance r) { return r == Relevance::FixedK ? "fixed_k" : "varying_j"; }

Relevance parse_relevance(std::string_view s) {
  if (s == "fixed_k") return Relevance::FixedK;
  if (s == "varying_j") return Relevance::VaryingJ;
  throw Error(ErrorKind::InvalidArgument, "unknown relevance mode '" + std::string(s) + "'");
}

namespace {

void require_prefix(const RankedList& ranked, std::size_t n, const char* what) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, std::string(what) + " needs a positive cutoff");
  if (n > ranked.size()) {
    throw Error(ErrorKind::InvalidArgument, std::string(what) + " cutoff " + std::to_string(n) +
                                                " exceeds list length " + std::to_string(ranked.size()));
  }
}

}  // namespace

double ap_at_k(const RankedList& ranked, std::size_t k, Relevance relevance) {
  require_prefix(ranked, k, "AP@k");
  const auto& e = ranked.entries();
  for (const auto& x : e)
    if (!std::isfinite(x.actual_return))
      throw Error(ErrorKind::InvalidArgument, "actual return of '" + x.company_id + "' is not finite");

  // Position of every ranked entry in the true ordering by realized return.
  std::vector<std::size_t> by_actual(e.size());
  std::iota(by_actual.begin(), by_actual.end(), std::size_t{0});
  std::sort(by_actual.begin(), by_actual.end(), [&](std::size_t a, std::size_t b) {
    if (e[a].actual_return != e[b].actual_return) return e[a].actual_return > e[b].actual_return;
    return e[a].company_id < e[b].company_id;
  });
  std::vector<std::size_t> true_rank(e.size());
  for (std::size_t r = 0; r < by_actual.size(); ++r) true_rank[by_actual[r]] = r;

  double sum = 0.0;
  if (relevance == Relevance::FixedK) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (true_rank[j] < k) {
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(j + 1);
      }
    }
  } else {
    // |predicted top-j ∩ actual top-j|, maintained incrementally.
    std::vector<char> in_pred(e.size(), 0), in_true(e.size(), 0);
    std::size_t overlap = 0;
    for (std::size_t j = 0; j < k; ++j) {
      in_pred[j] = 1;
      if (in_true[j]) ++overlap;
      const std::size_t t = by_actual[j];
      in_true[t] = 1;
      if (in_pred[t]) ++overlap;
      if (true_rank[j] <= j) sum += static_cast<double>(overlap) / static_cast<double>(j + 1);
    }
  }
  return sum / static_cast<double>(k);
}

double top_n_return(const RankedList& ranked, std::size_t n) {
  require_prefix(ranked, n, "top-n return");
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += ranked[i].actual_return;
  return s / static_cast<double>(n);
}

double return_risk(std::span<const double> past_returns) {
  std::vector<double> v;
  for (double r : past_returns)
    if (std::isfinite(r)) v.push_back(r);
  if (v.size() < 2) return std::numeric_limits<double>::infinity();
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double r : v) ss += (r - mean) * (r - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<std::vector<RiskReturnPoint>> pareto_fronts(std::span<const RiskReturnPoint> points, kernels::Exec exec) {
  const std::size_t n = points.size();
  std::vector<double> risk(n), expected(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(points[i].risk) || std::isnan(points[i].expected))
      throw Error(ErrorKind::InvalidArgument, "risk/expected of '" + points[i].company_id + "' is NaN");
    risk[i] = points[i].risk;
    expected[i] = points[i].expected;
  }
  std::vector<std::uint32_t> dominated_by;
  std::vector<std::vector<std::uint32_t>> dominates;
  kernels::dominance(exec, risk, expected, dominated_by, dominates);

  std::vector<std::vector<RiskReturnPoint>> fronts;
  std::vector<std::uint32_t> current;
  for (std::size_t i = 0; i < n; ++i)
    if (dominated_by[i] == 0) current.push_back(static_cast<std::uint32_t>(i));
  while (!current.empty()) {
    std::vector<std::uint32_t> next;
    for (auto i : current)
      for (auto j : dominates[i])
        if (--dominated_by[j] == 0) next.push_back(j);
    std::vector<RiskReturnPoint> front;
    front.reserve(current.size());
    for (auto i : current) front.push_back(points[i]);
    std::sort(front.begin(), front.end(), [](const RiskReturnPoint& a, const RiskReturnPoint& b) {
      if (a.expected != b.expected) return a.expected > b.expected;
      return a.company_id < b.company_id;
    });
    fronts.push_back(std::move(front));
    current = std::move(next);
  }
  return fronts;
}

double riskless_n(std::span<const RiskReturnPoint> points, std::size_t n, kernels::Exec exec) {
  if (n == 0 || n > points.size()) {
    throw Error(ErrorKind::InvalidArgument, "riskless-n cutoff " + std::to_string(n) + " invalid for " +
                                                std::to_string(points.size()) + " points");
  }
  double s = 0.0;
  std::size_t taken = 0;
  for (const auto& front : pareto_fronts(points, exec)) {
    for (const auto& p : front) {
      if (taken == n) break;
      s += p.actual;
      ++taken;
    }
    if (taken == n) break;
  }
  return s / static_cast<double>(n);
}

Curve cumulative_mean_curve(const RankedList& ranked, std::size_t max_n) {
  if (max_n == 0) throw Error(ErrorKind::InvalidArgument, "curve length must be positive");
  Curve c;
  if (max_n > ranked.size()) {
    max_n = ranked.size();
    c.clamped = true;
  }
  c.points.reserve(max_n);
  double s = 0.0;
  for (std::size_t i = 0; i < max_n; ++i) {
    s += ranked[i].actual_return;
    c.points.push_back({i + 1, s / static_cast<double>(i + 1)});
  }
  return c;
}

}  // namespace rankreg
