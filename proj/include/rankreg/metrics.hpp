#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankreg/kernels.hpp"

namespace rankreg {

struct RankedEntry {
  std::string company_id;
  double score = 0.0;
  double actual_return = 0.0;
};

/// Entries ordered by score descending, ties by company_id ascending.
class RankedList {
 public:
  RankedList() = default;
  explicit RankedList(std::vector<RankedEntry> entries);

  const std::vector<RankedEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  const RankedEntry& operator[](std::size_t i) const { return entries_[i]; }

 private:
  std::vector<RankedEntry> entries_;
};

/// How rel(j) is decided inside AP@k.
///   FixedK:   the j-th recommendation is among the true top-k performers.
///   VaryingJ: the j-th recommendation is among the true top-j performers.
enum class Relevance { FixedK, VaryingJ };
std::string_view to_string(Relevance r);
Relevance parse_relevance(std::string_view s);

double ap_at_k(const RankedList& ranked, std::size_t k, Relevance relevance = Relevance::FixedK);

double top_n_return(const RankedList& ranked, std::size_t n);

struct RiskReturnPoint {
  std::string company_id;
  double risk = 0.0;
  double expected = 0.0;
  double actual = 0.0;
};

/// Population std of the observed returns; +infinity with fewer than two.
double return_risk(std::span<const double> past_returns);

/// Non-dominated fronts on (low risk, high expected). Each front is sorted by
/// expected descending, company_id ascending.
std::vector<std::vector<RiskReturnPoint>> pareto_fronts(std::span<const RiskReturnPoint> points,
                                                        kernels::Exec exec = kernels::Exec::Serial);

double riskless_n(std::span<const RiskReturnPoint> points, std::size_t n, kernels::Exec exec = kernels::Exec::Serial);

struct CurvePoint {
  std::size_t n;
  double mean_return;
};

struct Curve {
  std::vector<CurvePoint> points;
  bool clamped = false;
};

/// Running mean of actual returns down the ranking, n = 1..max_n. A max_n
/// beyond the list is clamped and flagged.
Curve cumulative_mean_curve(const RankedList& ranked, std::size_t max_n);

struct MetricReport {
  std::size_t ap_k = 0;
  double ap_at_k = 0.0;
  std::map<std::size_t, double> top;
  std::map<std::size_t, double> riskless;
};

}  // namespace rankreg
