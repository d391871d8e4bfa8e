#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rankreg {

/// Companies x quarters x features panel with next-quarter return targets.
///
/// Storage is dense and row-major: feature cell (q, c, f) lives at
/// `(q * n_companies + c) * n_features + f`, target (q, c) at
/// `q * n_companies + c`. Absent cells hold NaN until `impute_missing`
/// runs; the masks are kept afterwards for audit.
struct PanelDataset {
  std::vector<std::string> company_ids;
  std::vector<std::string> quarter_ids;
  std::size_t n_features = 0;
  std::vector<double> features;
  std::vector<std::uint8_t> missing_mask;
  std::vector<double> targets;
  std::vector<std::uint8_t> target_missing;

  std::size_t n_quarters() const { return quarter_ids.size(); }
  std::size_t n_companies() const { return company_ids.size(); }

  std::size_t cell(std::size_t q, std::size_t c, std::size_t f) const {
    return (q * n_companies() + c) * n_features + f;
  }
  std::size_t sample(std::size_t q, std::size_t c) const { return q * n_companies() + c; }

  std::span<const double> feature_row(std::size_t q, std::size_t c) const {
    return {features.data() + cell(q, c, 0), n_features};
  }
  bool has_target(std::size_t q, std::size_t c) const { return target_missing[sample(q, c)] == 0; }
  double target(std::size_t q, std::size_t c) const { return targets[sample(q, c)]; }

  /// Throws Error(Schema) when shapes, ids or ordering are inconsistent.
  void validate() const;
};

/// All companies of one quarter that carry a target.
struct QuarterBatch {
  std::string quarter_id;
  std::vector<std::size_t> company_indices;
  std::size_t n_features = 0;
  std::vector<double> X;  // rows x n_features, row-major
  std::vector<double> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t j) const { return {X.data() + j * n_features, n_features}; }
};

/// Frozen feature (and optionally target) standardization statistics.
struct Normalizer {
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  double target_mean = 0.0;
  double target_std = 1.0;
  bool normalize_target = false;

  static Normalizer identity(std::size_t n_features);
  double normalize_feature(std::size_t f, double x) const { return (x - feature_means[f]) / feature_stds[f]; }
};

struct RollingWindow {
  std::size_t first_train = 0;
  std::size_t length = 0;
  std::size_t test_quarter = 0;

  std::size_t last_train() const { return first_train + length - 1; }
  std::vector<std::size_t> train_quarters() const;
  bool operator==(const RollingWindow&) const = default;
};

double quarterly_return(double p0, double p1);

PanelDataset read_panel_csv(std::istream& in, std::optional<std::size_t> n_features = std::nullopt);
PanelDataset load_panel_csv(const std::filesystem::path& path,
                            std::optional<std::size_t> n_features = std::nullopt);
/// Values are written in shortest round-trip form; masked cells stay empty.
void write_panel_csv(const PanelDataset& ds, std::ostream& out);
void write_panel_csv(const PanelDataset& ds, const std::filesystem::path& path);

PanelDataset impute_missing(const PanelDataset& ds);

/// Quarters [first, first + count) as a standalone dataset.
PanelDataset select_quarters(const PanelDataset& ds, std::size_t first, std::size_t count);

/// Statistics use population std over every (quarter, company) sample that
/// has a target. Zero-variance features get std 1 so they map to zero.
Normalizer fit_normalizer(const PanelDataset& train, bool normalize_target);
PanelDataset apply_normalizer(const Normalizer& norm, const PanelDataset& ds);

std::vector<QuarterBatch> quarter_batches(const PanelDataset& ds, std::span<const std::size_t> quarter_indices);
std::vector<QuarterBatch> quarter_batches(const PanelDataset& ds);

std::vector<RollingWindow> rolling_windows(std::size_t n_quarters, std::size_t window_length);

}  // namespace rankreg
