#include "rankreg/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "rankreg/error.hpp"

namespace rankreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_cell(std::string_view cell, std::size_t line, std::string_view column) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(value)) {
    throw ParseError(line, "column '" + std::string(column) + "': not a finite number: '" + std::string(cell) + "'");
  }
  return value;
}

bool is_iso_quarter(std::string_view q) {
  return q.size() == 7 && std::isdigit(static_cast<unsigned char>(q[0])) &&
         std::isdigit(static_cast<unsigned char>(q[1])) && std::isdigit(static_cast<unsigned char>(q[2])) &&
         std::isdigit(static_cast<unsigned char>(q[3])) && q[4] == '-' && q[5] == 'Q' && q[6] >= '1' && q[6] <= '4';
}

struct RawRow {
  std::string company;
  std::string quarter;
  std::vector<std::optional<double>> features;
  std::optional<double> target;
};

void format_double(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace

void PanelDataset::validate() const {
  if (n_features == 0) throw Error(ErrorKind::Schema, "n_features must be positive");
  const std::size_t Q = n_quarters(), C = n_companies();
  if (features.size() != Q * C * n_features || missing_mask.size() != features.size())
    throw Error(ErrorKind::Schema, "feature array shape does not match quarters x companies x features");
  if (targets.size() != Q * C || target_missing.size() != targets.size())
    throw Error(ErrorKind::Schema, "target array shape does not match quarters x companies");
  if (std::set<std::string>(company_ids.begin(), company_ids.end()).size() != C)
    throw Error(ErrorKind::Schema, "company ids are not unique");
  if (std::set<std::string>(quarter_ids.begin(), quarter_ids.end()).size() != Q)
    throw Error(ErrorKind::Schema, "quarter ids are not unique");
}

Normalizer Normalizer::identity(std::size_t n_features) {
  Normalizer n;
  n.feature_means.assign(n_features, 0.0);
  n.feature_stds.assign(n_features, 1.0);
  return n;
}

std::vector<std::size_t> RollingWindow::train_quarters() const {
  std::vector<std::size_t> q(length);
  std::iota(q.begin(), q.end(), first_train);
  return q;
}

double quarterly_return(double p0, double p1) {
  if (!std::isfinite(p0) || p0 <= 0.0) throw Error(ErrorKind::InvalidPrice, "base price must be positive and finite");
  if (!std::isfinite(p1)) throw Error(ErrorKind::InvalidPrice, "price must be finite");
  return (p1 - p0) / p0;
}

PanelDataset read_panel_csv(std::istream& in, std::optional<std::size_t> n_features) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    for (auto h : split_commas(line)) header.emplace_back(h);
    break;
  }
  if (header.empty()) throw ParseError(line_no, "missing header row");
  if (header.size() < 4 || header[0] != "company_id" || header[1] != "quarter" || header.back() != "next_return")
    throw Error(ErrorKind::Schema, "header must be company_id,quarter,[quarter_order,]f1..fK,next_return");
  const bool has_order = header[2] == "quarter_order";
  const std::size_t first_feature = has_order ? 3 : 2;
  if (header.size() < first_feature + 2) throw Error(ErrorKind::Schema, "header declares no feature columns");
  const std::size_t K = header.size() - first_feature - 1;
  if (n_features && *n_features != K) {
    throw Error(ErrorKind::Schema, "header declares " + std::to_string(K) + " features, expected " +
                                       std::to_string(*n_features));
  }

  std::vector<RawRow> rows;
  std::map<std::string, long long> quarter_order;
  std::set<std::pair<std::string, std::string>> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(cells.size()));
    }
    RawRow row;
    row.company = std::string(cells[0]);
    row.quarter = std::string(cells[1]);
    if (row.company.empty()) throw ParseError(line_no, "empty company_id");
    if (row.quarter.empty()) throw ParseError(line_no, "empty quarter");
    if (has_order) {
      long long order = 0;
      auto cell = cells[2];
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), order);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw ParseError(line_no, "quarter_order is not an integer");
      auto [it, inserted] = quarter_order.emplace(row.quarter, order);
      if (!inserted && it->second != order)
        throw ParseError(line_no, "quarter '" + row.quarter + "' has conflicting quarter_order values");
    } else {
      if (!is_iso_quarter(row.quarter))
        throw ParseError(line_no, "quarter label '" + row.quarter + "' is not YYYY-Qn and no quarter_order column");
      quarter_order.emplace(row.quarter, 0);
    }
    if (!seen.emplace(row.company, row.quarter).second) {
      throw Error(ErrorKind::DuplicateKey,
                  "line " + std::to_string(line_no) + ": duplicate (company, quarter) pair (" + row.company + ", " +
                      row.quarter + ")");
    }
    row.features.reserve(K);
    for (std::size_t k = 0; k < K; ++k)
      row.features.push_back(parse_cell(cells[first_feature + k], line_no, header[first_feature + k]));
    row.target = parse_cell(cells.back(), line_no, "next_return");
    rows.push_back(std::move(row));
  }

  PanelDataset ds;
  ds.n_features = K;
  std::set<std::string> companies;
  for (const auto& r : rows) companies.insert(r.company);
  ds.company_ids.assign(companies.begin(), companies.end());
  for (const auto& [q, _] : quarter_order) ds.quarter_ids.push_back(q);
  if (has_order) {
    std::stable_sort(ds.quarter_ids.begin(), ds.quarter_ids.end(),
                     [&](const std::string& a, const std::string& b) { return quarter_order[a] < quarter_order[b]; });
    for (std::size_t i = 1; i < ds.quarter_ids.size(); ++i) {
      if (quarter_order[ds.quarter_ids[i - 1]] == quarter_order[ds.quarter_ids[i]])
        throw Error(ErrorKind::Schema, "quarters '" + ds.quarter_ids[i - 1] + "' and '" + ds.quarter_ids[i] +
                                           "' share a quarter_order value");
    }
  }

  std::unordered_map<std::string, std::size_t> c_index, q_index;
  for (std::size_t i = 0; i < ds.company_ids.size(); ++i) c_index[ds.company_ids[i]] = i;
  for (std::size_t i = 0; i < ds.quarter_ids.size(); ++i) q_index[ds.quarter_ids[i]] = i;

  const std::size_t Q = ds.n_quarters(), C = ds.n_companies();
  ds.features.assign(Q * C * K, kNaN);
  ds.missing_mask.assign(Q * C * K, 1);
  ds.targets.assign(Q * C, kNaN);
  ds.target_missing.assign(Q * C, 1);
  for (const auto& r : rows) {
    const std::size_t q = q_index[r.quarter], c = c_index[r.company];
    for (std::size_t k = 0; k < K; ++k) {
      if (r.features[k]) {
        ds.features[ds.cell(q, c, k)] = *r.features[k];
        ds.missing_mask[ds.cell(q, c, k)] = 0;
      }
    }
    if (r.target) {
      ds.targets[ds.sample(q, c)] = *r.target;
      ds.target_missing[ds.sample(q, c)] = 0;
    }
  }
  ds.validate();
  return ds;
}

PanelDataset load_panel_csv(const std::filesystem::path& path, std::optional<std::size_t> n_features) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open panel file '" + path.string() + "'");
  return read_panel_csv(in, n_features);
}

void write_panel_csv(const PanelDataset& ds, std::ostream& out) {
  out << "company_id,quarter";
  for (std::size_t k = 0; k < ds.n_features; ++k) out << ",f" << (k + 1);
  out << ",next_return\n";
  for (std::size_t q = 0; q < ds.n_quarters(); ++q) {
    for (std::size_t c = 0; c < ds.n_companies(); ++c) {
      out << ds.company_ids[c] << ',' << ds.quarter_ids[q];
      for (std::size_t k = 0; k < ds.n_features; ++k) {
        out << ',';
        if (!ds.missing_mask[ds.cell(q, c, k)]) format_double(out, ds.features[ds.cell(q, c, k)]);
      }
      out << ',';
      if (ds.has_target(q, c)) format_double(out, ds.target(q, c));
      out << '\n';
    }
  }
}

void write_panel_csv(const PanelDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write panel file '" + path.string() + "'");
  write_panel_csv(ds, out);
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

PanelDataset impute_missing(const PanelDataset& ds) {
  PanelDataset out = ds;
  for (std::size_t i = 0; i < out.features.size(); ++i)
    if (out.missing_mask[i]) out.features[i] = 0.0;
  return out;
}

PanelDataset select_quarters(const PanelDataset& ds, std::size_t first, std::size_t count) {
  if (first + count > ds.n_quarters()) throw Error(ErrorKind::InvalidArgument, "quarter slice out of range");
  PanelDataset out;
  out.company_ids = ds.company_ids;
  out.quarter_ids.assign(ds.quarter_ids.begin() + first, ds.quarter_ids.begin() + first + count);
  out.n_features = ds.n_features;
  const std::size_t C = ds.n_companies(), F = ds.n_features;
  auto fb = static_cast<std::ptrdiff_t>(first * C * F), fe = static_cast<std::ptrdiff_t>((first + count) * C * F);
  auto tb = static_cast<std::ptrdiff_t>(first * C), te = static_cast<std::ptrdiff_t>((first + count) * C);
  out.features.assign(ds.features.begin() + fb, ds.features.begin() + fe);
  out.missing_mask.assign(ds.missing_mask.begin() + fb, ds.missing_mask.begin() + fe);
  out.targets.assign(ds.targets.begin() + tb, ds.targets.begin() + te);
  out.target_missing.assign(ds.target_missing.begin() + tb, ds.target_missing.begin() + te);
  return out;
}

Normalizer fit_normalizer(const PanelDataset& train, bool normalize_target) {
  const std::size_t F = train.n_features;
  Normalizer norm;
  norm.normalize_target = normalize_target;
  norm.feature_means.assign(F, 0.0);
  norm.feature_stds.assign(F, 1.0);

  std::vector<std::pair<std::size_t, std::size_t>> samples;
  for (std::size_t q = 0; q < train.n_quarters(); ++q)
    for (std::size_t c = 0; c < train.n_companies(); ++c)
      if (train.has_target(q, c)) samples.emplace_back(q, c);
  if (samples.size() < 2) throw Error(ErrorKind::InvalidArgument, "normalizer needs at least two samples");
  const double n = static_cast<double>(samples.size());

  // Two-pass moments; masked cells count as zero to match the imputed data.
  auto value = [&](std::size_t q, std::size_t c, std::size_t f) {
    return train.missing_mask[train.cell(q, c, f)] ? 0.0 : train.features[train.cell(q, c, f)];
  };
  for (std::size_t f = 0; f < F; ++f) {
    double sum = 0.0;
    for (auto [q, c] : samples) sum += value(q, c, f);
    const double mean = sum / n;
    double ss = 0.0;
    for (auto [q, c] : samples) {
      const double d = value(q, c, f) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    norm.feature_means[f] = mean;
    norm.feature_stds[f] = sd > 0.0 ? sd : 1.0;
  }
  if (normalize_target) {
    double sum = 0.0;
    for (auto [q, c] : samples) sum += train.target(q, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (auto [q, c] : samples) {
      const double d = train.target(q, c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    norm.target_mean = mean;
    norm.target_std = sd > 0.0 ? sd : 1.0;
  }
  return norm;
}

PanelDataset apply_normalizer(const Normalizer& norm, const PanelDataset& ds) {
  if (norm.feature_means.size() != ds.n_features || norm.feature_stds.size() != ds.n_features)
    throw Error(ErrorKind::Schema, "normalizer feature count does not match dataset");
  PanelDataset out = ds;
  const std::size_t F = ds.n_features;
  for (std::size_t i = 0; i < out.features.size(); ++i) {
    const double x = out.missing_mask[i] && std::isnan(out.features[i]) ? 0.0 : out.features[i];
    out.features[i] = norm.normalize_feature(i % F, x);
  }
  if (norm.normalize_target) {
    for (std::size_t i = 0; i < out.targets.size(); ++i)
      if (!out.target_missing[i]) out.targets[i] = (out.targets[i] - norm.target_mean) / norm.target_std;
  }
  return out;
}

std::vector<QuarterBatch> quarter_batches(const PanelDataset& ds, std::span<const std::size_t> quarter_indices) {
  std::vector<QuarterBatch> batches;
  batches.reserve(quarter_indices.size());
  for (std::size_t q : quarter_indices) {
    if (q >= ds.n_quarters()) throw Error(ErrorKind::InvalidArgument, "quarter index out of range");
    QuarterBatch b;
    b.quarter_id = ds.quarter_ids[q];
    b.n_features = ds.n_features;
    for (std::size_t c = 0; c < ds.n_companies(); ++c) {
      if (!ds.has_target(q, c)) continue;
      b.company_indices.push_back(c);
      auto row = ds.feature_row(q, c);
      b.X.insert(b.X.end(), row.begin(), row.end());
      b.y.push_back(ds.target(q, c));
    }
    if (b.size() < 2) {
      throw Error(ErrorKind::DegenerateBatch, "quarter '" + b.quarter_id + "' has " + std::to_string(b.size()) +
                                                  " companies with targets; at least 2 required");
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

std::vector<QuarterBatch> quarter_batches(const PanelDataset& ds) {
  std::vector<std::size_t> all(ds.n_quarters());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return quarter_batches(ds, all);
}

std::vector<RollingWindow> rolling_windows(std::size_t n_quarters, std::size_t window_length) {
  if (window_length == 0 || window_length >= n_quarters) {
    throw Error(ErrorKind::InvalidWindow, "window length " + std::to_string(window_length) +
                                              " needs at least " + std::to_string(window_length + 1) +
                                              " quarters, dataset has " + std::to_string(n_quarters));
  }
  std::vector<RollingWindow> out;
  for (std::size_t k = 0; k + window_length < n_quarters; ++k) out.push_back({k, window_length, k + window_length});
  return out;
}

}  // namespace rankreg
