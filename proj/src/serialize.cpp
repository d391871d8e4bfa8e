#include "rankreg/serialize.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rankreg/error.hpp"

namespace rankreg {

namespace {

void put_double(std::ostream& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

template <class T>
T require(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Schema, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T optional_field(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json to_json(const Normalizer& n) {
  return json{{"feature_means", n.feature_means},
              {"feature_stds", n.feature_stds},
              {"target_mean", n.target_mean},
              {"target_std", n.target_std},
              {"normalize_target", n.normalize_target}};
}

Normalizer normalizer_from_json(const json& j) {
  Normalizer n;
  n.feature_means = require<std::vector<double>>(j, "feature_means");
  n.feature_stds = require<std::vector<double>>(j, "feature_stds");
  n.target_mean = require<double>(j, "target_mean");
  n.target_std = require<double>(j, "target_std");
  n.normalize_target = require<bool>(j, "normalize_target");
  if (n.feature_means.size() != n.feature_stds.size())
    throw Error(ErrorKind::Schema, "feature_means and feature_stds differ in length");
  for (double s : n.feature_stds)
    if (!(s > 0.0)) throw Error(ErrorKind::Schema, "feature_stds must be strictly positive");
  if (!(n.target_std > 0.0)) throw Error(ErrorKind::Schema, "target_std must be strictly positive");
  return n;
}

json to_json(const TrainTrace& t) {
  return json{{"iterations_run", t.iterations_run},
              {"best_loss", t.best_loss},
              {"best_iteration", t.best_iteration},
              {"stop_reason", std::string(to_string(t.stop_reason))}};
}

json model_to_json(ModelKind kind, const LinearModel& model, const TrainTrace* trace) {
  json j{{"kind", std::string(to_string(kind))},
         {"coefficients", model.coefficients},
         {"normalizer", to_json(model.normalizer)}};
  if (trace) j["train_trace"] = to_json(*trace);
  return j;
}

json to_json(const MetricReport& m) {
  json j;
  j["ap_k"] = m.ap_k;
  j["ap_at_k"] = m.ap_at_k;
  for (const auto& [n, v] : m.top) j["top" + std::to_string(n)] = v;
  for (const auto& [n, v] : m.riskless) j["riskless" + std::to_string(n)] = v;
  return j;
}

json to_json(const WindowReport& w) {
  json j;
  j["window_id"] = w.index;
  j["train_first"] = w.window.first_train;
  j["train_length"] = w.window.length;
  j["test_quarter"] = w.window.test_quarter;
  j["test_quarter_id"] = w.test_quarter_id;
  j["seed"] = w.seed;
  j["universe_size"] = w.universe_size;
  json models = json::object();
  for (const auto& [kind, o] : w.per_model) {
    json m;
    m["kind"] = std::string(to_string(kind));
    m["window_id"] = w.index;
    if (o.error) {
      m["error"] = *o.error;
    } else {
      m["metrics"] = to_json(*o.metrics);
      if (o.model) m["model"] = model_to_json(kind, *o.model, o.trace ? &*o.trace : nullptr);
      json curve = json::array();
      for (const auto& p : o.curve.points) curve.push_back(json::array({p.n, p.mean_return}));
      m["curve"] = std::move(curve);
    }
    models[std::string(to_string(kind))] = std::move(m);
  }
  j["models"] = std::move(models);
  j["warnings"] = w.warnings;
  return j;
}

json to_json(const ExperimentConfig& c) {
  json kinds = json::array();
  for (auto k : c.model_kinds) kinds.push_back(std::string(to_string(k)));
  return json{{"window_length", c.window_length},
              {"model_kinds", kinds},
              {"train",
               {{"learning_rate", c.train.learning_rate},
                {"patience", c.train.patience},
                {"max_iterations", c.train.max_iterations},
                {"seed", c.train.seed},
                {"loss_eval_stride", c.train.loss_eval_stride},
                {"min_rel_improvement", c.train.min_rel_improvement}}},
              {"lambda", c.l2_weight},
              {"ap_k", c.ap_k},
              {"top_ns", c.top_ns},
              {"relevance", std::string(to_string(c.relevance))},
              {"curve_max_n", c.curve_max_n}};
}

namespace {
json metadata(const ExperimentConfig& c) {
  return json{{"std_convention", "population"},
              {"constant_feature_std", 1.0},
              {"imputation", "zero-fill before normalization"},
              {"ap_relevance", std::string(to_string(c.relevance))},
              {"riskless_dominance_objective", "model_score"},
              {"riskless_reported_return", "actual"},
              {"risk_measure", "population std of train-window returns"},
              {"tie_break", "company_id ascending"}};
}
}  // namespace

json to_json(const BacktestReport& r) {
  json j;
  j["config"] = to_json(r.config);
  j["metadata"] = metadata(r.config);
  json windows = json::array();
  for (const auto& w : r.windows) windows.push_back(to_json(w));
  j["windows"] = std::move(windows);
  json agg = json::object();
  for (auto kind : r.config.model_kinds) {
    auto it = r.aggregate.find(kind);
    if (it == r.aggregate.end()) continue;
    json m = to_json(it->second);
    m["windows"] = r.aggregate_windows.at(kind);
    agg[std::string(to_string(kind))] = std::move(m);
  }
  j["aggregate"] = std::move(agg);
  j["any_diverged"] = r.any_diverged();
  return j;
}

json holdout_to_json(const std::vector<WindowReport>& reports, const ExperimentConfig& cfg) {
  json j;
  j["config"] = to_json(cfg);
  j["metadata"] = metadata(cfg);
  json q = json::array();
  for (const auto& w : reports) q.push_back(to_json(w));
  j["quarters"] = std::move(q);
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, "experiment config must be a JSON object");
  ExperimentConfig c;
  c.window_length = optional_field<std::size_t>(j, "window_length", c.window_length);
  if (j.contains("model_kinds")) {
    c.model_kinds.clear();
    for (const auto& name : require<std::vector<std::string>>(j, "model_kinds"))
      c.model_kinds.push_back(parse_model_kind(name));
  }
  if (j.contains("train")) {
    const auto& t = j.at("train");
    c.train.learning_rate = optional_field<double>(t, "learning_rate", c.train.learning_rate);
    c.train.patience = optional_field<long long>(t, "patience", c.train.patience);
    c.train.max_iterations = optional_field<long long>(t, "max_iterations", c.train.max_iterations);
    c.train.seed = optional_field<std::uint64_t>(t, "seed", c.train.seed);
    c.train.loss_eval_stride = optional_field<long long>(t, "loss_eval_stride", c.train.loss_eval_stride);
    c.train.min_rel_improvement = optional_field<double>(t, "min_rel_improvement", c.train.min_rel_improvement);
  }
  c.l2_weight = optional_field<double>(j, "lambda", c.l2_weight);
  c.ap_k = optional_field<std::size_t>(j, "ap_k", c.ap_k);
  c.top_ns = optional_field<std::vector<std::size_t>>(j, "top_ns", c.top_ns);
  c.relevance = parse_relevance(optional_field<std::string>(j, "relevance", std::string(to_string(c.relevance))));
  c.curve_max_n = optional_field<std::size_t>(j, "curve_max_n", c.curve_max_n);
  return c;
}

json to_json(const SynthConfig& c) {
  return json{{"n_companies", c.n_companies},
              {"n_quarters", c.n_quarters},
              {"n_features", c.n_features},
              {"true_coefficients", c.true_coefficients},
              {"coefficient_std", c.coefficient_std},
              {"noise_std", c.noise_std},
              {"shock_std", c.shock_std},
              {"missing_rate", c.missing_rate},
              {"seed", c.seed},
              {"start_year", c.start_year}};
}

SynthConfig synth_config_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Schema, "synth config must be a JSON object");
  SynthConfig c;
  c.n_companies = optional_field<std::size_t>(j, "n_companies", c.n_companies);
  c.n_quarters = optional_field<std::size_t>(j, "n_quarters", c.n_quarters);
  c.n_features = optional_field<std::size_t>(j, "n_features", c.n_features);
  c.true_coefficients = optional_field<std::vector<double>>(j, "true_coefficients", {});
  c.coefficient_std = optional_field<double>(j, "coefficient_std", c.coefficient_std);
  c.noise_std = optional_field<double>(j, "noise_std", c.noise_std);
  c.shock_std = optional_field<double>(j, "shock_std", c.shock_std);
  c.missing_rate = optional_field<double>(j, "missing_rate", c.missing_rate);
  c.seed = optional_field<std::uint64_t>(j, "seed", c.seed);
  c.start_year = optional_field<int>(j, "start_year", c.start_year);
  c.validate();
  return c;
}

json to_json(const PlantedTruth& t, const PanelDataset& ds) {
  json signal = json::object();
  for (std::size_t q = 0; q < ds.n_quarters(); ++q) {
    std::vector<double> row(t.signal.begin() + static_cast<std::ptrdiff_t>(q * ds.n_companies()),
                            t.signal.begin() + static_cast<std::ptrdiff_t>((q + 1) * ds.n_companies()));
    signal[ds.quarter_ids[q]] = row;
  }
  json shocks = json::object();
  for (std::size_t q = 0; q < ds.n_quarters(); ++q) shocks[ds.quarter_ids[q]] = t.shocks[q];
  return json{{"coefficients", t.coefficients},
              {"company_ids", ds.company_ids},
              {"shocks", shocks},
              {"signal", signal}};
}

std::string table_csv(const json& report) {
  if (!report.contains("aggregate") || !report.contains("config"))
    throw Error(ErrorKind::Schema, "not a backtest report: missing 'aggregate' or 'config'");
  const auto& cfg = report.at("config");
  const auto ap_k = cfg.value("ap_k", std::size_t{100});
  const auto top_ns = cfg.value("top_ns", std::vector<std::size_t>{20, 50});
  std::ostringstream os;
  os << "model,AP@" << ap_k;
  for (auto n : top_ns) os << ",Top" << n;
  for (auto n : top_ns) os << ",Riskless" << n;
  os << '\n';
  for (const auto& [name, m] : report.at("aggregate").items()) {
    os << name << ',';
    put_double(os, m.at("ap_at_k").get<double>());
    for (auto n : top_ns) {
      os << ',';
      put_double(os, m.at("top" + std::to_string(n)).get<double>());
    }
    for (auto n : top_ns) {
      os << ',';
      put_double(os, m.at("riskless" + std::to_string(n)).get<double>());
    }
    os << '\n';
  }
  return os.str();
}

void write_curve_csv(const Curve& curve, std::ostream& out) {
  out << "n,mean_return\n";
  for (const auto& p : curve.points) {
    out << p.n << ',';
    put_double(out, p.mean_return);
    out << '\n';
  }
}

std::string curve_filename(ModelKind kind, const std::string& quarter_id) {
  return "curve_" + std::string(to_string(kind)) + "_" + quarter_id + ".csv";
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": JSON parse error at byte " + std::to_string(e.byte) + ": " +
                                      e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

}  // namespace rankreg
