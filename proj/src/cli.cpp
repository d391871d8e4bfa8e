#include "rankreg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rankreg/backtest.hpp"
#include "rankreg/error.hpp"
#include "rankreg/serialize.hpp"
#include "rankreg/synth.hpp"

namespace rankreg {

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config;
  std::string data;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::size_t> window_length;
  std::optional<double> lambda;
  std::optional<std::size_t> n_train;
  std::string input;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "JSON configuration file");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--seed", a.seed, "override the configured seed");
}

void add_experiment(CLI::App* cmd, CommonArgs& a) {
  add_common(cmd, a);
  cmd->add_option("--data", a.data, "panel CSV")->required();
  cmd->add_option("--jobs", a.jobs, "worker threads for window evaluation");
  cmd->add_option("--window-length", a.window_length, "training quarters per window");
  cmd->add_option("--lambda", a.lambda, "L2 weight for the regularized models");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
}

ExperimentConfig load_experiment(const CommonArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.jobs) cfg.jobs = *a.jobs;
  if (a.window_length) cfg.window_length = *a.window_length;
  if (a.lambda) cfg.l2_weight = *a.lambda;
  cfg.validate();
  return cfg;
}

int cmd_synth(const CommonArgs& a, std::ostream& out) {
  SynthConfig cfg = a.config.empty() ? SynthConfig{} : synth_config_from_json(read_json_file(a.config));
  if (a.seed) cfg.seed = *a.seed;
  const auto result = generate(cfg);
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_panel_csv(result.dataset, dir / "panel.csv");
  write_text_file(dir / "truth.json", to_json(result.truth, result.dataset).dump(2) + "\n");
  std::size_t missing = 0;
  for (auto m : result.dataset.missing_mask) missing += m;
  out << "quarters=" << result.dataset.n_quarters() << " companies=" << result.dataset.n_companies()
      << " features=" << result.dataset.n_features << " missing_cells=" << missing << '\n';
  return 0;
}

int cmd_backtest(const CommonArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = load_experiment(a);
  const auto ds = load_panel_csv(a.data);
  const auto report = run_backtest(ds, cfg);
  const fs::path dir(a.out);
  ensure_dir(dir);
  const json j = to_json(report);
  write_text_file(dir / "backtest_report.json", j.dump(2) + "\n");
  const auto table = table_csv(j);
  write_text_file(dir / "backtest_table.csv", table);
  out << table;
  if (report.any_diverged()) {
    for (const auto& w : report.windows)
      for (const auto& [kind, o] : w.per_model)
        if (o.error) err << "window " << w.index << " " << to_string(kind) << ": " << *o.error << '\n';
    return 1;
  }
  return 0;
}

int cmd_holdout(const CommonArgs& a, std::ostream& out, std::ostream& err) {
  const auto cfg = load_experiment(a);
  const auto ds = load_panel_csv(a.data);
  const std::size_t n_train = a.n_train.value_or(ds.n_quarters() >= 2 ? ds.n_quarters() - 2 : 0);
  const auto reports = holdout_experiment(ds, n_train, cfg);
  const fs::path dir(a.out);
  ensure_dir(dir);
  write_text_file(dir / "holdout_report.json", holdout_to_json(reports, cfg).dump(2) + "\n");
  bool diverged = false;
  for (const auto& w : reports) {
    for (const auto& [kind, o] : w.per_model) {
      if (o.error) {
        diverged = true;
        err << w.test_quarter_id << " " << to_string(kind) << ": " << *o.error << '\n';
        continue;
      }
      std::ostringstream csv;
      write_curve_csv(o.curve, csv);
      write_text_file(dir / curve_filename(kind, w.test_quarter_id), csv.str());
    }
    out << w.test_quarter_id << " universe=" << w.universe_size << '\n';
  }
  return diverged ? 1 : 0;
}

int cmd_report(const CommonArgs& a, std::ostream& out) {
  const auto table = table_csv(read_json_file(a.input));
  if (a.out.empty() || a.out == "-") {
    out << table;
  } else {
    write_text_file(a.out, table);
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Batch-centralized rank regression for cross-sectional stock ranking", "rankreg"};
  app.require_subcommand(1);
  CommonArgs a;

  auto* synth = app.add_subcommand("synth", "generate a synthetic panel CSV and planted-truth sidecar");
  add_common(synth, a);

  auto* backtest = app.add_subcommand("backtest", "rolling-window backtest of all configured models");
  add_experiment(backtest, a);

  auto* holdout = app.add_subcommand("holdout", "train once, evaluate every remaining quarter, emit curves");
  add_experiment(holdout, a);
  holdout->add_option("--n-train", a.n_train, "training quarters (default: all but the last two)");

  auto* report = app.add_subcommand("report", "print the summary table of a backtest report JSON");
  report->add_option("--input", a.input, "backtest_report.json")->required();
  report->add_option("--out", a.out, "output CSV path ('-' for stdout)");
  a.out = ".";

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "rankreg: " << e.what() << '\n';
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(a, out);
    if (backtest->parsed()) return cmd_backtest(a, out, err);
    if (holdout->parsed()) return cmd_holdout(a, out, err);
    if (report->parsed()) {
      if (report->count("--out") == 0) a.out = "-";
      return cmd_report(a, out);
    }
  } catch (const Error& e) {
    err << "rankreg: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "rankreg: error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace rankreg
