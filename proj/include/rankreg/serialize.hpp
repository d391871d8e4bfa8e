#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "rankreg/backtest.hpp"
#include "rankreg/synth.hpp"

namespace rankreg {

using json = nlohmann::ordered_json;

json to_json(const Normalizer& n);
Normalizer normalizer_from_json(const json& j);

json to_json(const TrainTrace& t);
json model_to_json(ModelKind kind, const LinearModel& model, const TrainTrace* trace);

json to_json(const MetricReport& m);
json to_json(const WindowReport& w);
json to_json(const BacktestReport& r);
json holdout_to_json(const std::vector<WindowReport>& reports, const ExperimentConfig& cfg);

json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const json& j);

json to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const json& j);
json to_json(const PlantedTruth& t, const PanelDataset& ds);

/// Tables layout: one row per model kind, columns AP@k, Top<n>..., Riskless<n>...
std::string table_csv(const json& backtest_report);

void write_curve_csv(const Curve& curve, std::ostream& out);
std::string curve_filename(ModelKind kind, const std::string& quarter_id);

/// Parse errors are rethrown as Error(Parse) naming the byte offset.
json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rankreg
