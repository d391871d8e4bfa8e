#pragma once

#include <cstdint>
#include <vector>

#include "rankreg/panel.hpp"

namespace rankreg {

/// Synthetic panel: target(q, c) = <p*, x> + noise + shock(q).
struct SynthConfig {
  std::size_t n_companies = 200;
  std::size_t n_quarters = 28;
  std::size_t n_features = 25;
  std::vector<double> true_coefficients;  // empty: drawn from the seed with coefficient_std
  double coefficient_std = 0.02;
  double noise_std = 0.05;
  double shock_std = 0.10;
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  int start_year = 2011;

  void validate() const;
};

struct PlantedTruth {
  std::vector<double> coefficients;
  std::vector<double> shocks;  // one per quarter
  std::vector<double> signal;  // noiseless <p*, x>, indexed like PanelDataset::targets
};

struct SynthResult {
  PanelDataset dataset;
  PlantedTruth truth;
};

SynthResult generate(const SynthConfig& cfg);

}  // namespace rankreg
