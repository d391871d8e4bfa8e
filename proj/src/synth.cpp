#include "rankreg/synth.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "rankreg/error.hpp"

namespace rankreg {

void SynthConfig::validate() const {
  if (n_companies == 0 || n_quarters == 0 || n_features == 0)
    throw Error(ErrorKind::InvalidArgument, "synthetic panel dimensions must be positive");
  if (!true_coefficients.empty() && true_coefficients.size() != n_features)
    throw Error(ErrorKind::InvalidArgument, "true_coefficients length must equal n_features");
  if (!(noise_std >= 0.0) || !(shock_std >= 0.0) || !(coefficient_std >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "standard deviations must be non-negative");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0))
    throw Error(ErrorKind::InvalidArgument, "missing_rate must lie in [0, 1)");
}

SynthResult generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t Q = cfg.n_quarters, C = cfg.n_companies, F = cfg.n_features;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SynthResult out;
  auto& truth = out.truth;
  truth.coefficients = cfg.true_coefficients;
  if (truth.coefficients.empty()) {
    truth.coefficients.resize(F);
    for (auto& c : truth.coefficients) c = cfg.coefficient_std * normal(rng);
  }

  auto& ds = out.dataset;
  ds.n_features = F;
  char buf[32];
  for (std::size_t c = 0; c < C; ++c) {
    std::snprintf(buf, sizeof(buf), "C%05zu", c);
    ds.company_ids.emplace_back(buf);
  }
  for (std::size_t q = 0; q < Q; ++q) {
    std::snprintf(buf, sizeof(buf), "%04d-Q%zu", cfg.start_year + static_cast<int>(q / 4), q % 4 + 1);
    ds.quarter_ids.emplace_back(buf);
  }
  ds.features.assign(Q * C * F, 0.0);
  ds.missing_mask.assign(Q * C * F, 0);
  ds.targets.assign(Q * C, 0.0);
  ds.target_missing.assign(Q * C, 0);
  truth.shocks.assign(Q, 0.0);
  truth.signal.assign(Q * C, 0.0);

  // Draw order is fixed: shock, then per company features, noise, mask flags.
  for (std::size_t q = 0; q < Q; ++q) {
    truth.shocks[q] = cfg.shock_std * normal(rng);
    for (std::size_t c = 0; c < C; ++c) {
      double signal = 0.0;
      for (std::size_t f = 0; f < F; ++f) {
        const double x = normal(rng);
        ds.features[ds.cell(q, c, f)] = x;
        signal += truth.coefficients[f] * x;
      }
      const double noise = cfg.noise_std * normal(rng);
      truth.signal[ds.sample(q, c)] = signal;
      ds.targets[ds.sample(q, c)] = signal + noise + truth.shocks[q];
      if (cfg.missing_rate > 0.0) {
        for (std::size_t f = 0; f < F; ++f) {
          if (unit(rng) < cfg.missing_rate) {
            ds.missing_mask[ds.cell(q, c, f)] = 1;
            ds.features[ds.cell(q, c, f)] = std::numeric_limits<double>::quiet_NaN();
          }
        }
      }
    }
  }
  ds.validate();
  return out;
}

}  // namespace rankreg
