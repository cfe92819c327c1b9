#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "ccdispatch/rng.hpp"
#include "ccdispatch/scenario_store.hpp"
#include "ccdispatch/timeparse.hpp"

namespace ccd {

/// Configuration of the synthetic scenario generator. The per-region error
/// law conditions on the ambient parameters: location shifts with the
/// forecast level (and weakly with temperature/humidity), scale grows with
/// the ramp rate. skew = 0 makes errors independent of all covariates.
struct SynthConfig {
  std::vector<std::string> regions{"west", "south"};
  std::vector<double> capacities{1200.0, 1200.0};  // MW per region
  int count = 25920;                               // 3 months at 5 min
  double skew = 1.0;                               // conditional-shift strength
  Timestamp start = 1646092800;                    // 2022-03-01T00:00:00Z
  int step_seconds = 300;

  // Law shape.
  double loc_forecast = 0.15;      // mu += skew * loc * (2 f - 1)
  double loc_temperature = 0.02;   // mu += skew * loc * (T_norm - 0.5)
  double loc_humidity = -0.01;     // mu += skew * loc * (H_norm - 0.5)
  double sigma_base = 0.05;
  double sigma_ramp_gain = 1.5;    // sigma *= 1 + gain * skew * (r + 1) / 2
  double cross_corr = 0.3;         // equicorrelation across regions

  // Raw ambient ranges used by the environment process and normalization.
  double temp_lo = 10.0, temp_hi = 40.0;
  double hum_lo = 20.0, hum_hi = 100.0;
};

/// Ground-truth conditional law of the per-region error given the
/// environment; the same object drives generation and the test oracles.
class SynthLaw {
 public:
  explicit SynthLaw(const SynthConfig& config) : cfg_(config) {}

  double mean(const EnvironmentVector& env) const;
  double stddev(const EnvironmentVector& env) const;

  /// One draw of the per-region error vector, clamped into [-1, 1].
  Eigen::VectorXd sample(const EnvironmentVector& env, Rng& rng) const;

  const SynthConfig& config() const { return cfg_; }

 private:
  SynthConfig cfg_;
};

/// Generates `config.count` records on a 5-minute grid with smoothly
/// varying ambient parameters and errors drawn from SynthLaw. Deterministic
/// per seed.
std::vector<ScenarioRecord> synth_records(const SynthConfig& config,
                                          std::uint64_t seed);

/// Generates and writes the scenario CSV; byte-identical for a fixed
/// (config, seed).
void synth_generate(const SynthConfig& config, std::uint64_t seed,
                    const std::string& csv_path);

}  // namespace ccd
