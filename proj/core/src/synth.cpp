#include "ccdispatch/synth.hpp"

#include <algorithm>
#include <cmath>

namespace ccd {

double SynthLaw::mean(const EnvironmentVector& env) const {
  const double t_norm =
      (env.temperature - cfg_.temp_lo) / (cfg_.temp_hi - cfg_.temp_lo);
  const double h_norm = (env.humidity - cfg_.hum_lo) / (cfg_.hum_hi - cfg_.hum_lo);
  return cfg_.skew * (cfg_.loc_forecast * (2.0 * env.forecast_level - 1.0) +
                      cfg_.loc_temperature * (t_norm - 0.5) +
                      cfg_.loc_humidity * (h_norm - 0.5));
}

double SynthLaw::stddev(const EnvironmentVector& env) const {
  return cfg_.sigma_base *
         (1.0 + cfg_.sigma_ramp_gain * cfg_.skew * (env.ramp_rate + 1.0) / 2.0);
}

Eigen::VectorXd SynthLaw::sample(const EnvironmentVector& env, Rng& rng) const {
  const int nr = int(cfg_.regions.size());
  const double mu = mean(env);
  const double sd = stddev(env);
  const double rc = std::sqrt(std::clamp(cfg_.cross_corr, 0.0, 1.0));
  const double ri = std::sqrt(1.0 - rc * rc);
  const double common = rng.normal();
  Eigen::VectorXd out(nr);
  for (int r = 0; r < nr; ++r) {
    const double xi = rc * common + ri * rng.normal();
    out(r) = std::clamp(mu + sd * xi, -1.0, 1.0);
  }
  return out;
}

namespace {

// Random walk reflected into [lo, hi].
double reflect(double x, double lo, double hi) {
  while (x < lo || x > hi) {
    if (x < lo) x = 2.0 * lo - x;
    if (x > hi) x = 2.0 * hi - x;
  }
  return x;
}

}  // namespace

std::vector<ScenarioRecord> synth_records(const SynthConfig& config,
                                          std::uint64_t seed) {
  if (config.regions.size() != config.capacities.size())
    throw std::invalid_argument("synth: regions/capacities size mismatch");
  if (config.count < 1) throw std::invalid_argument("synth: count < 1");

  SynthLaw law(config);
  Rng rng(seed);

  EnvironmentVector env;
  env.forecast_level = rng.uniform();
  env.ramp_rate = rng.uniform(-1.0, 1.0);
  env.temperature = rng.uniform(config.temp_lo, config.temp_hi);
  env.humidity = rng.uniform(config.hum_lo, config.hum_hi);

  std::vector<ScenarioRecord> records;
  records.reserve(config.count);
  const double temp_mid = 0.5 * (config.temp_lo + config.temp_hi);
  const double temp_amp = 0.25 * (config.temp_hi - config.temp_lo);

  for (int i = 0; i < config.count; ++i) {
    ScenarioRecord rec;
    rec.timestamp = config.start + Timestamp(i) * config.step_seconds;
    rec.env = env;
    rec.error = law.sample(env, rng);
    records.push_back(std::move(rec));

    // Evolve the ambient state: bounded random walks, plus a daily
    // temperature cycle.
    env.forecast_level =
        reflect(env.forecast_level + 0.04 * rng.normal(), 0.0, 1.0);
    env.ramp_rate = reflect(env.ramp_rate + 0.12 * rng.normal(), -1.0, 1.0);
    const double day_phase =
        2.0 * M_PI * double((i + 1) % 288) / 288.0;  // 288 steps per day
    const double temp_target = temp_mid - temp_amp * std::cos(day_phase);
    env.temperature = reflect(
        env.temperature + 0.1 * (temp_target - env.temperature) +
            0.4 * rng.normal(),
        config.temp_lo, config.temp_hi);
    env.humidity =
        reflect(env.humidity + 1.5 * rng.normal(), config.hum_lo, config.hum_hi);
  }
  return records;
}

void synth_generate(const SynthConfig& config, std::uint64_t seed,
                    const std::string& csv_path) {
  write_scenario_csv(csv_path, config.regions, synth_records(config, seed));
}

}  // namespace ccd
