#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccdispatch/timeparse.hpp"

namespace ccd {

/// Ambient conditions attached to one forecasting instant. forecast_level
/// and ramp_rate arrive already normalized ([0,1] and [-1,1]); temperature
/// and humidity are raw and get min-max normalized by the fitted profile.
struct EnvironmentVector {
  double forecast_level = 0.0;
  double ramp_rate = 0.0;
  double temperature = 0.0;
  double humidity = 0.0;

  double operator[](int k) const {
    switch (k) {
      case 0: return forecast_level;
      case 1: return ramp_rate;
      case 2: return temperature;
      case 3: return humidity;
    }
    throw std::out_of_range("EnvironmentVector index");
  }
};

/// One historical forecast-error observation: per-region error in per-unit
/// of regional capacity, plus the environment it was observed in.
struct ScenarioRecord {
  Timestamp timestamp = 0;
  Eigen::VectorXd error;
  EnvironmentVector env;
};

/// Fitted environment-similarity model: Pearson coefficient per parameter
/// against the aggregate error signal, and min-max normalization bounds
/// over the lookback window.
struct CorrelationProfile {
  Eigen::Vector4d rho = Eigen::Vector4d::Zero();
  std::array<std::pair<double, double>, 4> bounds{};  // raw min/max
  TimeWindow window;
  std::vector<std::string> warnings;

  /// Normalized parameter vector: forecast_level, temperature, humidity to
  /// [0,1], ramp_rate to [-1,1]; out-of-window values are clamped.
  Eigen::Vector4d normalize(const EnvironmentVector& env) const;
};

/// Indicator vector v = [rho_1 p_1, ..., rho_4 p_4] of normalized parameters.
Eigen::Vector4d indicator_vector(const CorrelationProfile& profile,
                                 const EnvironmentVector& env);

/// Euclidean distance between indicator vectors.
double environment_distance(const CorrelationProfile& profile,
                            const EnvironmentVector& a,
                            const EnvironmentVector& b);

/// Thrown when a sampler cannot supply the requested number of scenarios;
/// the caller is expected to reset the risk and confidence level.
struct StoreExhausted : std::runtime_error {
  StoreExhausted(std::size_t requested, std::size_t available)
      : std::runtime_error("scenario store exhausted: requested " +
                           std::to_string(requested) + ", available " +
                           std::to_string(available) +
                           "; reset risk and confidence level"),
        requested(requested),
        available(available) {}
  std::size_t requested;
  std::size_t available;
};

/// Immutable, timestamp-sorted collection of scenario records.
class ScenarioStore {
 public:
  /// Header must be exactly
  ///   timestamp, err_<region>..., forecast_level, ramp_rate, temperature, humidity
  /// with one err_ column per requested region, in the given order.
  static ScenarioStore ingest_csv(const std::string& path,
                                  const std::vector<std::string>& regions);
  static ScenarioStore from_records(std::vector<ScenarioRecord> records,
                                    std::vector<std::string> regions);

  const std::vector<ScenarioRecord>& records() const { return records_; }
  const ScenarioRecord& record(int i) const { return records_.at(i); }
  const std::vector<std::string>& regions() const { return regions_; }
  std::size_t size() const { return records_.size(); }
  std::optional<int> index_at(Timestamp t) const;
  TimeWindow span() const;  // [first, last + 1)

  /// Pearson coefficients of the four parameters against the aggregate
  /// error over the window (>= 30 records required). The aggregate is the
  /// region_weights-weighted mean error; weights default to uniform. The
  /// ramp-rate coefficient is computed against the absolute aggregate, the
  /// others against the signed aggregate. Zero-variance parameters get
  /// rho = 0 and a warning on the profile.
  CorrelationProfile fit_correlations(
      const TimeWindow& window,
      const Eigen::VectorXd& region_weights = Eigen::VectorXd()) const;

  /// Record indices inside the window, in timestamp order.
  std::vector<int> window_indices(const TimeWindow& window) const;

 private:
  std::vector<ScenarioRecord> records_;
  std::vector<std::string> regions_;
};

/// Without-replacement source of record indices. take() never returns an
/// index twice across calls on the same cursor.
class ScenarioSampler {
 public:
  virtual ~ScenarioSampler() = default;
  virtual std::vector<int> take(int k) = 0;  // throws StoreExhausted
  virtual std::size_t remaining() const = 0;
};

/// Environment-nearest sampling: records ranked by environment_distance to
/// the target, ties broken by earlier timestamp.
class NearestCursor : public ScenarioSampler {
 public:
  NearestCursor(const ScenarioStore& store, const CorrelationProfile& profile,
                const EnvironmentVector& target, const TimeWindow& window);
  std::vector<int> take(int k) override;
  std::size_t remaining() const override { return order_.size() - pos_; }

 private:
  std::vector<int> order_;
  std::size_t pos_ = 0;
};

/// Seeded uniform sampling without replacement inside the window.
class RandomCursor : public ScenarioSampler {
 public:
  RandomCursor(const ScenarioStore& store, const TimeWindow& window,
               std::uint64_t seed);
  std::vector<int> take(int k) override;
  std::size_t remaining() const override { return order_.size() - pos_; }

 private:
  std::vector<int> order_;
  std::size_t pos_ = 0;
};

/// One-shot conveniences over the cursors.
std::vector<int> rank_and_sample(const ScenarioStore& store,
                                 const CorrelationProfile& profile,
                                 const EnvironmentVector& target, int k);
std::vector<int> random_sample(const ScenarioStore& store,
                               const TimeWindow& window, int k,
                               std::uint64_t seed);

/// Writes records in the scenario CSV schema (deterministic bytes).
void write_scenario_csv(const std::string& path,
                        const std::vector<std::string>& regions,
                        const std::vector<ScenarioRecord>& records);

}  // namespace ccd
