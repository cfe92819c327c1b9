#include "ccdispatch/scenario_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ccdispatch/rng.hpp"

namespace ccd {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(ctx + ": bad numeric value \"" + s + "\"");
  }
}

}  // namespace

ScenarioStore ScenarioStore::ingest_csv(const std::string& path,
                                        const std::vector<std::string>& regions) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario CSV: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");

  std::vector<std::string> expected{"timestamp"};
  for (const std::string& r : regions) expected.push_back("err_" + r);
  for (const char* c : {"forecast_level", "ramp_rate", "temperature", "humidity"})
    expected.push_back(c);

  const std::vector<std::string> header = split_csv_line(line);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.size())
      throw std::runtime_error(path + ": schema error, missing column \"" +
                               expected[i] + "\"");
    if (header[i] != expected[i])
      throw std::runtime_error(path + ": schema error, expected column \"" +
                               expected[i] + "\" but found \"" + header[i] +
                               "\"");
  }
  if (header.size() != expected.size())
    throw std::runtime_error(path + ": schema error, unexpected extra columns");

  std::vector<ScenarioRecord> records;
  int lineno = 1;
  const int nr = int(regions.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    const std::string ctx = path + ":" + std::to_string(lineno);
    if (f.size() != expected.size())
      throw std::runtime_error(ctx + ": wrong field count");
    ScenarioRecord rec;
    rec.timestamp = parse_iso8601(f[0]);
    rec.error.resize(nr);
    for (int r = 0; r < nr; ++r) {
      rec.error(r) = parse_double(f[1 + r], ctx);
      if (rec.error(r) < -1.0 || rec.error(r) > 1.0)
        throw std::runtime_error(ctx + ": error outside [-1, 1]");
    }
    rec.env.forecast_level = parse_double(f[1 + nr], ctx);
    rec.env.ramp_rate = parse_double(f[2 + nr], ctx);
    rec.env.temperature = parse_double(f[3 + nr], ctx);
    rec.env.humidity = parse_double(f[4 + nr], ctx);
    if (rec.env.forecast_level < 0.0 || rec.env.forecast_level > 1.0)
      throw std::runtime_error(ctx + ": forecast_level outside [0, 1]");
    if (rec.env.ramp_rate < -1.0 || rec.env.ramp_rate > 1.0)
      throw std::runtime_error(ctx + ": ramp_rate outside [-1, 1]");
    if (!records.empty() && rec.timestamp <= records.back().timestamp)
      throw std::runtime_error(ctx + ": non-monotone timestamp");
    records.push_back(std::move(rec));
  }
  return from_records(std::move(records), regions);
}

ScenarioStore ScenarioStore::from_records(std::vector<ScenarioRecord> records,
                                          std::vector<std::string> regions) {
  std::sort(records.begin(), records.end(),
            [](const ScenarioRecord& a, const ScenarioRecord& b) {
              return a.timestamp < b.timestamp;
            });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].timestamp == records[i - 1].timestamp)
      throw std::runtime_error("duplicate timestamp " +
                               format_iso8601(records[i].timestamp));
  for (const ScenarioRecord& r : records)
    if (r.error.size() != int(regions.size()))
      throw std::runtime_error("record error dimension mismatch");
  ScenarioStore s;
  s.records_ = std::move(records);
  s.regions_ = std::move(regions);
  return s;
}

std::optional<int> ScenarioStore::index_at(Timestamp t) const {
  auto it = std::lower_bound(
      records_.begin(), records_.end(), t,
      [](const ScenarioRecord& r, Timestamp v) { return r.timestamp < v; });
  if (it == records_.end() || it->timestamp != t) return std::nullopt;
  return int(it - records_.begin());
}

TimeWindow ScenarioStore::span() const {
  if (records_.empty()) return {};
  return {records_.front().timestamp, records_.back().timestamp + 1};
}

std::vector<int> ScenarioStore::window_indices(const TimeWindow& w) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < records_.size(); ++i)
    if (w.contains(records_[i].timestamp)) out.push_back(int(i));
  return out;
}

namespace {

// Welford-style single-pass co-moment accumulation.
struct PearsonAcc {
  double n = 0, mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
  void add(double x, double y) {
    n += 1;
    const double dx = x - mx, dy = y - my;
    mx += dx / n;
    my += dy / n;
    sxx += dx * (x - mx);
    syy += dy * (y - my);
    sxy += dx * (y - my);
  }
  // Returns 0 when either variance vanishes; flags which one.
  double corr(bool* x_degenerate) const {
    *x_degenerate = sxx <= 0.0;
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
  }
};

}  // namespace

CorrelationProfile ScenarioStore::fit_correlations(
    const TimeWindow& window, const Eigen::VectorXd& region_weights) const {
  const std::vector<int> idx = window_indices(window);
  if (idx.size() < 30)
    throw std::invalid_argument("fit_correlations: window has " +
                                std::to_string(idx.size()) +
                                " records, need >= 30");
  const int nr = int(regions_.size());
  Eigen::VectorXd w = region_weights;
  if (w.size() == 0) w = Eigen::VectorXd::Ones(nr);
  if (w.size() != nr)
    throw std::invalid_argument("fit_correlations: weight dimension mismatch");
  w /= w.sum();

  CorrelationProfile p;
  p.window = window;
  for (int k = 0; k < 4; ++k)
    p.bounds[k] = {std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};

  std::array<PearsonAcc, 4> acc{};
  for (int i : idx) {
    const ScenarioRecord& r = records_[i];
    const double agg = w.dot(r.error);
    const double signal[4] = {agg, std::abs(agg), agg, agg};
    for (int k = 0; k < 4; ++k) {
      const double x = r.env[k];
      acc[k].add(x, signal[k]);
      p.bounds[k].first = std::min(p.bounds[k].first, x);
      p.bounds[k].second = std::max(p.bounds[k].second, x);
    }
  }
  static const char* names[4] = {"forecast_level", "ramp_rate", "temperature",
                                 "humidity"};
  for (int k = 0; k < 4; ++k) {
    bool degenerate = false;
    p.rho(k) = acc[k].corr(&degenerate);
    if (degenerate)
      p.warnings.push_back(std::string("zero-variance parameter ") + names[k] +
                           ": correlation set to 0");
  }
  return p;
}

Eigen::Vector4d CorrelationProfile::normalize(const EnvironmentVector& env) const {
  Eigen::Vector4d out;
  for (int k = 0; k < 4; ++k) {
    const auto [lo, hi] = bounds[k];
    double u = hi > lo ? (env[k] - lo) / (hi - lo) : 0.5;
    u = std::clamp(u, 0.0, 1.0);
    out(k) = k == 1 ? 2.0 * u - 1.0 : u;  // ramp rate maps to [-1, 1]
  }
  return out;
}

Eigen::Vector4d indicator_vector(const CorrelationProfile& profile,
                                 const EnvironmentVector& env) {
  return profile.rho.cwiseProduct(profile.normalize(env));
}

double environment_distance(const CorrelationProfile& profile,
                            const EnvironmentVector& a,
                            const EnvironmentVector& b) {
  return (indicator_vector(profile, a) - indicator_vector(profile, b)).norm();
}

NearestCursor::NearestCursor(const ScenarioStore& store,
                             const CorrelationProfile& profile,
                             const EnvironmentVector& target,
                             const TimeWindow& window) {
  const std::vector<int> idx = store.window_indices(window);
  const Eigen::Vector4d vt = indicator_vector(profile, target);
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(idx.size());
  for (int i : idx) {
    const Eigen::Vector4d vi = indicator_vector(profile, store.record(i).env);
    ranked.push_back({(vi - vt).norm(), i});
  }
  // Ties broken by earlier timestamp; store indices are timestamp-ordered.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.first != b.first) return a.first < b.first;
                     return a.second < b.second;
                   });
  order_.reserve(ranked.size());
  for (const auto& [d, i] : ranked) order_.push_back(i);
}

std::vector<int> NearestCursor::take(int k) {
  if (k < 0) throw std::invalid_argument("NearestCursor::take: k < 0");
  if (pos_ + std::size_t(k) > order_.size())
    throw StoreExhausted(std::size_t(k), order_.size() - pos_);
  std::vector<int> out(order_.begin() + pos_, order_.begin() + pos_ + k);
  pos_ += std::size_t(k);
  return out;
}

RandomCursor::RandomCursor(const ScenarioStore& store, const TimeWindow& window,
                           std::uint64_t seed) {
  order_ = store.window_indices(window);
  Rng rng(seed);
  // Fisher-Yates with our own bounded draw, for cross-platform determinism.
  for (std::size_t i = order_.size(); i > 1; --i)
    std::swap(order_[i - 1], order_[rng.below(i)]);
}

std::vector<int> RandomCursor::take(int k) {
  if (k < 0) throw std::invalid_argument("RandomCursor::take: k < 0");
  if (pos_ + std::size_t(k) > order_.size())
    throw StoreExhausted(std::size_t(k), order_.size() - pos_);
  std::vector<int> out(order_.begin() + pos_, order_.begin() + pos_ + k);
  pos_ += std::size_t(k);
  return out;
}

std::vector<int> rank_and_sample(const ScenarioStore& store,
                                 const CorrelationProfile& profile,
                                 const EnvironmentVector& target, int k) {
  NearestCursor c(store, profile, target, store.span());
  return c.take(k);
}

std::vector<int> random_sample(const ScenarioStore& store,
                               const TimeWindow& window, int k,
                               std::uint64_t seed) {
  RandomCursor c(store, window, seed);
  return c.take(k);
}

void write_scenario_csv(const std::string& path,
                        const std::vector<std::string>& regions,
                        const std::vector<ScenarioRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario CSV: " + path);
  out << "timestamp";
  for (const std::string& r : regions) out << ",err_" << r;
  out << ",forecast_level,ramp_rate,temperature,humidity\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  for (const ScenarioRecord& r : records) {
    out << format_iso8601(r.timestamp);
    for (int i = 0; i < r.error.size(); ++i) out << ',' << num(r.error(i));
    out << ',' << num(r.env.forecast_level) << ',' << num(r.env.ramp_rate)
        << ',' << num(r.env.temperature) << ',' << num(r.env.humidity) << '\n';
  }
}

}  // namespace ccd
