#pragma once

// Synthetic-fleet AB experiment: generates devices with static model scores
// and dynamic degradation trajectories, splits a control group (static-tier
// low-end) against an experimental group (dynamic-tier low-end), applies a
// simulated power-reduction strategy to both, and reports how much more the
// dynamically selected group benefits.
//
// The degradation model is deliberately simple and fully parameterized:
// per-device load = base(model_score) + thermal drift over the simulated
// span + sinusoidal memory pressure + Gaussian noise, all seeded per device.
// The strategy is a pure transform on the load trajectory, so the null
// strategy reproduces the baseline bit for bit.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfsense/engine.hpp"
#include "perfsense/evaluate.hpp"
#include "perfsense/schema.hpp"

namespace perfsense {

struct DegradationParams {
  double thermal_drift = 0.0;  // load added linearly across the full span
  double memory_amp = 0.0;     // sinusoidal memory-pressure amplitude
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticDevice {
  std::string device_id;
  double model_score = 0.0;  // static model rating in (0,12]
  DegradationParams degradation;
};

struct Fleet {
  std::vector<SyntheticDevice> devices;
  std::uint64_t seed = 0;
};

/// Compact schema the harness simulates against: CPU, Memory, UI.
inline FeatureSchema harness_schema() {
  std::vector<IndicatorSpec> inds;
  auto add = [&](std::string name, std::string category, std::string unit,
                 Direction dir, double lo, double hi) {
    IndicatorSpec s;
    s.name = std::move(name);
    s.category = std::move(category);
    s.unit = std::move(unit);
    s.direction = dir;
    s.lo = lo;
    s.hi = hi;
    inds.push_back(std::move(s));
  };
  add("cpu_usage_ratio", "CPU", "%", Direction::minimal, 0, 100);
  add("cpu_speed", "CPU", "GHz", Direction::maximal, 0, 10);
  add("java_memory_usage_ratio", "Memory", "%", Direction::minimal, 0, 100);
  add("block_gc_count", "Memory", "", Direction::minimal, 0, 1000);
  add("frame_rate", "UI", "fps", Direction::maximal, 0, 240);
  add("UI_block_time", "UI", "ms", Direction::minimal, 0, 600000);
  return FeatureSchema::from_indicators(std::move(inds));
}

/// Bell-shaped model scores on (0,12] (truncated normal, mean 6.5, sd 2.2)
/// plus per-device degradation parameters. Same seed, same fleet.
inline Fleet generate_fleet(int n, std::uint64_t seed) {
  if (n < 10) throw std::invalid_argument("fleet needs at least 10 devices");
  Fleet fleet;
  fleet.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> score_dist(6.5, 2.2);
  std::uniform_real_distribution<double> drift(0.05, 0.40);
  std::uniform_real_distribution<double> amp(0.02, 0.12);
  std::uniform_real_distribution<double> noise(0.01, 0.04);

  fleet.devices.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    SyntheticDevice dev;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "dev-%04d", i);
    dev.device_id = buf;
    do {
      dev.model_score = score_dist(rng);
    } while (!(dev.model_score > 0.0 && dev.model_score <= 12.0));
    dev.degradation.thermal_drift = drift(rng);
    dev.degradation.memory_amp = amp(rng);
    dev.degradation.noise_sigma = noise(rng);
    dev.degradation.seed = rng();
    fleet.devices.push_back(std::move(dev));
  }
  return fleet;
}

/// Power-reduction effect parameters. All zeros is the null strategy.
struct StrategyParams {
  double cpu_relief = 0.0;  // share of load above the floor removed
  double mem_relief = 0.0;
  double relief_floor = 0.55;

  static StrategyParams null_strategy() { return {}; }
  static StrategyParams default_strategy() { return {0.35, 0.25, 0.55}; }
};

namespace detail {

struct LoadSample {
  double cpu = 0.0;
  double mem = 0.0;
};

/// Raw (pre-strategy) load trajectory; the noise stream depends only on the
/// device seed, so strategies can be compared on identical trajectories.
inline std::vector<LoadSample> load_trajectory(const SyntheticDevice& dev,
                                               int total_samples) {
  std::mt19937_64 rng(dev.degradation.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double base = 0.22 + 0.55 * (1.0 - dev.model_score / 12.0);
  std::vector<LoadSample> out(static_cast<size_t>(total_samples));
  for (int t = 0; t < total_samples; ++t) {
    double frac = static_cast<double>(t) / static_cast<double>(total_samples);
    double wave = std::sin(2.0 * M_PI * frac * 6.0);
    double cpu = base + dev.degradation.thermal_drift * frac +
                 0.05 * wave + dev.degradation.noise_sigma * noise(rng);
    double mem = 0.9 * base + 0.6 * dev.degradation.thermal_drift * frac +
                 dev.degradation.memory_amp * std::sin(2.0 * M_PI * frac * 4.0 + 1.0) +
                 dev.degradation.noise_sigma * noise(rng);
    out[static_cast<size_t>(t)] = {std::clamp(cpu, 0.02, 0.99),
                                   std::clamp(mem, 0.02, 0.99)};
  }
  return out;
}

inline LoadSample apply_strategy(LoadSample s, const StrategyParams& strategy) {
  s.cpu -= strategy.cpu_relief * std::max(0.0, s.cpu - strategy.relief_floor);
  s.mem -= strategy.mem_relief * std::max(0.0, s.mem - strategy.relief_floor);
  return s;
}

inline std::vector<double> indicator_row(const SyntheticDevice& dev,
                                         LoadSample s) {
  return {
      s.cpu * 100.0,                                         // cpu_usage_ratio
      1.0 + 2.4 * (dev.model_score / 12.0) * (1.0 - 0.3 * s.cpu),  // cpu_speed
      s.mem * 100.0,                             // java_memory_usage_ratio
      60.0 * std::max(0.0, s.mem - 0.5),         // block_gc_count
      118.0 * (1.0 - 0.55 * s.cpu),              // frame_rate
      900.0 * std::max(0.0, s.cpu - 0.4),        // UI_block_time
  };
}

}  // namespace detail

/// Telemetry stream for one device, consistent with harness_schema().
inline std::vector<FeatureRecord> device_telemetry(
    const SyntheticDevice& dev, int days, int samples_per_day = 4,
    const StrategyParams& strategy = StrategyParams::null_strategy()) {
  const FeatureSchema schema = harness_schema();
  const int total = days * samples_per_day;
  auto loads = detail::load_trajectory(dev, total);
  std::vector<FeatureRecord> out;
  out.reserve(static_cast<size_t>(total));
  const std::int64_t step = 86400000 / samples_per_day;
  for (int t = 0; t < total; ++t) {
    FeatureRecord rec;
    rec.device_id = dev.device_id;
    rec.model_id = "model-" + std::to_string(static_cast<int>(dev.model_score));
    rec.ts_ms = static_cast<std::int64_t>(t) * step;
    auto row = detail::indicator_row(
        dev, detail::apply_strategy(loads[static_cast<size_t>(t)], strategy));
    for (size_t j = 0; j < schema.size(); ++j)
      rec.values[schema.at(j).name] = row[j];
    out.push_back(std::move(rec));
  }
  return out;
}

struct GroupMetrics {
  double playback_stability = 0.0;    // ANR-style overload penetration
  double playback_smoothness_ms = 0.0;
  double first_swipe_ms = 0.0;
  double resource_occupancy = 0.0;    // fraction of capacity in use
};

struct MetricDelta {
  double absolute = 0.0;  // experimental improvement minus control improvement
  double relative = 0.0;  // same, with each improvement relative to its baseline
};

struct GroupOutcome {
  GroupMetrics with_strategy;
  GroupMetrics baseline;
};

struct ExperimentReport {
  size_t group_size = 0;
  std::vector<std::string> control_ids;       // static low-end members
  std::vector<std::string> experimental_ids;  // dynamic low-end members
  GroupOutcome control;
  GroupOutcome experimental;
  MetricDelta stability;
  MetricDelta smoothness;
  MetricDelta first_swipe;
  MetricDelta occupancy;
};

namespace detail {

inline GroupMetrics device_metrics(const SyntheticDevice& dev,
                                   const std::vector<LoadSample>& loads,
                                   size_t from, const StrategyParams& strategy) {
  (void)dev;
  double occ = 0.0, anr = 0.0, block = 0.0, swipe = 0.0;
  size_t count = 0;
  for (size_t t = from; t < loads.size(); ++t) {
    LoadSample s = apply_strategy(loads[t], strategy);
    occ += (s.cpu + s.mem) / 2.0;
    anr += 100.0 * std::max(0.0, s.cpu - 0.75) + 50.0 * std::max(0.0, s.mem - 0.8);
    block += 900.0 * std::max(0.0, s.cpu - 0.4);
    swipe += 250.0 + 900.0 * s.cpu;
    ++count;
  }
  GroupMetrics m;
  const double n = static_cast<double>(count);
  m.resource_occupancy = occ / n;
  m.playback_stability = anr / n;
  m.playback_smoothness_ms = 2.0 + (block / n) / 25.0;
  m.first_swipe_ms = swipe / n;
  return m;
}

inline GroupMetrics mean_metrics(const std::vector<GroupMetrics>& ms) {
  GroupMetrics out;
  for (const auto& m : ms) {
    out.playback_stability += m.playback_stability;
    out.playback_smoothness_ms += m.playback_smoothness_ms;
    out.first_swipe_ms += m.first_swipe_ms;
    out.resource_occupancy += m.resource_occupancy;
  }
  const double n = static_cast<double>(ms.size());
  out.playback_stability /= n;
  out.playback_smoothness_ms /= n;
  out.first_swipe_ms /= n;
  out.resource_occupancy /= n;
  return out;
}

inline MetricDelta delta_of(double ctl_with, double ctl_base, double exp_with,
                            double exp_base) {
  MetricDelta d;
  double imp_ctl = ctl_with - ctl_base;
  double imp_exp = exp_with - exp_base;
  d.absolute = imp_exp - imp_ctl;
  double rel_ctl = ctl_base != 0.0 ? imp_ctl / ctl_base : 0.0;
  double rel_exp = exp_base != 0.0 ? imp_exp / exp_base : 0.0;
  d.relative = rel_exp - rel_ctl;
  return d;
}

}  // namespace detail

/// Runs the AB experiment. Assignment happens after a 5-day warmup: the
/// control group is the devices whose static model score falls in
/// (0, static_cut]; the experimental group is the devices whose dynamic
/// score at assignment time maps to the low tier. Both groups are truncated
/// to equal size (fleet order). Both groups receive the strategy; the
/// report compares each group's improvement over its own unstrategized
/// baseline, so a zero-effect strategy yields zero deltas.
inline ExperimentReport run_experiment(const Fleet& fleet,
                                       const TriggerConfig& cfg,
                                       double static_cut,
                                       const StrategyParams& strategy,
                                       int duration_days,
                                       int samples_per_day = 4) {
  if (duration_days < 1) throw std::invalid_argument("duration_days must be >= 1");
  cfg.check();
  const FeatureSchema schema = harness_schema();

  const int warmup_days = 5;
  const int total = (warmup_days + duration_days) * samples_per_day;
  const size_t assign_at = static_cast<size_t>(warmup_days * samples_per_day) - 1;

  std::vector<std::vector<detail::LoadSample>> loads;
  loads.reserve(fleet.devices.size());
  for (const auto& dev : fleet.devices)
    loads.push_back(detail::load_trajectory(dev, total));

  // Dynamic scores at assignment time: the whole fleet is the population.
  DecisionMatrix snapshot;
  for (const auto& ind : schema.indicators()) snapshot.columns.push_back(ind.name);
  for (size_t i = 0; i < fleet.devices.size(); ++i)
    snapshot.add_row(fleet.devices[i].device_id,
                     detail::indicator_row(fleet.devices[i], loads[i][assign_at]));
  ScoreVector scores = evaluate_multilevel(snapshot, schema);

  std::vector<size_t> control_idx, experimental_idx;
  for (size_t i = 0; i < fleet.devices.size(); ++i) {
    if (fleet.devices[i].model_score > 0.0 &&
        fleet.devices[i].model_score <= static_cut)
      control_idx.push_back(i);
    if (map_tier(scores.scaled[i], cfg.tiers) == Tier::low)
      experimental_idx.push_back(i);
  }
  size_t k = std::min(control_idx.size(), experimental_idx.size());
  if (k == 0) throw std::invalid_argument("empty group");
  control_idx.resize(k);
  experimental_idx.resize(k);

  auto group_outcome = [&](const std::vector<size_t>& idx) {
    std::vector<GroupMetrics> with, base;
    for (size_t i : idx) {
      with.push_back(detail::device_metrics(fleet.devices[i], loads[i],
                                            assign_at + 1, strategy));
      base.push_back(detail::device_metrics(fleet.devices[i], loads[i],
                                            assign_at + 1,
                                            StrategyParams::null_strategy()));
    }
    return GroupOutcome{detail::mean_metrics(with), detail::mean_metrics(base)};
  };

  ExperimentReport report;
  report.group_size = k;
  for (size_t i : control_idx)
    report.control_ids.push_back(fleet.devices[i].device_id);
  for (size_t i : experimental_idx)
    report.experimental_ids.push_back(fleet.devices[i].device_id);
  report.control = group_outcome(control_idx);
  report.experimental = group_outcome(experimental_idx);

  report.stability = detail::delta_of(
      report.control.with_strategy.playback_stability,
      report.control.baseline.playback_stability,
      report.experimental.with_strategy.playback_stability,
      report.experimental.baseline.playback_stability);
  report.smoothness = detail::delta_of(
      report.control.with_strategy.playback_smoothness_ms,
      report.control.baseline.playback_smoothness_ms,
      report.experimental.with_strategy.playback_smoothness_ms,
      report.experimental.baseline.playback_smoothness_ms);
  report.first_swipe = detail::delta_of(
      report.control.with_strategy.first_swipe_ms,
      report.control.baseline.first_swipe_ms,
      report.experimental.with_strategy.first_swipe_ms,
      report.experimental.baseline.first_swipe_ms);
  report.occupancy = detail::delta_of(
      report.control.with_strategy.resource_occupancy,
      report.control.baseline.resource_occupancy,
      report.experimental.with_strategy.resource_occupancy,
      report.experimental.baseline.resource_occupancy);
  return report;
}

/// CSV rendering of the report: one row per (group, metric) plus the deltas.
inline std::string report_to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << "group,metric,with_strategy,baseline\n";
  auto rows = [&](const char* group, const GroupOutcome& o) {
    out << group << ",playback_stability," << o.with_strategy.playback_stability
        << ',' << o.baseline.playback_stability << '\n';
    out << group << ",playback_smoothness_ms,"
        << o.with_strategy.playback_smoothness_ms << ','
        << o.baseline.playback_smoothness_ms << '\n';
    out << group << ",first_swipe_ms," << o.with_strategy.first_swipe_ms << ','
        << o.baseline.first_swipe_ms << '\n';
    out << group << ",resource_occupancy," << o.with_strategy.resource_occupancy
        << ',' << o.baseline.resource_occupancy << '\n';
  };
  rows("control", r.control);
  rows("experimental", r.experimental);
  out << "delta,metric,absolute,relative\n";
  out << "delta,playback_stability," << r.stability.absolute << ','
      << r.stability.relative << '\n';
  out << "delta,playback_smoothness_ms," << r.smoothness.absolute << ','
      << r.smoothness.relative << '\n';
  out << "delta,first_swipe_ms," << r.first_swipe.absolute << ','
      << r.first_swipe.relative << '\n';
  out << "delta,resource_occupancy," << r.occupancy.absolute << ','
      << r.occupancy.relative << '\n';
  return out.str();
}

}  // namespace perfsense
