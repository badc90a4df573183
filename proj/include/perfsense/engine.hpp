#pragma once

// Event-driven orchestration: events route feature collection and scoring,
// per-device state tracks the three sensitivities (real-time score,
// short-term HMA, long-term forecast), scores map to tiers, and results
// persist to an append-only record log.
//
// Threading contract: events for one device are processed strictly serially
// in arrival order; distinct devices may be handled concurrently; the score
// log has a single serialized writer. The scoring math itself is pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "perfsense/evaluate.hpp"
#include "perfsense/forecast.hpp"
#include "perfsense/schema.hpp"
#include "perfsense/smooth.hpp"

#include "json.hpp"

namespace perfsense {

// Tiers -----------------------------------------------------------------------

enum class Tier { low, mid, high };

inline std::string_view tier_name(Tier t) {
  switch (t) {
    case Tier::low: return "low";
    case Tier::mid: return "mid";
    case Tier::high: return "high";
  }
  return "low";
}

/// Left-open / right-closed cut points: low (0, low_upper], mid
/// (low_upper, mid_upper], high (mid_upper, 100).
struct TierThresholds {
  double low_upper = 28.67;
  double mid_upper = 56.82;

  void check() const {
    if (!(0.0 < low_upper && low_upper < mid_upper && mid_upper < 100.0))
      throw std::invalid_argument(
          "tier thresholds must satisfy 0 < low < mid < 100");
  }
};

/// Interval membership; scores at or below 0 fall into low, at or above 100
/// into high.
inline Tier map_tier(double score, const TierThresholds& t) {
  t.check();
  if (score <= t.low_upper) return Tier::low;
  if (score <= t.mid_upper) return Tier::mid;
  return Tier::high;
}

/// Cut points at the empirical quantiles of the sample so that the three
/// tiers reproduce the requested proportions (within +-1/n on samples with
/// distinct values).
inline TierThresholds derive_thresholds(std::vector<double> scores,
                                        std::array<double, 3> proportions) {
  const size_t n = scores.size();
  if (n < 100) throw std::invalid_argument("need a sample of at least 100 scores");
  double sum = proportions[0] + proportions[1] + proportions[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("proportions must sum to 1");
  for (double p : proportions)
    if (p <= 0.0) throw std::invalid_argument("proportions must be positive");

  std::sort(scores.begin(), scores.end());
  if (scores.front() == scores.back())
    throw std::invalid_argument("degenerate sample: all scores equal");

  auto index_for = [&](double cum) {
    long k = std::lround(cum * static_cast<double>(n));
    return static_cast<size_t>(std::clamp<long>(k, 1, static_cast<long>(n) - 1));
  };
  size_t k1 = index_for(proportions[0]);
  size_t k2 = index_for(proportions[0] + proportions[1]);
  if (k2 <= k1) k2 = k1 + 1;

  TierThresholds t;
  t.low_upper = scores[k1 - 1];
  t.mid_upper = scores[k2 - 1];
  t.check();
  return t;
}

// Events and configuration ------------------------------------------------------

struct Event {
  std::string name;  // globally unique, e.g. "startup", "playback"
  std::string device_id;
  std::int64_t ts_ms = 0;
  std::map<std::string, double> params;
};

inline Event parse_event_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  Event ev;
  ev.name = j.at("name").get<std::string>();
  ev.device_id = j.at("device_id").get<std::string>();
  ev.ts_ms = j.at("ts_ms").get<std::int64_t>();
  if (j.contains("params"))
    for (auto& [k, v] : j.at("params").items()) ev.params[k] = v.get<double>();
  return ev;
}

inline std::string event_to_line(const Event& ev) {
  nlohmann::ordered_json j;
  j["name"] = ev.name;
  j["device_id"] = ev.device_id;
  j["ts_ms"] = ev.ts_ms;
  j["params"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ev.params) j["params"][k] = v;
  return j.dump();
}

/// A collector owns one schema category and fires on its configured events,
/// merging matching event parameters into the device's latest features.
struct CollectorPolicy {
  std::string collector;  // category name
  std::set<std::string> events;
};

struct TriggerConfig {
  std::set<std::string> scoring_events;
  std::vector<CollectorPolicy> collectors;
  SmoothParams smoothing;
  int forecast_horizon = 5;
  int forecast_min_points = 50;
  TierThresholds tiers;
  std::set<std::string> registered_events{"startup", "playback"};

  void check() const {
    if (scoring_events.empty())
      throw std::invalid_argument("scoring_events must not be empty");
    if (smoothing.lookback < 1)
      throw std::invalid_argument("lookback must be >= 1");
    if (forecast_horizon < 1)
      throw std::invalid_argument("forecast_horizon must be >= 1");
    tiers.check();
  }
};

/// Makes a custom event name available for routing. Idempotent; empty names
/// are rejected.
inline TriggerConfig register_event(TriggerConfig cfg, const std::string& name) {
  if (name.empty()) throw std::invalid_argument("event name must not be empty");
  cfg.registered_events.insert(name);
  return cfg;
}

/// Parses the trigger section in the shared config grammar:
///
///   trigger {
///     scoring_events = score_tick, playback
///     lookback = 9
///     forecast_horizon = 5
///     forecast_min_points = 50
///     tier_thresholds = [28.67, 56.82]
///     collector CPU { events = score_tick, startup }
///   }
inline TriggerConfig parse_trigger_config(std::string_view text) {
  cfg::Section root = cfg::parse_document(text);
  const cfg::Section* sec = root.find("trigger");
  if (!sec) throw cfg::ConfigError("missing top-level 'trigger' section", 1);

  TriggerConfig out;
  for (const auto& name : cfg::to_list(sec->require("scoring_events")))
    out.scoring_events.insert(name);
  if (auto v = sec->get("lookback"))
    out.smoothing.lookback = static_cast<int>(cfg::to_real(*v));
  if (auto v = sec->get("forecast_horizon"))
    out.forecast_horizon = static_cast<int>(cfg::to_real(*v));
  if (auto v = sec->get("forecast_min_points"))
    out.forecast_min_points = static_cast<int>(cfg::to_real(*v));
  if (auto v = sec->get("tier_thresholds")) {
    auto [lo, hi] = cfg::to_interval(*v);
    out.tiers.low_upper = lo;
    out.tiers.mid_upper = hi;
  }
  for (const cfg::Section* col : sec->all("collector")) {
    CollectorPolicy policy;
    policy.collector = col->arg;
    if (policy.collector.empty())
      throw cfg::ConfigError("collector section needs a category argument",
                             col->line);
    for (const auto& name : cfg::to_list(col->require("events")))
      policy.events.insert(name);
    out.collectors.push_back(std::move(policy));
  }
  for (const auto& ev : out.scoring_events)
    out.registered_events.insert(ev);
  for (const auto& c : out.collectors)
    out.registered_events.insert(c.events.begin(), c.events.end());
  out.check();
  return out;
}

inline TriggerConfig load_trigger_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trigger_config(buf.str());
}

// Device state and persisted records -------------------------------------------

struct TimedValue {
  double value = 0.0;
  std::int64_t ts_ms = 0;
};

struct DeviceState {
  std::string device_id;
  std::map<std::string, TimedValue> latest_features;
  ScoreSeries score_series;
  double short_term = 0.0;
  std::optional<Forecast> forecast;
  Tier tier = Tier::low;
};

struct ScoreRecord {
  std::string device_id;
  std::int64_t ts_ms = 0;
  std::optional<double> realtime;
  std::optional<double> short_term;
  std::optional<double> forecast_next;
  std::optional<Tier> tier;
  std::string status;  // "ok" | "insufficient-features"
};

inline std::string record_to_line(const ScoreRecord& r) {
  nlohmann::ordered_json j;
  j["device_id"] = r.device_id;
  j["ts_ms"] = r.ts_ms;
  j["realtime"] = r.realtime ? nlohmann::json(*r.realtime) : nlohmann::json();
  j["short_term"] =
      r.short_term ? nlohmann::json(*r.short_term) : nlohmann::json();
  j["forecast_next"] =
      r.forecast_next ? nlohmann::json(*r.forecast_next) : nlohmann::json();
  j["tier"] = r.tier ? nlohmann::json(std::string(tier_name(*r.tier)))
                     : nlohmann::json();
  j["status"] = r.status;
  return j.dump();
}

inline ScoreRecord score_record_from_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  ScoreRecord r;
  r.device_id = j.at("device_id").get<std::string>();
  r.ts_ms = j.at("ts_ms").get<std::int64_t>();
  if (!j.at("realtime").is_null()) r.realtime = j["realtime"].get<double>();
  if (!j.at("short_term").is_null()) r.short_term = j["short_term"].get<double>();
  if (!j.at("forecast_next").is_null())
    r.forecast_next = j["forecast_next"].get<double>();
  if (!j.at("tier").is_null()) {
    std::string t = j["tier"].get<std::string>();
    r.tier = t == "low" ? Tier::low : t == "mid" ? Tier::mid : Tier::high;
  }
  r.status = j.at("status").get<std::string>();
  return r;
}

// Dispatch ----------------------------------------------------------------------

struct DispatchResult {
  DeviceState state;
  std::vector<ScoreRecord> records;
};

/// Routes one event: collectors whose policy includes the event merge the
/// event's matching parameters into latest_features; a scoring event then
/// snapshots all schema indicators, ranks the snapshot against the reference
/// population, appends the scaled score, refreshes the HMA short-term value
/// and tier, refreshes the forecast once enough points exist, and emits one
/// persisted record. A scoring event with incomplete features emits an
/// "insufficient-features" record and no score.
inline DispatchResult dispatch(const DeviceState& state, const Event& ev,
                               const TriggerConfig& cfg,
                               const FeatureSchema& schema,
                               const DecisionMatrix& reference) {
  if (ev.name.empty()) throw std::invalid_argument("event name must not be empty");
  DispatchResult result;
  result.state = state;
  DeviceState& st = result.state;
  if (st.device_id.empty()) st.device_id = ev.device_id;

  // 1. feature collection
  for (const auto& policy : cfg.collectors) {
    if (!policy.events.count(ev.name)) continue;
    for (const auto& [key, value] : ev.params) {
      int j = schema.index_of(key);
      if (j < 0 || schema.at(static_cast<size_t>(j)).category != policy.collector)
        continue;
      const IndicatorSpec& ind = schema.at(static_cast<size_t>(j));
      if (!(value >= ind.lo && value <= ind.hi)) continue;  // outlier: discard
      TimedValue& tv = st.latest_features[key];
      if (ev.ts_ms >= tv.ts_ms) tv = TimedValue{value, ev.ts_ms};
    }
  }

  // 2. scoring
  if (!cfg.scoring_events.count(ev.name)) return result;

  ScoreRecord record;
  record.device_id = st.device_id;
  record.ts_ms = ev.ts_ms;

  std::vector<double> snapshot(schema.size());
  bool complete = true;
  for (size_t j = 0; j < schema.size(); ++j) {
    auto it = st.latest_features.find(schema.at(j).name);
    if (it == st.latest_features.end()) {
      complete = false;
      break;
    }
    snapshot[j] = it->second.value;
  }

  if (!complete) {
    record.status = "insufficient-features";
    result.records.push_back(std::move(record));
    return result;
  }

  DecisionMatrix pop = reference;
  pop.add_row(st.device_id, snapshot);
  ScoreVector scores = evaluate_multilevel(pop, schema);
  double realtime = scores.scaled.back();

  if (!st.score_series.points.empty() &&
      ev.ts_ms <= st.score_series.points.back().ts_ms)
    throw std::invalid_argument("events for a device must arrive in ts order");
  st.score_series.device_id = st.device_id;
  st.score_series.points.push_back({ev.ts_ms, realtime});

  st.short_term = hma(st.score_series, cfg.smoothing).points.back().score;
  st.tier = map_tier(realtime, cfg.tiers);

  if (static_cast<int>(st.score_series.points.size()) >=
      cfg.forecast_min_points) {
    try {
      auto values = st.score_series.values();
      ArimaModel model = auto_order(values);
      st.forecast = forecast(model, values, cfg.forecast_horizon);
    } catch (const std::exception&) {
      // keep the previous forecast when a refresh fails to converge
    }
  }

  record.status = "ok";
  record.realtime = realtime;
  record.short_term = st.short_term;
  record.tier = st.tier;
  if (st.forecast) record.forecast_next = st.forecast->point.front();
  result.records.push_back(std::move(record));
  return result;
}

/// Serial per-device replay wrapper around dispatch.
class Engine {
public:
  Engine(FeatureSchema schema, TriggerConfig cfg, DecisionMatrix reference)
      : schema_(std::move(schema)),
        cfg_(std::move(cfg)),
        reference_(std::move(reference)) {
    cfg_.check();
    if (reference_.rows() < 2)
      throw std::invalid_argument("reference matrix needs at least 2 rows");
    if (reference_.columns != [&] {
          std::vector<std::string> names;
          for (const auto& ind : schema_.indicators()) names.push_back(ind.name);
          return names;
        }())
      throw std::invalid_argument("reference matrix columns must match schema");
  }

  std::vector<ScoreRecord> handle(const Event& ev) {
    DeviceState& st = states_[ev.device_id];
    DispatchResult r = dispatch(st, ev, cfg_, schema_, reference_);
    st = std::move(r.state);
    return std::move(r.records);
  }

  const DeviceState& state(const std::string& device_id) const {
    auto it = states_.find(device_id);
    if (it == states_.end())
      throw std::invalid_argument("unknown device '" + device_id + "'");
    return it->second;
  }

  const TriggerConfig& config() const { return cfg_; }

private:
  FeatureSchema schema_;
  TriggerConfig cfg_;
  DecisionMatrix reference_;
  std::map<std::string, DeviceState> states_;
};

// Persistence ---------------------------------------------------------------------

/// Append-only newline-delimited record log with a version header. A torn
/// final line (no trailing newline, or unparseable) is detected and skipped
/// on reload; corruption elsewhere is an error.
class ScoreLog {
public:
  static constexpr std::string_view kHeader =
      R"({"format":"perfsense-score-log","version":1})";

  explicit ScoreLog(std::filesystem::path path) : path_(std::move(path)) {
    bool fresh = !std::filesystem::exists(path_) ||
                 std::filesystem::file_size(path_) == 0;
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw std::runtime_error("cannot open log " + path_.string());
    if (fresh) {
      out_ << kHeader << '\n';
      out_.flush();
    }
  }

  void append(const ScoreRecord& r) {
    out_ << record_to_line(r) << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write failed on log " + path_.string());
  }

  static std::vector<ScoreRecord> load(const std::filesystem::path& path,
                                       bool* torn = nullptr) {
    if (torn) *torn = false;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open log " + path.string());
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());

    std::vector<std::string> lines;
    size_t pos = 0;
    bool last_terminated = !content.empty() && content.back() == '\n';
    while (pos < content.size()) {
      auto nl = content.find('\n', pos);
      if (nl == std::string::npos) {
        lines.push_back(content.substr(pos));
        break;
      }
      lines.push_back(content.substr(pos, nl - pos));
      pos = nl + 1;
    }
    if (lines.empty() || lines.front() != kHeader)
      throw std::runtime_error("log missing version header: " + path.string());

    std::vector<ScoreRecord> records;
    for (size_t i = 1; i < lines.size(); ++i) {
      bool is_last = (i + 1 == lines.size());
      try {
        records.push_back(score_record_from_line(lines[i]));
        if (is_last && !last_terminated) {
          // a record without its newline may be half-written: drop it
          records.pop_back();
          if (torn) *torn = true;
        }
      } catch (const std::exception&) {
        if (is_last) {
          if (torn) *torn = true;
          break;
        }
        throw std::runtime_error("corrupt record at line " +
                                 std::to_string(i + 1) + " of " + path.string());
      }
    }
    return records;
  }

private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace perfsense
