#pragma once

// Feature universe declaration: indicator directions, valid ranges, and the
// two-level category hierarchy. The parsed schema fixes the canonical column
// order of every matrix downstream.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "perfsense/config.hpp"

#include "json.hpp"

namespace perfsense {

enum class Direction { maximal, minimal, intermediate, interval };

struct IndicatorSpec {
  std::string name;
  std::string category;
  std::string unit;
  Direction direction = Direction::maximal;
  double best = 0.0;          // intermediate target value
  double a = 0.0, b = 0.0;    // interval bounds
  double lo = 0.0, hi = 0.0;  // valid range [lo, hi], closed
};

/// Ordered indicator list plus category order. Immutable after construction;
/// safe to share across threads.
class FeatureSchema {
public:
  FeatureSchema() = default;

  /// Validates and builds a schema. When `categories` is empty the category
  /// order is the order of first appearance among the indicators.
  static FeatureSchema from_indicators(std::vector<IndicatorSpec> indicators,
                                       std::vector<std::string> categories = {}) {
    if (indicators.empty()) throw std::invalid_argument("empty schema");

    std::set<std::string> seen;
    for (const auto& ind : indicators) {
      if (ind.name.empty())
        throw std::invalid_argument("indicator with empty name");
      if (!seen.insert(ind.name).second)
        throw std::invalid_argument("duplicate indicator name '" + ind.name + "'");
      if (!(ind.lo < ind.hi))
        throw std::invalid_argument("indicator '" + ind.name +
                                    "': range requires lo < hi");
      if (ind.direction == Direction::interval) {
        if (ind.a > ind.b)
          throw std::invalid_argument("indicator '" + ind.name +
                                      "': interval requires a <= b");
        if (ind.a < ind.lo || ind.b > ind.hi)
          throw std::invalid_argument("indicator '" + ind.name +
                                      "': interval [a,b] must lie within range");
      }
      if (ind.direction == Direction::intermediate &&
          (ind.best < ind.lo || ind.best > ind.hi))
        throw std::invalid_argument("indicator '" + ind.name +
                                    "': best value outside range");
    }

    if (categories.empty()) {
      std::set<std::string> listed;
      for (const auto& ind : indicators)
        if (listed.insert(ind.category).second) categories.push_back(ind.category);
    } else {
      std::set<std::string> listed(categories.begin(), categories.end());
      if (listed.size() != categories.size())
        throw std::invalid_argument("duplicate category in category list");
      for (const auto& ind : indicators)
        if (!listed.count(ind.category))
          throw std::invalid_argument("indicator '" + ind.name +
                                      "' uses undeclared category '" +
                                      ind.category + "'");
      for (const auto& c : categories) {
        bool used = false;
        for (const auto& ind : indicators) used |= (ind.category == c);
        if (!used)
          throw std::invalid_argument("empty category '" + c + "'");
      }
    }

    FeatureSchema s;
    s.indicators_ = std::move(indicators);
    s.categories_ = std::move(categories);
    for (size_t j = 0; j < s.indicators_.size(); ++j)
      s.index_[s.indicators_[j].name] = static_cast<int>(j);
    return s;
  }

  const std::vector<IndicatorSpec>& indicators() const { return indicators_; }
  const std::vector<std::string>& categories() const { return categories_; }
  size_t size() const { return indicators_.size(); }

  const IndicatorSpec& at(size_t j) const { return indicators_.at(j); }

  int index_of(std::string_view name) const {
    auto it = index_.find(std::string(name));
    return it == index_.end() ? -1 : it->second;
  }

  const IndicatorSpec& indicator(std::string_view name) const {
    int j = index_of(name);
    if (j < 0)
      throw std::invalid_argument("unknown indicator '" + std::string(name) + "'");
    return indicators_[static_cast<size_t>(j)];
  }

  std::vector<int> category_columns(std::string_view category) const {
    std::vector<int> cols;
    for (size_t j = 0; j < indicators_.size(); ++j)
      if (indicators_[j].category == category) cols.push_back(static_cast<int>(j));
    return cols;
  }

private:
  std::vector<IndicatorSpec> indicators_;
  std::vector<std::string> categories_;
  std::map<std::string, int> index_;
};

namespace detail {

inline Direction parse_direction(const std::string& value, IndicatorSpec& out,
                                 int line) {
  std::istringstream in(value);
  std::string head;
  in >> head;
  if (head == "maximal") return Direction::maximal;
  if (head == "minimal") return Direction::minimal;
  if (head == "intermediate" || head == "interval") {
    std::string tok;
    std::map<std::string, double> kv;
    while (in >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw cfg::ConfigError("direction parameter '" + tok +
                                   "' must look like key=value",
                               line);
      kv[tok.substr(0, eq)] = cfg::to_real(tok.substr(eq + 1), line);
    }
    if (head == "intermediate") {
      if (!kv.count("best"))
        throw cfg::ConfigError("intermediate direction needs best=<value>", line);
      out.best = kv["best"];
      return Direction::intermediate;
    }
    if (!kv.count("a") || !kv.count("b"))
      throw cfg::ConfigError("interval direction needs a=<value> b=<value>", line);
    out.a = kv["a"];
    out.b = kv["b"];
    return Direction::interval;
  }
  throw cfg::ConfigError("unknown direction '" + value + "'", line);
}

}  // namespace detail

/// Parses the schema configuration document. Expected layout:
///
///   schema {
///     categories = CPU, Memory        # optional explicit order
///     indicator {
///       name = cpu_usage_ratio
///       category = CPU
///       unit = %
///       direction = minimal
///       range = [0, 100]
///     }
///   }
inline FeatureSchema parse_schema(std::string_view text) {
  cfg::Section root = cfg::parse_document(text);
  const cfg::Section* sec = root.find("schema");
  if (!sec) throw cfg::ConfigError("missing top-level 'schema' section", 1);

  std::vector<IndicatorSpec> indicators;
  for (const cfg::Section* block : sec->all("indicator")) {
    IndicatorSpec ind;
    ind.name = block->require("name");
    ind.category = block->require("category");
    if (auto u = block->get("unit")) ind.unit = *u;
    ind.direction = detail::parse_direction(block->require("direction"), ind,
                                            block->line);
    auto range = cfg::to_interval(block->require("range"), block->line);
    ind.lo = range.first;
    ind.hi = range.second;
    indicators.push_back(std::move(ind));
  }

  std::vector<std::string> categories;
  if (auto cats = sec->get("categories")) categories = cfg::to_list(*cats);

  return FeatureSchema::from_indicators(std::move(indicators),
                                        std::move(categories));
}

inline FeatureSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_schema(buf.str());
}

// Telemetry records ---------------------------------------------------------

/// One telemetry sample. A missing indicator is an absent key in `values`,
/// never a sentinel number.
struct FeatureRecord {
  std::string device_id;
  std::string model_id;
  std::int64_t ts_ms = 0;
  std::map<std::string, double> values;
};

/// Replaces every value outside its indicator's closed valid range with
/// missing (erased key); in-range values pass through. Boundary values are
/// kept. Idempotent.
inline FeatureRecord validate_record(const FeatureSchema& schema,
                                     FeatureRecord rec) {
  for (auto it = rec.values.begin(); it != rec.values.end();) {
    const IndicatorSpec& ind = schema.indicator(it->first);
    double v = it->second;
    if (!(v >= ind.lo && v <= ind.hi))  // also discards NaN
      it = rec.values.erase(it);
    else
      ++it;
  }
  return rec;
}

/// Parses one newline-delimited telemetry record:
///   {"device_id": "...", "model_id": "...", "ts_ms": 0, "values": {...}}
inline FeatureRecord parse_record_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  FeatureRecord rec;
  rec.device_id = j.at("device_id").get<std::string>();
  rec.model_id = j.at("model_id").get<std::string>();
  rec.ts_ms = j.at("ts_ms").get<std::int64_t>();
  if (rec.ts_ms < 0) throw std::invalid_argument("ts_ms must be >= 0");
  for (auto& [k, v] : j.at("values").items())
    rec.values[k] = v.get<double>();
  return rec;
}

inline std::string record_to_line(const FeatureRecord& rec) {
  nlohmann::ordered_json j;
  j["device_id"] = rec.device_id;
  j["model_id"] = rec.model_id;
  j["ts_ms"] = rec.ts_ms;
  j["values"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rec.values) j["values"][k] = v;
  return j.dump();
}

}  // namespace perfsense
