#pragma once

// Descriptive time-series portrait labels: per-day tag assignment from a
// rule set, trailing-window portrait fitting, and precision / recall
// evaluation of fitted portraits against a held-out window.
//
// Tag semantics (0..3): 0 = no usable signal, 1 = good, 2 = middle
// (residual), 3 = poor. A day is tag 0 when every feature the rules
// reference is missing; tag 1 (and symmetrically 3) when all of that tag's
// conditions hold on the features that are present; tag 2 otherwise.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "perfsense/config.hpp"

namespace perfsense {

// Civil-date helpers (proleptic Gregorian, days since 1970-01-01) ------------

inline int days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy =
      static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

inline std::array<int, 3> civil_from_days(int z) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

inline int parse_date(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 ||
      m > 12 || d < 1 || d > 31)
    throw std::invalid_argument("bad date '" + iso + "', expected YYYY-MM-DD");
  return days_from_civil(y, m, d);
}

inline std::string format_date(int day) {
  auto [y, m, d] = civil_from_days(day);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

// Label rules ----------------------------------------------------------------

enum class Cmp { gt, ge, lt, le, unpredictable };

struct Predicate {
  std::string feature;
  Cmp cmp = Cmp::gt;
  double threshold = 0.0;
  std::optional<std::pair<Cmp, double>> second;  // conjunct bound

  bool holds(double value) const {
    auto one = [&](Cmp c, double t) {
      switch (c) {
        case Cmp::gt: return value > t;
        case Cmp::ge: return value >= t;
        case Cmp::lt: return value < t;
        case Cmp::le: return value <= t;
        case Cmp::unpredictable: return false;  // a present value is predictable
      }
      return false;
    };
    if (!one(cmp, threshold)) return false;
    return !second || one(second->first, second->second);
  }
};

struct LabelRule {
  int tag = 0;
  bool residual = false;
  std::vector<Predicate> conditions;
};

using RuleSet = std::vector<LabelRule>;

namespace detail {

inline Cmp parse_cmp(const std::string& tok, int line) {
  if (tok == ">") return Cmp::gt;
  if (tok == ">=") return Cmp::ge;
  if (tok == "<") return Cmp::lt;
  if (tok == "<=") return Cmp::le;
  throw cfg::ConfigError("unknown comparator '" + tok + "'", line);
}

inline const LabelRule* rule_for(const RuleSet& rules, int tag) {
  for (const auto& r : rules)
    if (r.tag == tag) return &r;
  return nullptr;
}

inline void require_full_cover(const RuleSet& rules) {
  for (int t = 0; t <= 3; ++t)
    if (!rule_for(rules, t))
      throw std::invalid_argument("rule set must cover tags 0..3 (missing " +
                                  std::to_string(t) + ")");
}

}  // namespace detail

/// Parses a rule file in the shared config grammar: one `tag <n> { ... }`
/// block per tag, predicate lines `feature <cmp> <threshold>` with an
/// optional `and <cmp> <threshold>` conjunct, `feature unpredictable`, or a
/// bare `residual` marker.
inline RuleSet parse_rules(std::string_view text) {
  cfg::Section root = cfg::parse_document(text);
  RuleSet rules;
  std::set<int> seen;

  for (const cfg::Section* sec : root.all("tag")) {
    LabelRule rule;
    try {
      rule.tag = std::stoi(sec->arg);
    } catch (const std::exception&) {
      throw cfg::ConfigError("tag section needs an integer argument", sec->line);
    }
    if (rule.tag < 0 || rule.tag > 3)
      throw cfg::ConfigError("tag must be 0..3", sec->line);
    if (!seen.insert(rule.tag).second)
      throw cfg::ConfigError("duplicate tag " + std::to_string(rule.tag),
                             sec->line);

    for (size_t i = 0; i < sec->bare.size(); ++i) {
      const std::string& line = sec->bare[i];
      const int line_no = sec->bare_lines[i];
      if (line == "residual") {
        rule.residual = true;
        continue;
      }
      std::vector<std::string> toks;
      size_t pos = 0;
      while (pos < line.size()) {
        auto sp = line.find_first_of(" \t", pos);
        toks.push_back(line.substr(pos, sp == std::string::npos ? sp : sp - pos));
        if (sp == std::string::npos) break;
        pos = line.find_first_not_of(" \t", sp);
        if (pos == std::string::npos) break;
      }
      if (toks.size() == 2 && toks[1] == "unpredictable") {
        rule.conditions.push_back({toks[0], Cmp::unpredictable, 0.0, {}});
        continue;
      }
      if (toks.size() != 3 && !(toks.size() == 6 && toks[3] == "and"))
        throw cfg::ConfigError(
            "expected 'feature <cmp> <threshold> [and <cmp> <threshold>]'",
            line_no);
      Predicate pred;
      pred.feature = toks[0];
      pred.cmp = detail::parse_cmp(toks[1], line_no);
      pred.threshold = cfg::to_real(toks[2], line_no);
      if (toks.size() == 6)
        pred.second = {detail::parse_cmp(toks[4], line_no),
                       cfg::to_real(toks[5], line_no)};
      rule.conditions.push_back(std::move(pred));
    }
    rules.push_back(std::move(rule));
  }

  detail::require_full_cover(rules);
  return rules;
}

/// Assigns the day tag for one feature vector. Total: every input, including
/// all-missing, maps to exactly one tag.
inline int daily_label(const RuleSet& rules,
                       const std::map<std::string, double>& day_features) {
  detail::require_full_cover(rules);

  std::set<std::string> referenced;
  for (int t : {1, 3})
    for (const auto& c : detail::rule_for(rules, t)->conditions)
      referenced.insert(c.feature);

  bool any_present = false;
  for (const auto& f : referenced)
    any_present |= day_features.count(f) > 0;
  if (!any_present) return 0;

  auto tag_holds = [&](int tag) {
    for (const auto& c : detail::rule_for(rules, tag)->conditions) {
      auto it = day_features.find(c.feature);
      if (c.cmp == Cmp::unpredictable) {
        if (it != day_features.end()) return false;
        continue;
      }
      if (it == day_features.end()) continue;  // vacuous on missing features
      if (!c.holds(it->second)) return false;
    }
    return true;
  };

  if (tag_holds(1)) return 1;
  if (tag_holds(3)) return 3;
  return 2;
}

// Portrait fitting ------------------------------------------------------------

/// Per-device daily tag history; at most one tag per day, days ascending.
struct DailyLabelHistory {
  std::string device_id;
  std::vector<std::pair<int, int>> days;  // (day number, tag)

  void check() const {
    for (size_t i = 0; i < days.size(); ++i) {
      if (i > 0 && days[i].first <= days[i - 1].first)
        throw std::invalid_argument("history days must be strictly ascending");
      if (days[i].second < 0 || days[i].second > 3)
        throw std::invalid_argument("tag out of range 0..3");
    }
  }
};

struct PortraitLabel {
  std::string device_id;
  int tag = 0;
  int as_of = 0;  // day number
};

/// Fits the portrait from the trailing `window_days` window ending at the
/// most recent day on record: tag c in {1,3} when the latest day's tag is c
/// AND the share of tag-c days in the window reaches `threshold`; tag 0
/// without usable history; tag 2 otherwise. Days outside the window never
/// influence the result.
inline PortraitLabel fit_portrait(const DailyLabelHistory& history,
                                  int window_days = 15,
                                  double threshold = 0.70) {
  if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
  history.check();

  PortraitLabel out;
  out.device_id = history.device_id;
  if (history.days.empty()) {
    out.tag = 0;
    return out;
  }

  const int last_day = history.days.back().first;
  out.as_of = last_day;
  const int window_start = last_day - window_days + 1;

  int total = 0, ones = 0, threes = 0;
  for (const auto& [day, tag] : history.days) {
    if (day < window_start) continue;
    ++total;
    if (tag == 1) ++ones;
    if (tag == 3) ++threes;
  }

  const int last_tag = history.days.back().second;
  const double prop1 = static_cast<double>(ones) / total;
  const double prop3 = static_cast<double>(threes) / total;
  if (last_tag == 1 && prop1 >= threshold)
    out.tag = 1;
  else if (last_tag == 3 && prop3 >= threshold)
    out.tag = 3;
  else
    out.tag = 2;
  return out;
}

// Fit evaluation ---------------------------------------------------------------

/// Per-category fit quality. Rates that would divide by zero are reported
/// unavailable rather than invented.
struct CategoryFit {
  double prediction_proportion = 0.0;
  std::optional<double> accuracy;
  double recall_proportion = 0.0;
  std::optional<double> recall_rate;
  std::optional<double> stability;
  size_t intersection = 0;  // |predicted c AND actual c|
};

struct FitReport {
  CategoryFit cat1;
  CategoryFit cat3;
  size_t population = 0;
};

/// Scores fitted portraits against held-out histories. The actual label of a
/// device is the portrait refit on its test-window history; stability for
/// category c is the share of actual-c devices whose rolling portrait
/// (recomputed at every day of the test window) never changes.
inline FitReport evaluate_fit(const std::vector<PortraitLabel>& predicted,
                              const std::vector<DailyLabelHistory>& test_histories,
                              int window_days = 15, double threshold = 0.70) {
  if (predicted.empty() || test_histories.empty())
    throw std::invalid_argument("empty population");
  if (predicted.size() != test_histories.size())
    throw std::invalid_argument("predicted and actual device sets differ");

  std::map<std::string, int> pred;
  for (const auto& p : predicted) pred[p.device_id] = p.tag;

  struct Outcome {
    int predicted;
    int actual;
    bool stable;
  };
  std::vector<Outcome> outcomes;
  outcomes.reserve(test_histories.size());

  for (const auto& hist : test_histories) {
    auto it = pred.find(hist.device_id);
    if (it == pred.end())
      throw std::invalid_argument("device '" + hist.device_id +
                                  "' has no predicted portrait");
    int actual = fit_portrait(hist, window_days, threshold).tag;

    bool stable = true;
    int first = -1;
    for (size_t k = 0; k < hist.days.size(); ++k) {
      DailyLabelHistory prefix;
      prefix.device_id = hist.device_id;
      prefix.days.assign(hist.days.begin(),
                         hist.days.begin() + static_cast<long>(k + 1));
      int tag = fit_portrait(prefix, window_days, threshold).tag;
      if (first < 0)
        first = tag;
      else if (tag != first)
        stable = false;
    }
    outcomes.push_back({it->second, actual, stable});
  }

  FitReport report;
  report.population = outcomes.size();
  const double n = static_cast<double>(outcomes.size());

  for (int c : {1, 3}) {
    size_t pred_c = 0, act_c = 0, inter = 0, stable_c = 0;
    for (const auto& o : outcomes) {
      if (o.predicted == c) ++pred_c;
      if (o.actual == c) {
        ++act_c;
        if (o.stable) ++stable_c;
      }
      if (o.predicted == c && o.actual == c) ++inter;
    }
    CategoryFit fit;
    fit.prediction_proportion = static_cast<double>(pred_c) / n;
    fit.recall_proportion = static_cast<double>(act_c) / n;
    fit.intersection = inter;
    if (pred_c > 0)
      fit.accuracy = static_cast<double>(inter) / static_cast<double>(pred_c);
    if (act_c > 0) {
      fit.recall_rate = static_cast<double>(inter) / static_cast<double>(act_c);
      fit.stability = static_cast<double>(stable_c) / static_cast<double>(act_c);
    }
    (c == 1 ? report.cat1 : report.cat3) = fit;
  }
  return report;
}

}  // namespace perfsense
