#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "perfsense/portrait.hpp"

using namespace perfsense;
using Catch::Approx;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

RuleSet network_rules() {
  static const std::string text =
      read_file(std::string(PERFSENSE_DATA_DIR) + "/network_rules.cfg");
  return parse_rules(text);
}

DailyLabelHistory history_of(std::vector<int> tags, int start_day = 20000) {
  DailyLabelHistory h;
  h.device_id = "dev";
  for (size_t i = 0; i < tags.size(); ++i)
    h.days.push_back({start_day + static_cast<int>(i), tags[i]});
  return h;
}

}  // namespace

TEST_CASE("date helpers") {
  CHECK(parse_date("1970-01-01") == 0);
  CHECK(parse_date("1970-01-02") == 1);
  CHECK(format_date(parse_date("2024-07-15")) == "2024-07-15");
  CHECK(parse_date("2024-03-01") - parse_date("2024-02-28") == 2);  // leap year
  CHECK_THROWS_AS(parse_date("2024/01/01"), std::invalid_argument);
}

TEST_CASE("parse_rules reads the network quality rule file") {
  RuleSet rules = network_rules();
  REQUIRE(rules.size() == 4);
  const LabelRule* tag1 = nullptr;
  for (const auto& r : rules)
    if (r.tag == 1) tag1 = &r;
  REQUIRE(tag1 != nullptr);
  CHECK(tag1->conditions.size() == 4);

  SECTION("missing tag coverage is rejected") {
    CHECK_THROWS_WITH(parse_rules("tag 1 {\n  x > 1\n}\n"),
                      Catch::Matchers::ContainsSubstring("0..3"));
  }
  SECTION("two-bound conjunct parses") {
    RuleSet rs = parse_rules(
        "tag 0 {\n  x unpredictable\n}\n"
        "tag 1 {\n  x > 3\n}\n"
        "tag 2 {\n  x > 1 and <= 3\n}\n"
        "tag 3 {\n  x <= 1\n}\n");
    const LabelRule* t2 = nullptr;
    for (const auto& r : rs)
      if (r.tag == 2) t2 = &r;
    REQUIRE(t2);
    REQUIRE(t2->conditions.size() == 1);
    REQUIRE(t2->conditions[0].second.has_value());
    CHECK(t2->conditions[0].second->second == 3.0);
  }
}

TEST_CASE("daily_label on the network rule set") {
  RuleSet rules = network_rules();

  SECTION("good-network day maps to tag 1") {
    int tag = daily_label(rules, {{"4g_speed", 3500.0},
                                  {"wifi_speed", 4000.0},
                                  {"ffd_avg", 120.0},
                                  {"block_pct", 0.0}});
    CHECK(tag == 1);
  }
  SECTION("all features missing maps to tag 0") {
    CHECK(daily_label(rules, {}) == 0);
  }
  SECTION("poor-network day maps to tag 3") {
    int tag = daily_label(rules, {{"4g_speed", 1500.0},
                                  {"wifi_speed", 1500.0},
                                  {"ffd_avg", 400.0},
                                  {"block_pct", 0.02}});
    CHECK(tag == 3);
  }
  SECTION("middle ground is the residual tag 2") {
    int tag = daily_label(rules, {{"4g_speed", 2000.0},
                                  {"wifi_speed", 2000.0},
                                  {"ffd_avg", 200.0},
                                  {"block_pct", 0.005}});
    CHECK(tag == 2);
  }
  SECTION("boundary: 300 ms first-frame stays out of tag 3") {
    int tag = daily_label(rules, {{"4g_speed", 1000.0},
                                  {"wifi_speed", 1000.0},
                                  {"ffd_avg", 300.0},
                                  {"block_pct", 0.5}});
    // ffd_avg = 300 fails the tag-3 "> 300" condition
    CHECK(tag == 2);
  }
  SECTION("total on random feature subsets") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> speed(0, 6000), ffd(0, 600),
        block(0, 0.05);
    for (int rep = 0; rep < 500; ++rep) {
      std::map<std::string, double> f;
      if (rng() % 2) f["4g_speed"] = speed(rng);
      if (rng() % 2) f["wifi_speed"] = speed(rng);
      if (rng() % 2) f["ffd_avg"] = ffd(rng);
      if (rng() % 2) f["block_pct"] = block(rng);
      int tag = daily_label(rules, f);
      CHECK(tag >= 0);
      CHECK(tag <= 3);
    }
  }
}

TEST_CASE("fit_portrait") {
  SECTION("80 percent tag-1 window with tag-1 last day fits portrait 1") {
    std::vector<int> tags(15, 1);
    tags[3] = 2;
    tags[7] = 2;
    tags[11] = 2;  // 12 of 15 are tag 1
    auto label = fit_portrait(history_of(tags));
    CHECK(label.tag == 1);
  }
  SECTION("empty history fits portrait 0") {
    DailyLabelHistory h;
    h.device_id = "dev";
    CHECK(fit_portrait(h).tag == 0);
  }
  SECTION("high tag-1 share but tag-3 last day falls to portrait 2") {
    std::vector<int> tags(15, 1);
    tags[14] = 3;  // 14 of 15 tag 1, last day tag 3
    auto label = fit_portrait(history_of(tags));
    CHECK(label.tag == 2);
  }
  SECTION("threshold is exactly 70 percent") {
    // 11 of 15 = 73.3% passes, 10 of 15 = 66.7% does not
    std::vector<int> pass(15, 2);
    for (int i = 0; i < 10; ++i) pass[static_cast<size_t>(i)] = 1;
    pass[14] = 1;  // 11 ones, last is 1
    CHECK(fit_portrait(history_of(pass)).tag == 1);

    std::vector<int> fail(15, 2);
    for (int i = 0; i < 9; ++i) fail[static_cast<size_t>(i)] = 1;
    fail[14] = 1;  // 10 ones
    CHECK(fit_portrait(history_of(fail)).tag == 2);
  }
  SECTION("tag-0 days count in the window denominator") {
    std::vector<int> tags(15, 0);
    for (int i = 5; i < 15; ++i) tags[static_cast<size_t>(i)] = 1;
    // 10/15 = 66.7% < 70% even though all non-zero days are 1
    CHECK(fit_portrait(history_of(tags)).tag == 2);
  }
  SECTION("prefix invariance: days outside the window never matter") {
    std::mt19937 rng(9);
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<int> window_tags(15);
      for (auto& t : window_tags) t = static_cast<int>(rng() % 4);
      auto bare = fit_portrait(history_of(window_tags, 20100));

      std::vector<int> with_prefix;
      for (int i = 0; i < 30; ++i)
        with_prefix.push_back(static_cast<int>(rng() % 4));
      with_prefix.insert(with_prefix.end(), window_tags.begin(),
                         window_tags.end());
      auto padded = fit_portrait(history_of(with_prefix, 20070));
      CHECK(padded.tag == bare.tag);
    }
  }
  SECTION("symmetric rule for tag 3") {
    std::vector<int> tags(15, 3);
    tags[0] = 2;
    CHECK(fit_portrait(history_of(tags)).tag == 3);
  }
}

TEST_CASE("evaluate_fit") {
  SECTION("perfect predictor scores accuracy and recall 1") {
    std::vector<PortraitLabel> predicted;
    std::vector<DailyLabelHistory> actual;
    for (int i = 0; i < 10; ++i) {
      std::string id = "d" + std::to_string(i);
      int tag = i < 5 ? 1 : 3;
      predicted.push_back({id, tag, 20014});
      auto h = history_of(std::vector<int>(15, tag), 20015);
      h.device_id = id;
      actual.push_back(h);
    }
    auto report = evaluate_fit(predicted, actual);
    REQUIRE(report.cat1.accuracy.has_value());
    CHECK(*report.cat1.accuracy == 1.0);
    CHECK(*report.cat1.recall_rate == 1.0);
    CHECK(*report.cat3.accuracy == 1.0);
    CHECK(report.cat1.prediction_proportion == Approx(0.5));
  }
  SECTION("disjoint prediction and actual gives accuracy 0") {
    std::vector<PortraitLabel> predicted{{"a", 1, 0}, {"b", 1, 0}};
    std::vector<DailyLabelHistory> actual;
    for (auto id : {"a", "b"}) {
      auto h = history_of(std::vector<int>(15, 3));
      h.device_id = id;
      actual.push_back(h);
    }
    auto report = evaluate_fit(predicted, actual);
    REQUIRE(report.cat1.accuracy.has_value());
    CHECK(*report.cat1.accuracy == 0.0);
    CHECK_FALSE(report.cat1.recall_rate.has_value());  // no actual tag-1 devices
  }
  SECTION("unavailable rates when a category is empty") {
    std::vector<PortraitLabel> predicted{{"a", 2, 0}, {"b", 2, 0}};
    std::vector<DailyLabelHistory> actual;
    for (auto id : {"a", "b"}) {
      auto h = history_of(std::vector<int>(15, 2));
      h.device_id = id;
      actual.push_back(h);
    }
    auto report = evaluate_fit(predicted, actual);
    CHECK_FALSE(report.cat1.accuracy.has_value());
    CHECK_FALSE(report.cat1.recall_rate.has_value());
    CHECK_FALSE(report.cat1.stability.has_value());
    CHECK(report.cat1.prediction_proportion == 0.0);
  }
  SECTION("empty population rejected") {
    CHECK_THROWS_AS(evaluate_fit({}, {}), std::invalid_argument);
  }
  SECTION("intersection count ties accuracy and recall together") {
    std::mt19937 rng(10);
    std::vector<PortraitLabel> predicted;
    std::vector<DailyLabelHistory> actual;
    for (int i = 0; i < 200; ++i) {
      std::string id = "d" + std::to_string(i);
      predicted.push_back({id, static_cast<int>(rng() % 4), 20014});
      std::vector<int> tags(15);
      for (auto& t : tags) t = static_cast<int>(rng() % 4);
      auto h = history_of(tags, 20015);
      h.device_id = id;
      actual.push_back(h);
    }
    auto report = evaluate_fit(predicted, actual);
    for (const CategoryFit* fit : {&report.cat1, &report.cat3}) {
      double n = static_cast<double>(report.population);
      double pred_c = fit->prediction_proportion * n;
      double act_c = fit->recall_proportion * n;
      if (fit->accuracy)
        CHECK(*fit->accuracy * pred_c ==
              Approx(static_cast<double>(fit->intersection)).margin(1e-9));
      if (fit->recall_rate)
        CHECK(*fit->recall_rate * act_c ==
              Approx(static_cast<double>(fit->intersection)).margin(1e-9));
    }
  }
}
