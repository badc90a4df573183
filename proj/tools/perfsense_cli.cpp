// perfsense: scoring, smoothing, forecasting, portraits, tiers, event
// replay, and the synthetic AB harness behind one binary. Subcommands are
// thin shells over the library; identical inputs through the CLI and the
// library produce identical bytes.
//
// Exit codes: 0 success, 1 input error, 2 internal error. Diagnostics go to
// stderr, data to stdout or --out.

#include <array>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "perfsense/perfsense.hpp"

namespace {

using namespace perfsense;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Output sink: --out file or stdout.
class Sink {
public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

private:
  std::ofstream file_;
};

std::string fmt(double v) { return format_number(v); }

std::string json_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : "null";
}

// ---------------------------------------------------------------- validate

void cmd_validate(const std::string& schema_path, const std::string& telemetry,
                  const std::string& out_path) {
  FeatureSchema schema = parse_schema(slurp(schema_path));
  Sink sink(out_path);
  if (telemetry.empty()) {
    sink.out() << "schema ok: " << schema.size() << " indicators, "
               << schema.categories().size() << " categories\n";
    return;
  }
  std::ifstream in(telemetry);
  if (!in) throw std::runtime_error("cannot open " + telemetry);
  std::string line;
  size_t line_no = 0, dropped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    FeatureRecord rec;
    try {
      rec = parse_record_line(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(telemetry + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
    FeatureRecord cleaned = validate_record(schema, rec);
    dropped += rec.values.size() - cleaned.values.size();
    sink.out() << record_to_line(cleaned) << '\n';
  }
  std::cerr << "validated " << line_no << " records, dropped " << dropped
            << " out-of-range values\n";
}

// ------------------------------------------------------------------- score

void cmd_score(const std::string& schema_path, const std::string& matrix_path,
               const std::string& level, double low_upper, double mid_upper,
               const std::string& out_path) {
  FeatureSchema schema = parse_schema(slurp(schema_path));
  DecisionMatrix x = load_matrix_csv(matrix_path, &schema);

  bool multi = level == "multi" ||
               (level == "auto" && schema.categories().size() > 1);
  ScoreVector s = multi ? evaluate_multilevel(x, schema)
                        : evaluate_snapshot(x, schema);

  TierThresholds tiers{low_upper, mid_upper};
  Sink sink(out_path);
  sink.out() << "row_id,raw,scaled,tier\n";
  for (size_t i = 0; i < s.raw.size(); ++i)
    sink.out() << x.row_ids[i] << ',' << fmt(s.raw[i]) << ',' << fmt(s.scaled[i])
               << ',' << tier_name(map_tier(s.scaled[i], tiers)) << '\n';
}

// ----------------------------------------------------------------- weights

void cmd_weights(const std::string& schema_path, const std::string& matrix_path,
                 const std::string& out_path) {
  FeatureSchema schema = parse_schema(slurp(schema_path));
  DecisionMatrix x = load_matrix_csv(matrix_path, &schema);
  DecisionMatrix pos = positivize(x, schema);
  WeightVector wv = entropy_weights(pos);

  Sink sink(out_path);
  for (size_t j = 0; j < x.cols(); ++j) {
    double mn = wv.p[0][j], mx = wv.p[0][j], mean = 0.0;
    for (size_t i = 0; i < x.rows(); ++i) {
      mn = std::min(mn, wv.p[i][j]);
      mx = std::max(mx, wv.p[i][j]);
      mean += wv.p[i][j];
    }
    mean /= static_cast<double>(x.rows());
    sink.out() << "{\"indicator\":\"" << x.columns[j] << "\","
               << "\"p_summary\":{\"min\":" << fmt(mn) << ",\"mean\":"
               << fmt(mean) << ",\"max\":" << fmt(mx) << "},"
               << "\"e\":" << fmt(wv.e[j]) << ",\"g\":" << fmt(wv.g[j])
               << ",\"w\":" << fmt(wv.w[j]) << "}\n";
  }
}

// ------------------------------------------------------------------ smooth

void cmd_smooth(const std::string& in_path, int lookback,
                const std::string& out_path) {
  ScoreSeries s = load_series_csv(in_path);
  SmoothParams p{lookback};
  auto vals = s.values();
  auto v_sma = sma_values(vals, lookback);
  auto v_wma = wma_values(vals, lookback);
  auto v_corr = wma_corrected_values(vals, lookback);
  auto v_hma = hma_values(vals, lookback);
  (void)p;

  Sink sink(out_path);
  sink.out() << "ts,raw,sma,wma,wma_corr,hma\n";
  for (size_t i = 0; i < vals.size(); ++i)
    sink.out() << s.points[i].ts_ms << ',' << fmt(vals[i]) << ',' << fmt(v_sma[i])
               << ',' << fmt(v_wma[i]) << ',' << fmt(v_corr[i]) << ','
               << fmt(v_hma[i]) << '\n';
}

// ---------------------------------------------------------------- forecast

void cmd_forecast(const std::string& in_path, const std::string& order_arg,
                  const std::string& criterion_arg, int horizon,
                  const std::string& out_path) {
  ScoreSeries s = load_series_csv(in_path);
  std::vector<double> values = s.values();

  ArimaModel model;
  if (order_arg == "auto") {
    Criterion crit = criterion_arg == "aic"    ? Criterion::aic
                     : criterion_arg == "aicc" ? Criterion::aicc
                                               : Criterion::bic;
    bool capped = false;
    model = auto_order(values, OrderBounds{}, crit, &capped);
    if (capped)
      std::cerr << "warning: differencing capped at d_max without passing the "
                   "stationarity check\n";
    std::cerr << "selected order (" << model.order.p << ',' << model.order.d
              << ',' << model.order.q << ")\n";
  } else {
    ArimaOrder order;
    if (std::sscanf(order_arg.c_str(), "%d,%d,%d", &order.p, &order.d,
                    &order.q) != 3)
      throw std::invalid_argument("--order must be auto or p,d,q");
    model = fit_arima(values, order);
  }

  Forecast fc = forecast(model, values, horizon);
  Sink sink(out_path);
  sink.out() << "step,point,lo80,hi80\n";
  for (int k = 0; k < fc.horizon; ++k)
    sink.out() << (k + 1) << ',' << fmt(fc.point[static_cast<size_t>(k)]) << ','
               << fmt(fc.interval_80[static_cast<size_t>(k)].first) << ','
               << fmt(fc.interval_80[static_cast<size_t>(k)].second) << '\n';
}

// ---------------------------------------------------------------- portrait

std::vector<DailyLabelHistory> load_daily_histories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::map<int, int>> by_device;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    std::string id = j.at("device_id").get<std::string>();
    int day = parse_date(j.at("date").get<std::string>());
    int tag = j.at("tag").get<int>();
    if (!by_device[id].emplace(day, tag).second)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate day for device " + id);
  }
  std::vector<DailyLabelHistory> out;
  for (auto& [id, days] : by_device) {
    DailyLabelHistory h;
    h.device_id = id;
    for (auto& [day, tag] : days) h.days.push_back({day, tag});
    h.check();
    out.push_back(std::move(h));
  }
  return out;
}

std::vector<DailyLabelHistory> label_feature_file(const std::string& path,
                                                  const RuleSet& rules) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::map<int, std::map<std::string, double>>> by_device;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    std::string id = j.at("device_id").get<std::string>();
    int day = parse_date(j.at("date").get<std::string>());
    auto& features = by_device[id][day];
    for (auto& [k, v] : j.at("values").items()) features[k] = v.get<double>();
  }
  std::vector<DailyLabelHistory> out;
  for (auto& [id, days] : by_device) {
    DailyLabelHistory h;
    h.device_id = id;
    for (auto& [day, features] : days)
      h.days.push_back({day, daily_label(rules, features)});
    out.push_back(std::move(h));
  }
  return out;
}

DailyLabelHistory restrict_to(const DailyLabelHistory& h, int from_day,
                              int to_day) {
  DailyLabelHistory out;
  out.device_id = h.device_id;
  for (const auto& [day, tag] : h.days)
    if (day >= from_day && day <= to_day) out.days.push_back({day, tag});
  return out;
}

void cmd_portrait(const std::string& rules_path, const std::string& daily_path,
                  const std::string& features_path, int window, double threshold,
                  const std::string& as_of_arg, bool evaluate, double split,
                  const std::string& out_path) {
  RuleSet rules = parse_rules(slurp(rules_path));
  std::vector<DailyLabelHistory> histories;
  if (!daily_path.empty())
    histories = load_daily_histories(daily_path);
  else if (!features_path.empty())
    histories = label_feature_file(features_path, rules);
  else
    throw std::invalid_argument("portrait needs --daily or --features");

  Sink sink(out_path);

  if (!evaluate) {
    int as_of_limit = as_of_arg.empty() ? INT32_MAX : parse_date(as_of_arg);
    for (const auto& h : histories) {
      auto restricted = restrict_to(h, INT32_MIN, as_of_limit);
      PortraitLabel label = fit_portrait(restricted, window, threshold);
      sink.out() << "{\"device_id\":\"" << label.device_id << "\",\"tag\":"
                 << label.tag << ",\"as_of\":\""
                 << (restricted.days.empty() ? "null"
                                             : format_date(label.as_of))
                 << "\"}\n";
    }
    return;
  }

  // time-domain split over the global date range: the leading `split`
  // fraction trains, the remainder tests
  int min_day = INT32_MAX, max_day = INT32_MIN;
  for (const auto& h : histories)
    for (const auto& [day, tag] : h.days) {
      min_day = std::min(min_day, day);
      max_day = std::max(max_day, day);
    }
  if (min_day > max_day) throw std::invalid_argument("no labeled days");
  int cut = min_day +
            static_cast<int>(std::llround((max_day - min_day + 1) * split));

  std::vector<PortraitLabel> predicted;
  std::vector<DailyLabelHistory> test;
  for (const auto& h : histories) {
    predicted.push_back(
        fit_portrait(restrict_to(h, INT32_MIN, cut - 1), window, threshold));
    test.push_back(restrict_to(h, cut, INT32_MAX));
  }
  FitReport report = evaluate_fit(predicted, test, window, threshold);

  auto emit = [&](int cat, const CategoryFit& fit) {
    sink.out() << "{\"category\":" << cat
               << ",\"prediction_proportion\":" << fmt(fit.prediction_proportion)
               << ",\"accuracy\":" << json_opt(fit.accuracy)
               << ",\"recall_proportion\":" << fmt(fit.recall_proportion)
               << ",\"recall_rate\":" << json_opt(fit.recall_rate)
               << ",\"stability\":" << json_opt(fit.stability)
               << ",\"population\":" << report.population << "}\n";
  };
  emit(1, report.cat1);
  emit(3, report.cat3);
}

// -------------------------------------------------------------- thresholds

void cmd_thresholds(const std::string& scores_path,
                    const std::string& proportions_arg,
                    const std::string& out_path) {
  std::array<double, 3> proportions{};
  if (std::sscanf(proportions_arg.c_str(), "%lf,%lf,%lf", &proportions[0],
                  &proportions[1], &proportions[2]) != 3)
    throw std::invalid_argument("--proportions must be three comma-separated numbers");

  std::ifstream in(scores_path);
  if (!in) throw std::runtime_error("cannot open " + scores_path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty scores file");
  std::vector<double> scores;
  std::string line;
  size_t line_no = 1;
  bool two_col = header == "ts,score";
  if (!two_col && header != "score")
    throw std::invalid_argument("scores file needs header 'score' or 'ts,score'");
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (two_col) {
      auto comma = line.find(',');
      if (comma == std::string::npos)
        throw std::runtime_error("line " + std::to_string(line_no) +
                                 ": expected ts,score");
      scores.push_back(std::stod(line.substr(comma + 1)));
    } else {
      scores.push_back(std::stod(line));
    }
  }

  TierThresholds t = derive_thresholds(scores, proportions);
  Sink sink(out_path);
  sink.out() << "low_upper,mid_upper\n" << fmt(t.low_upper) << ','
             << fmt(t.mid_upper) << '\n';
}

// ------------------------------------------------------------------ replay

void cmd_replay(const std::string& schema_path, const std::string& config_path,
                const std::string& reference_path, const std::string& events_path,
                const std::string& log_path) {
  FeatureSchema schema = parse_schema(slurp(schema_path));
  TriggerConfig cfg = parse_trigger_config(slurp(config_path));
  DecisionMatrix reference = load_matrix_csv(reference_path, &schema);

  Engine engine(schema, cfg, reference);
  ScoreLog log{std::filesystem::path(log_path)};

  std::ifstream in(events_path);
  if (!in) throw std::runtime_error("cannot open " + events_path);
  std::string line;
  size_t events = 0, records = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++events;
    for (const auto& rec : engine.handle(parse_event_line(line))) {
      log.append(rec);
      ++records;
    }
  }
  std::cerr << "replayed " << events << " events, persisted " << records
            << " records to " << log_path << '\n';
}

// -------------------------------------------------------------- simulate-ab

void cmd_simulate_ab(int devices, std::uint64_t seed, int days,
                     double static_cut, bool null_strategy, double cpu_relief,
                     double mem_relief, double low_upper, double mid_upper,
                     const std::string& csv_path) {
  Fleet fleet = generate_fleet(devices, seed);
  TriggerConfig cfg;
  cfg.scoring_events = {"score_tick"};
  cfg.tiers = TierThresholds{low_upper, mid_upper};

  StrategyParams strategy =
      null_strategy ? StrategyParams::null_strategy()
                    : StrategyParams{cpu_relief, mem_relief, 0.55};
  ExperimentReport report =
      run_experiment(fleet, cfg, static_cut, strategy, days);

  auto line = [&](const char* name, double ctl_w, double ctl_b, double exp_w,
                  double exp_b, const MetricDelta& d) {
    std::printf("%-24s %12.6f %12.6f %12.6f %12.6f %+10.4f %+9.4f%%\n", name,
                ctl_w, ctl_b, exp_w, exp_b, d.absolute, 100.0 * d.relative);
  };
  std::printf("groups: %zu devices each (control = static low-end, "
              "experimental = dynamic low-end)\n",
              report.group_size);
  std::printf("%-24s %12s %12s %12s %12s %10s %10s\n", "metric", "ctl", "ctl_base",
              "exp", "exp_base", "delta_abs", "delta_rel");
  line("playback_stability", report.control.with_strategy.playback_stability,
       report.control.baseline.playback_stability,
       report.experimental.with_strategy.playback_stability,
       report.experimental.baseline.playback_stability, report.stability);
  line("playback_smoothness_ms",
       report.control.with_strategy.playback_smoothness_ms,
       report.control.baseline.playback_smoothness_ms,
       report.experimental.with_strategy.playback_smoothness_ms,
       report.experimental.baseline.playback_smoothness_ms, report.smoothness);
  line("first_swipe_ms", report.control.with_strategy.first_swipe_ms,
       report.control.baseline.first_swipe_ms,
       report.experimental.with_strategy.first_swipe_ms,
       report.experimental.baseline.first_swipe_ms, report.first_swipe);
  line("resource_occupancy", report.control.with_strategy.resource_occupancy,
       report.control.baseline.resource_occupancy,
       report.experimental.with_strategy.resource_occupancy,
       report.experimental.baseline.resource_occupancy, report.occupancy);

  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << report_to_csv(report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"device performance perception toolkit", "perfsense"};
  app.require_subcommand(1);
  std::function<void()> action;

  // validate
  {
    auto* cmd = app.add_subcommand("validate",
                                   "check a schema file, optionally cleaning telemetry");
    auto schema = std::make_shared<std::string>();
    auto telemetry = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--schema", *schema, "schema config file")->required();
    cmd->add_option("--telemetry", *telemetry, "telemetry ndjson to validate");
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] { cmd_validate(*schema, *telemetry, *out); };
    });
  }

  // score
  {
    auto* cmd = app.add_subcommand("score",
                                   "score a decision matrix (row_id,raw,scaled,tier)");
    auto schema = std::make_shared<std::string>();
    auto matrix = std::make_shared<std::string>();
    auto level = std::make_shared<std::string>("auto");
    auto low = std::make_shared<double>(28.67);
    auto mid = std::make_shared<double>(56.82);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--schema", *schema, "schema config file")->required();
    cmd->add_option("--matrix", *matrix, "decision matrix csv")->required();
    cmd->add_option("--level", *level, "auto|flat|multi (default auto)")
        ->check(CLI::IsMember({"auto", "flat", "multi"}));
    cmd->add_option("--low-upper", *low, "low tier upper bound");
    cmd->add_option("--mid-upper", *mid, "mid tier upper bound");
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] { cmd_score(*schema, *matrix, *level, *low, *mid, *out); };
    });
  }

  // weights
  {
    auto* cmd = app.add_subcommand("weights",
                                   "entropy weight report per indicator (ndjson)");
    auto schema = std::make_shared<std::string>();
    auto matrix = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    cmd->add_option("--schema", *schema, "schema config file")->required();
    cmd->add_option("--matrix", *matrix, "decision matrix csv")->required();
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] { cmd_weights(*schema, *matrix, *out); };
    });
  }

  // smooth
  {
    auto* cmd = app.add_subcommand("smooth",
                                   "moving averages of a score series "
                                   "(ts,raw,sma,wma,wma_corr,hma)");
    auto in = std::make_shared<std::string>();
    auto lookback = std::make_shared<int>(9);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "series csv (ts,score)")->required();
    cmd->add_option("--lookback", *lookback, "window length (default 9)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] { cmd_smooth(*in, *lookback, *out); };
    });
  }

  // forecast
  {
    auto* cmd = app.add_subcommand("forecast",
                                   "ARIMA forecast of a score series "
                                   "(step,point,lo80,hi80)");
    auto in = std::make_shared<std::string>();
    auto order = std::make_shared<std::string>("auto");
    auto criterion = std::make_shared<std::string>("bic");
    auto horizon = std::make_shared<int>(5);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--in", *in, "series csv (ts,score)")->required();
    cmd->add_option("--order", *order, "auto or p,d,q (default auto)");
    cmd->add_option("--criterion", *criterion, "aic|aicc|bic (default bic)")
        ->check(CLI::IsMember({"aic", "aicc", "bic"}));
    cmd->add_option("--horizon", *horizon, "steps ahead (default 5)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] { cmd_forecast(*in, *order, *criterion, *horizon, *out); };
    });
  }

  // portrait
  {
    auto* cmd = app.add_subcommand("portrait",
                                   "fit portrait labels; --evaluate scores the "
                                   "fit on a time-domain split");
    auto rules = std::make_shared<std::string>();
    auto daily = std::make_shared<std::string>();
    auto features = std::make_shared<std::string>();
    auto window = std::make_shared<int>(15);
    auto threshold = std::make_shared<double>(0.70);
    auto as_of = std::make_shared<std::string>();
    auto evaluate = std::make_shared<bool>(false);
    auto split = std::make_shared<double>(0.8);
    auto out = std::make_shared<std::string>();
    cmd->add_option("--rules", *rules, "label rule config file")->required();
    cmd->add_option("--daily", *daily, "daily tags ndjson {device_id,date,tag}");
    cmd->add_option("--features", *features,
                    "daily features ndjson {device_id,date,values}");
    cmd->add_option("--window", *window, "trailing window days (default 15)");
    cmd->add_option("--threshold", *threshold,
                    "dominance threshold (default 0.70)");
    cmd->add_option("--as-of", *as_of, "fit as of date YYYY-MM-DD");
    cmd->add_flag("--evaluate", *evaluate, "evaluate fit quality instead");
    cmd->add_option("--split", *split, "train fraction for --evaluate (default 0.8)");
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] {
        cmd_portrait(*rules, *daily, *features, *window, *threshold, *as_of,
                     *evaluate, *split, *out);
      };
    });
  }

  // thresholds
  {
    auto* cmd = app.add_subcommand("thresholds",
                                   "derive tier cut points from a score sample");
    auto scores = std::make_shared<std::string>();
    auto proportions = std::make_shared<std::string>("0.1345,0.3966,0.4689");
    auto out = std::make_shared<std::string>();
    cmd->add_option("--scores", *scores, "csv with header 'score' or 'ts,score'")
        ->required();
    cmd->add_option("--proportions", *proportions,
                    "low,mid,high shares (default 0.1345,0.3966,0.4689)");
    cmd->add_option("--out", *out, "output file (default stdout)");
    cmd->callback([=, &action] {
      action = [=] { cmd_thresholds(*scores, *proportions, *out); };
    });
  }

  // replay
  {
    auto* cmd = app.add_subcommand("replay",
                                   "replay an event log through the engine into "
                                   "a persisted score log");
    auto schema = std::make_shared<std::string>();
    auto config = std::make_shared<std::string>();
    auto reference = std::make_shared<std::string>();
    auto events = std::make_shared<std::string>();
    auto log = std::make_shared<std::string>();
    cmd->add_option("--schema", *schema, "schema config file")->required();
    cmd->add_option("--config", *config, "trigger config file")->required();
    cmd->add_option("--reference", *reference, "reference population csv")
        ->required();
    cmd->add_option("--events", *events, "event ndjson file")->required();
    cmd->add_option("--log", *log, "score log to append to")->required();
    cmd->callback([=, &action] {
      action = [=] { cmd_replay(*schema, *config, *reference, *events, *log); };
    });
  }

  // simulate-ab
  {
    auto* cmd = app.add_subcommand("simulate-ab",
                                   "synthetic-fleet AB experiment with a "
                                   "power-reduction strategy");
    auto devices = std::make_shared<int>(300);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto days = std::make_shared<int>(20);
    auto static_cut = std::make_shared<double>(7.0);
    auto null_strategy = std::make_shared<bool>(false);
    auto cpu_relief = std::make_shared<double>(0.35);
    auto mem_relief = std::make_shared<double>(0.25);
    auto low = std::make_shared<double>(28.67);
    auto mid = std::make_shared<double>(56.82);
    auto csv = std::make_shared<std::string>();
    cmd->add_option("--devices", *devices, "fleet size (default 300)");
    cmd->add_option("--seed", *seed, "rng seed (default 1)");
    cmd->add_option("--days", *days, "experiment duration in days (default 20)");
    cmd->add_option("--static-cut", *static_cut,
                    "static low-end cut on the model scale (default 7.0)");
    cmd->add_flag("--null-strategy", *null_strategy, "zero-effect strategy");
    cmd->add_option("--cpu-relief", *cpu_relief, "cpu relief share (default 0.35)");
    cmd->add_option("--mem-relief", *mem_relief,
                    "memory relief share (default 0.25)");
    cmd->add_option("--low-upper", *low, "low tier upper bound");
    cmd->add_option("--mid-upper", *mid, "mid tier upper bound");
    cmd->add_option("--csv", *csv, "also write the report as csv");
    cmd->callback([=, &action] {
      action = [=] {
        cmd_simulate_ab(*devices, *seed, *days, *static_cut, *null_strategy,
                        *cpu_relief, *mem_relief, *low, *mid, *csv);
      };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    action();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
