#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "perfsense/forecast.hpp"

using namespace perfsense;
using Catch::Approx;

namespace {

std::vector<double> white_noise(size_t n, unsigned seed, double sigma = 1.0,
                                double mean = 0.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(mean, sigma);
  std::vector<double> out(n);
  for (auto& v : out) v = g(rng);
  return out;
}

std::vector<double> ar_series(size_t n, const std::vector<double>& phi,
                              unsigned seed, double mean = 0.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> out(n, mean);
  for (size_t t = 0; t < n; ++t) {
    double v = mean;
    for (size_t i = 1; i <= phi.size() && i <= t; ++i)
      v += phi[i - 1] * (out[t - i] - mean);
    out[t] = v + g(rng);
  }
  return out;
}

// x_t = mu + e_t - theta e_{t-1} (the sign convention used throughout)
std::vector<double> ma1_series(size_t n, double theta, unsigned seed,
                               double mean = 0.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> out(n);
  double prev_e = 0.0;
  for (size_t t = 0; t < n; ++t) {
    double e = g(rng);
    out[t] = mean + e - theta * prev_e;
    prev_e = e;
  }
  return out;
}

}  // namespace

TEST_CASE("difference") {
  CHECK(difference({1, 3, 6, 10}, 1) == std::vector<double>{2, 3, 4});
  CHECK(difference({1, 3, 6, 10}, 2) == std::vector<double>{1, 1});
  CHECK(difference({4, 2, 9}, 0) == std::vector<double>{4, 2, 9});
  CHECK_THROWS_AS(difference({1, 2}, 2), std::invalid_argument);

  SECTION("round trip with stored initials is exact on a dyadic grid") {
    std::mt19937 rng(12);
    std::uniform_int_distribution<int> step(-512, 512);
    std::vector<double> s(200);
    double acc = 4096.0;
    for (auto& v : s) {
      acc += static_cast<double>(step(rng)) / 1024.0;
      v = acc;
    }
    for (int d : {0, 1, 2}) {
      auto diffed = difference_with_initials(s, d);
      auto back = undifference(diffed);
      REQUIRE(back.size() == s.size());
      for (size_t i = 0; i < s.size(); ++i) CHECK(back[i] == s[i]);
    }
  }
}

TEST_CASE("select_d") {
  SECTION("white noise needs no differencing") {
    CHECK(select_d(white_noise(200, 31)) == 0);
  }
  SECTION("random walk needs one difference") {
    auto noise = white_noise(200, 32);
    std::vector<double> walk(noise.size());
    double acc = 0.0;
    for (size_t i = 0; i < noise.size(); ++i) {
      acc += noise[i];
      walk[i] = acc;
    }
    CHECK(select_d(walk) == 1);
  }
  SECTION("linear ramp plus noise needs one difference") {
    auto noise = white_noise(200, 33);
    std::vector<double> ramp(noise.size());
    for (size_t i = 0; i < ramp.size(); ++i)
      ramp[i] = 0.5 * static_cast<double>(i) + noise[i];
    CHECK(select_d(ramp) == 1);
  }
  SECTION("short series rejected") {
    CHECK_THROWS_WITH(select_d(white_noise(19, 3)),
                      Catch::Matchers::ContainsSubstring("too short"));
  }
}

TEST_CASE("fit_ar") {
  SECTION("p = 0 reduces to mean and variance") {
    std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    auto fit = fit_ar(s, 0);
    CHECK(fit.mean == Approx(5.5));
    CHECK(fit.intercept == Approx(5.5));
    double var = 0.0;
    for (double v : s) var += (v - 5.5) * (v - 5.5);
    var /= 10.0;
    CHECK(fit.sigma2 == Approx(var));
  }
  SECTION("AR(1) phi = 0.7 recovered") {
    auto s = ar_series(500, {0.7}, 41);
    auto fit = fit_ar(s, 1);
    REQUIRE(fit.phi.size() == 1);
    CHECK(fit.phi[0] > 0.6);
    CHECK(fit.phi[0] < 0.8);
  }
  SECTION("AR(2) coefficients recovered within 0.08") {
    auto s = ar_series(2000, {0.5, -0.3}, 42);
    auto fit = fit_ar(s, 2);
    CHECK(fit.phi[0] == Approx(0.5).margin(0.08));
    CHECK(fit.phi[1] == Approx(-0.3).margin(0.08));
  }
  SECTION("series too short rejected") {
    CHECK_THROWS_AS(fit_ar(white_noise(15, 1), 2), std::invalid_argument);
  }
}

TEST_CASE("fit_ma") {
  SECTION("q = 0 is the mean-only model") {
    auto fit = fit_ma(white_noise(100, 5, 1.0, 3.0), 0);
    CHECK(fit.theta.empty());
    CHECK(fit.mean == Approx(3.0).margin(0.5));
  }
  SECTION("MA(1) theta = 0.6 recovered within 0.1") {
    auto s = ma1_series(2000, 0.6, 43);
    auto fit = fit_ma(s, 1);
    REQUIRE(fit.theta.size() == 1);
    CHECK(fit.theta[0] == Approx(0.6).margin(0.1));
  }
  SECTION("MA(1) on white noise stays near zero") {
    auto fit = fit_ma(white_noise(2000, 44), 1);
    CHECK(fit.theta[0] == Approx(0.0).margin(0.1));
  }
}

TEST_CASE("fit_arima") {
  SECTION("(0,0,0) on white noise is mean plus variance") {
    auto s = white_noise(300, 50, 2.0, 10.0);
    auto m = fit_arima(s, {0, 0, 0});
    CHECK(m.mean == Approx(detail::mean_of(s)).margin(1e-6));
    CHECK(m.sigma2 == Approx(detail::variance_of(s)).margin(1e-6));
    CHECK(m.phi.empty());
    CHECK(m.theta.empty());
  }
  SECTION("(1,0,0) agrees with fit_ar on an AR(1) fixture") {
    auto s = ar_series(500, {0.7}, 41);
    auto m = fit_arima(s, {1, 0, 0});
    auto yw = fit_ar(s, 1);
    // CSS refines the Yule-Walker point, so agreement is loose but close
    CHECK(m.phi[0] == Approx(yw.phi[0]).margin(0.05));
    CHECK(m.phi[0] == Approx(0.7).margin(0.1));
  }
  SECTION("(1,1,1) on an integrated ARMA fixture has near-zero residual mean") {
    std::mt19937 rng(45);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> arma(600);
    double prev = 0.0, prev_e = 0.0;
    for (auto& v : arma) {
      double e = g(rng);
      v = 0.5 * prev + e - 0.4 * prev_e;
      prev = v;
      prev_e = e;
    }
    std::vector<double> integrated(arma.size());
    double acc = 50.0;
    for (size_t i = 0; i < arma.size(); ++i) {
      acc += arma[i];
      integrated[i] = acc;
    }
    auto m = fit_arima(integrated, {1, 1, 1});
    double rmean = detail::mean_of(m.residuals);
    CHECK(std::abs(rmean) < 0.05);
  }
  SECTION("residuals recompute exactly from series and coefficients") {
    auto s = ar_series(300, {0.6}, 46, 20.0);
    auto m = fit_arima(s, {1, 0, 1});
    auto again = arima_residuals(m, s);
    REQUIRE(again.size() == m.residuals.size());
    for (size_t i = 0; i < again.size(); ++i)
      CHECK(again[i] == Approx(m.residuals[i]).margin(1e-9));
  }
  SECTION("information criteria match a literal recomputation") {
    auto s = ar_series(300, {0.5}, 47);
    auto m = fit_arima(s, {1, 0, 0});
    double n = static_cast<double>(s.size());
    double k = 2.0;  // p + q + 1
    CHECK(m.aic == Approx(n * std::log(m.sigma2) + 2 * k).margin(1e-9));
    CHECK(m.aicc == Approx(m.aic + 2 * k * (k + 1) / (n - k - 1)).margin(1e-9));
    CHECK(m.bic == Approx(n * std::log(m.sigma2) + k * std::log(n)).margin(1e-9));
    CHECK(m.bic > m.aic);  // ln(300) > 2
  }
}

TEST_CASE("auto_order") {
  SECTION("shorter than 50 rejected") {
    CHECK_THROWS_WITH(auto_order(white_noise(40, 2)),
                      Catch::Matchers::ContainsSubstring("shorter than 50"));
  }
  SECTION("white noise selects p = q = 0 in most seeded runs") {
    int hits = 0;
    for (unsigned seed = 100; seed < 106; ++seed) {
      auto m = auto_order(white_noise(400, seed), OrderBounds{2, 2, 2},
                          Criterion::bic);
      if (m.order.p == 0 && m.order.q == 0) ++hits;
    }
    CHECK(hits >= 4);
  }
  SECTION("AR(2) fixture selected by BIC in at least 8 of 10 seeded runs") {
    int hits = 0;
    for (unsigned seed = 1; seed <= 10; ++seed) {
      auto s = ar_series(1000, {0.5, -0.3}, seed);
      auto m = auto_order(s, OrderBounds{3, 2, 3}, Criterion::bic);
      if (m.order.p == 2 && m.order.d == 0 && m.order.q == 0) ++hits;
    }
    CHECK(hits >= 8);
  }
}

TEST_CASE("forecast") {
  SECTION("(0,0,0) model forecasts the mean") {
    auto s = white_noise(100, 60, 1.0, 30.0);
    auto m = fit_arima(s, {0, 0, 0});
    auto fc = forecast(m, s, 5);
    for (double p : fc.point) CHECK(p == Approx(m.mean).margin(1e-9));
  }
  SECTION("(0,1,0) random walk forecasts flat at the last value") {
    auto noise = white_noise(120, 61);
    std::vector<double> walk(noise.size());
    double acc = 50.0;
    for (size_t i = 0; i < noise.size(); ++i) {
      acc += 0.3 * noise[i];
      walk[i] = acc;
    }
    auto m = fit_arima(walk, {0, 1, 0});
    auto fc = forecast(m, walk, 8);
    for (double p : fc.point) CHECK(p == walk.back());
  }
  SECTION("(1,0,0) deviations decay geometrically") {
    ArimaModel m;
    m.order = {1, 0, 0};
    m.phi = {0.5};
    m.mean = 50.0;
    m.sigma2 = 1.0;
    std::vector<double> history{50.0, 50.0, 58.0};
    auto fc = forecast(m, history, 3);
    CHECK(fc.point[0] == Approx(54.0));
    CHECK(fc.point[1] == Approx(52.0));
    CHECK(fc.point[2] == Approx(51.0));
  }
  SECTION("variance is non-decreasing and intervals bracket the point") {
    auto s = ar_series(200, {0.6}, 62, 40.0);
    auto m = fit_arima(s, {1, 0, 0});
    auto fc = forecast(m, s, 10);
    for (size_t k = 0; k < fc.variance.size(); ++k) {
      if (k > 0) CHECK(fc.variance[k] >= fc.variance[k - 1] - 1e-12);
      CHECK(fc.interval_80[k].first <= fc.point[k]);
      CHECK(fc.interval_80[k].second >= fc.point[k]);
    }
  }
  SECTION("outputs clamp to the score domain") {
    ArimaModel m;
    m.order = {0, 0, 0};
    m.mean = 99.5;
    m.sigma2 = 25.0;
    std::vector<double> history(30, 99.5);
    auto fc = forecast(m, history, 3);
    for (size_t k = 0; k < 3; ++k) {
      CHECK(fc.point[k] <= 100.0);
      CHECK(fc.interval_80[k].second <= 100.0);
      CHECK(fc.interval_80[k].first >= 0.0);
    }
  }
  SECTION("horizon limits") {
    std::vector<double> s(30, 1.0);
    ArimaModel m;
    m.order = {0, 0, 0};
    m.mean = 1.0;
    CHECK_THROWS_AS(forecast(m, s, 0), std::invalid_argument);
    CHECK_THROWS_AS(forecast(m, s, 301), std::invalid_argument);
  }
  SECTION("stationarity guard rejects explosive AR parts") {
    std::vector<double> coeffs{1.5};
    CHECK_FALSE(detail::roots_outside_unit_circle(coeffs));
    CHECK(detail::roots_outside_unit_circle({0.5}));
    CHECK(detail::roots_outside_unit_circle({0.5, -0.3}));
    CHECK_FALSE(detail::roots_outside_unit_circle({0.5, 0.6}));
  }
}
