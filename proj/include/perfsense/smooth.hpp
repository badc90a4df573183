#pragma once

// Moving-average toolkit over score series. All smoothers emit one output
// per input point (warm-up uses the truncated prefix), preserve timestamps,
// and map constant series to the same constant.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfsense {

struct ScorePoint {
  std::int64_t ts_ms = 0;
  double score = 0.0;
};

struct ScoreSeries {
  std::string device_id;
  std::vector<ScorePoint> points;  // timestamps strictly ascending

  std::vector<double> values() const {
    std::vector<double> out(points.size());
    for (size_t i = 0; i < points.size(); ++i) out[i] = points[i].score;
    return out;
  }

  /// Ingest-time validation: ascending timestamps, scores within [0,100].
  /// Smoothed outputs are not re-validated (HMA may overshoot the range).
  void check() const {
    for (size_t i = 0; i < points.size(); ++i) {
      if (i > 0 && points[i].ts_ms <= points[i - 1].ts_ms)
        throw std::invalid_argument("score series timestamps must be strictly ascending");
      if (!(points[i].score >= 0.0 && points[i].score <= 100.0))
        throw std::invalid_argument("score outside [0,100]");
    }
  }
};

struct SmoothParams {
  int lookback = 9;
};

namespace detail {

inline void require_lookback(int lookback) {
  if (lookback < 1) throw std::invalid_argument("lookback must be >= 1");
}

inline ScoreSeries with_values(const ScoreSeries& s, const std::vector<double>& v) {
  ScoreSeries out = s;
  for (size_t i = 0; i < v.size(); ++i) out.points[i].score = v[i];
  return out;
}

}  // namespace detail

/// Simple moving average: mean of the last min(t+1, lookback) values.
inline std::vector<double> sma_values(const std::vector<double>& x, int lookback) {
  detail::require_lookback(lookback);
  std::vector<double> out(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    size_t k = std::min<size_t>(t + 1, static_cast<size_t>(lookback));
    double sum = 0.0;
    for (size_t i = 0; i < k; ++i) sum += x[t - i];
    out[t] = sum / static_cast<double>(k);
  }
  return out;
}

/// Weighted moving average with ramp weights 1..k (newest sample gets the
/// largest weight); the window truncates to the available prefix during
/// warm-up, with divisor k(k+1)/2 for the k values actually present.
inline std::vector<double> wma_values(const std::vector<double>& x, int lookback) {
  detail::require_lookback(lookback);
  std::vector<double> out(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    size_t k = std::min<size_t>(t + 1, static_cast<size_t>(lookback));
    double num = 0.0;
    for (size_t i = 0; i < k; ++i)
      num += static_cast<double>(k - i) * x[t - i];
    out[t] = num / (static_cast<double>(k) * (static_cast<double>(k) + 1.0) / 2.0);
  }
  return out;
}

/// Warm-up-corrected weighted moving average: the newest sample always
/// carries weight `lookback` (the full-window ramp anchored at the present),
/// and the divisor is the sum of the weights actually used. Identical to
/// wma once the window is full; differs only during warm-up, where it keeps
/// the full-window weight profile instead of shrinking the ramp.
inline std::vector<double> wma_corrected_values(const std::vector<double>& x,
                                                int lookback) {
  detail::require_lookback(lookback);
  std::vector<double> out(x.size());
  for (size_t t = 0; t < x.size(); ++t) {
    size_t k = std::min<size_t>(t + 1, static_cast<size_t>(lookback));
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < k; ++i) {
      double w = static_cast<double>(lookback) - static_cast<double>(i);
      num += w * x[t - i];
      den += w;
    }
    out[t] = num / den;
  }
  return out;
}

/// Hull moving average: WMA(round(sqrt(n))) applied to
/// 2*WMA(floor(n/2)) - WMA(n). Window sizes are clamped to >= 1, so
/// lookback 1 is the identity.
inline std::vector<double> hma_values(const std::vector<double>& x, int lookback) {
  detail::require_lookback(lookback);
  int half = std::max(1, lookback / 2);
  int root = std::max(1, static_cast<int>(std::llround(std::sqrt(
                             static_cast<double>(lookback)))));

  std::vector<double> full = wma_values(x, lookback);
  std::vector<double> halfwin = wma_values(x, half);
  std::vector<double> raw(x.size());
  for (size_t t = 0; t < x.size(); ++t) raw[t] = 2.0 * halfwin[t] - full[t];
  return wma_values(raw, root);
}

inline ScoreSeries sma(const ScoreSeries& s, SmoothParams p) {
  return detail::with_values(s, sma_values(s.values(), p.lookback));
}
inline ScoreSeries wma(const ScoreSeries& s, SmoothParams p) {
  return detail::with_values(s, wma_values(s.values(), p.lookback));
}
inline ScoreSeries wma_corrected(const ScoreSeries& s, SmoothParams p) {
  return detail::with_values(s, wma_corrected_values(s.values(), p.lookback));
}
inline ScoreSeries hma(const ScoreSeries& s, SmoothParams p) {
  return detail::with_values(s, hma_values(s.values(), p.lookback));
}

struct LagSmoothness {
  double lag = 0.0;        // best alignment shift, in samples
  double roughness = 0.0;  // stddev of first differences of the smoothed series
};

namespace detail {

inline double pearson(const std::vector<double>& x, size_t xo,
                      const std::vector<double>& y, size_t yo, size_t len) {
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < len; ++i) {
    mx += x[xo + i];
    my += y[yo + i];
  }
  mx /= static_cast<double>(len);
  my /= static_cast<double>(len);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < len; ++i) {
    double dx = x[xo + i] - mx, dy = y[yo + i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return -2.0;  // degenerate, never the argmax
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace detail

/// lag: the shift k in [0, N/4] maximizing the correlation between the
/// original series and the smoothed series delayed by k (a smoother that
/// trails the signal by 3 samples reports lag 3). roughness: stddev of the
/// smoothed series' first differences.
inline LagSmoothness lag_and_smoothness(const std::vector<double>& original,
                                        const std::vector<double>& smoothed) {
  const size_t n = original.size();
  if (smoothed.size() != n)
    throw std::invalid_argument("series lengths differ");
  if (n < 8) throw std::invalid_argument("need at least 8 points");

  size_t max_shift = n / 4;
  size_t best_k = 0;
  double best_r = -3.0;
  for (size_t k = 0; k <= max_shift; ++k) {
    double r = detail::pearson(original, 0, smoothed, k, n - k);
    if (r > best_r) {
      best_r = r;
      best_k = k;
    }
  }

  double mean_diff = 0.0;
  for (size_t i = 1; i < n; ++i) mean_diff += smoothed[i] - smoothed[i - 1];
  mean_diff /= static_cast<double>(n - 1);
  double ss = 0.0;
  for (size_t i = 1; i < n; ++i) {
    double d = (smoothed[i] - smoothed[i - 1]) - mean_diff;
    ss += d * d;
  }

  LagSmoothness out;
  out.lag = static_cast<double>(best_k);
  out.roughness = std::sqrt(ss / static_cast<double>(n - 1));
  return out;
}

inline LagSmoothness lag_and_smoothness(const ScoreSeries& original,
                                        const ScoreSeries& smoothed) {
  return lag_and_smoothness(original.values(), smoothed.values());
}

}  // namespace perfsense
