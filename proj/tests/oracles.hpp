#pragma once

// Test-side reference implementations, written independently of the library
// code paths they check: a straight-line long-double transcription of the
// scoring pipeline, a classical (largest-pivot) Jacobi eigensolver, and a
// direct weighted-moving-average composition.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "perfsense/schema.hpp"

namespace oracle {

// Scoring pipeline -----------------------------------------------------------

struct Matrix {
  std::size_t n = 0, m = 0;
  std::vector<long double> cells;  // row-major
  long double& at(std::size_t i, std::size_t j) { return cells[i * m + j]; }
  long double at(std::size_t i, std::size_t j) const { return cells[i * m + j]; }
};

inline Matrix positivize(const Matrix& x,
                         const std::vector<perfsense::IndicatorSpec>& specs) {
  Matrix out = x;
  for (std::size_t j = 0; j < x.m; ++j) {
    const auto& spec = specs[j];
    if (spec.direction == perfsense::Direction::maximal) continue;
    if (spec.direction == perfsense::Direction::minimal) {
      long double mx = x.at(0, j);
      for (std::size_t i = 1; i < x.n; ++i)
        if (x.at(i, j) > mx) mx = x.at(i, j);
      for (std::size_t i = 0; i < x.n; ++i) out.at(i, j) = mx - x.at(i, j);
    } else if (spec.direction == perfsense::Direction::intermediate) {
      long double big = 0;
      for (std::size_t i = 0; i < x.n; ++i) {
        long double gap = fabsl(x.at(i, j) - (long double)spec.best);
        if (gap > big) big = gap;
      }
      for (std::size_t i = 0; i < x.n; ++i)
        out.at(i, j) = big == 0 ? 1.0L
                                : 1.0L - fabsl(x.at(i, j) - (long double)spec.best) / big;
    } else {  // interval
      long double mn = x.at(0, j), mx = x.at(0, j);
      for (std::size_t i = 1; i < x.n; ++i) {
        if (x.at(i, j) < mn) mn = x.at(i, j);
        if (x.at(i, j) > mx) mx = x.at(i, j);
      }
      long double big = (long double)spec.a - mn;
      if (mx - (long double)spec.b > big) big = mx - (long double)spec.b;
      for (std::size_t i = 0; i < x.n; ++i) {
        long double v = x.at(i, j);
        if (big <= 0 || (v >= (long double)spec.a && v <= (long double)spec.b))
          out.at(i, j) = 1.0L;
        else if (v < (long double)spec.a)
          out.at(i, j) = 1.0L - ((long double)spec.a - v) / big;
        else
          out.at(i, j) = 1.0L - (v - (long double)spec.b) / big;
      }
    }
  }
  return out;
}

inline std::vector<long double> entropy_weights(const Matrix& pos) {
  const std::size_t n = pos.n, m = pos.m;
  std::vector<long double> g(m, 0.0L);
  for (std::size_t j = 0; j < m; ++j) {
    long double mn = pos.at(0, j), mx = pos.at(0, j);
    for (std::size_t i = 1; i < n; ++i) {
      if (pos.at(i, j) < mn) mn = pos.at(i, j);
      if (pos.at(i, j) > mx) mx = pos.at(i, j);
    }
    if (mx == mn) { g[j] = 0.0L; continue; }
    long double sum = 0;
    std::vector<long double> std_col(n);
    for (std::size_t i = 0; i < n; ++i) {
      std_col[i] = (pos.at(i, j) - mn) / (mx - mn) * 100.0L;
      sum += std_col[i];
    }
    long double h = 0;
    for (std::size_t i = 0; i < n; ++i) {
      long double p = std_col[i] / sum;
      if (p > 0) h += p * logl(p);
    }
    long double e = -h / logl((long double)n);
    g[j] = 1.0L - e;
  }
  long double gsum = 0;
  for (auto v : g) gsum += v;
  std::vector<long double> w(m);
  for (std::size_t j = 0; j < m; ++j)
    w[j] = gsum == 0 ? 1.0L / (long double)m : g[j] / gsum;
  return w;
}

/// Full single-level pipeline, re-derived step by step.
inline std::vector<long double> evaluate_snapshot(
    const Matrix& x, const std::vector<perfsense::IndicatorSpec>& specs) {
  Matrix pos = positivize(x, specs);
  std::vector<long double> w = entropy_weights(pos);

  Matrix z = pos;
  for (std::size_t j = 0; j < pos.m; ++j) {
    long double ss = 0;
    for (std::size_t i = 0; i < pos.n; ++i) ss += pos.at(i, j) * pos.at(i, j);
    if (ss == 0) continue;
    long double norm = sqrtl(ss);
    for (std::size_t i = 0; i < pos.n; ++i) z.at(i, j) = pos.at(i, j) / norm;
  }

  std::vector<long double> zplus(z.m), zminus(z.m);
  for (std::size_t j = 0; j < z.m; ++j) {
    long double mx = z.at(0, j), mn = z.at(0, j);
    for (std::size_t i = 1; i < z.n; ++i) {
      if (z.at(i, j) > mx) mx = z.at(i, j);
      if (z.at(i, j) < mn) mn = z.at(i, j);
    }
    zplus[j] = mx;
    zminus[j] = mn;
  }

  std::vector<long double> s(z.n);
  for (std::size_t i = 0; i < z.n; ++i) {
    long double dp = 0, dm = 0;
    for (std::size_t j = 0; j < z.m; ++j) {
      dp += w[j] * (zplus[j] - z.at(i, j)) * (zplus[j] - z.at(i, j));
      dm += w[j] * (zminus[j] - z.at(i, j)) * (zminus[j] - z.at(i, j));
    }
    long double dps = sqrtl(dp), dms = sqrtl(dm);
    s[i] = (dps + dms) > 0 ? dms / (dps + dms) : 0.5L;
  }
  return s;
}

// Classical Jacobi (largest off-diagonal pivot) -------------------------------

inline void jacobi_classical(std::vector<std::vector<double>> a,
                             std::vector<double>& values,
                             std::vector<std::vector<double>>& vectors) {
  const std::size_t m = a.size();
  vectors.assign(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i) vectors[i][i] = 1.0;

  for (int iter = 0; iter < 10000; ++iter) {
    std::size_t p = 0, q = 1;
    double big = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j)
        if (std::fabs(a[i][j]) > big) {
          big = std::fabs(a[i][j]);
          p = i;
          q = j;
        }
    if (big < 1e-13) break;

    double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
    double t = (theta >= 0 ? 1.0 : -1.0) /
               (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
    double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;

    for (std::size_t i = 0; i < m; ++i) {
      double aip = a[i][p], aiq = a[i][q];
      a[i][p] = c * aip - s * aiq;
      a[i][q] = s * aip + c * aiq;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double api = a[p][i], aqi = a[q][i];
      a[p][i] = c * api - s * aqi;
      a[q][i] = s * api + c * aqi;
    }
    for (std::size_t i = 0; i < m; ++i) {
      double vpi = vectors[p][i], vqi = vectors[q][i];
      vectors[p][i] = c * vpi - s * vqi;
      vectors[q][i] = s * vpi + c * vqi;
    }
  }

  values.resize(m);
  for (std::size_t i = 0; i < m; ++i) values[i] = a[i][i];
}

// Weighted moving averages, direct summation -----------------------------------

inline std::vector<double> wma_direct(const std::vector<double>& x, int lookback) {
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    std::size_t k = std::min<std::size_t>(t + 1, (std::size_t)lookback);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      num += double(k - i) * x[t - i];
      den += double(k - i);
    }
    out[t] = num / den;
  }
  return out;
}

/// Shared noisy-ramp fixture: rising, falling, and rising legs so the
/// cross-correlation lag metric has turning points to lock onto.
inline std::vector<double> noisy_ramp_fixture(std::size_t n, unsigned seed,
                                              double sigma = 2.0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    double x = static_cast<double>(t);
    double base;
    if (x < 75)
      base = 20.0 + 60.0 * x / 75.0;
    else if (x < 112)
      base = 80.0 - 40.0 * (x - 75.0) / 37.0;
    else
      base = 40.0 + 30.0 * (x - 112.0) / 38.0;
    out[t] = base + noise(rng);
  }
  return out;
}

/// HMA as the literal three-WMA composition.
inline std::vector<double> hma_composed(const std::vector<double>& x, int lookback) {
  int half = lookback / 2;
  if (half < 1) half = 1;
  int root = (int)std::llround(std::sqrt((double)lookback));
  if (root < 1) root = 1;
  auto a = wma_direct(x, half);
  auto b = wma_direct(x, lookback);
  std::vector<double> raw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) raw[i] = 2.0 * a[i] - b[i];
  return wma_direct(raw, root);
}

}  // namespace oracle
