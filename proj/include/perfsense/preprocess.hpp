#pragma once

// Offline feature preparation: gap filling on per-device time series, and
// the correlation / PCA utilities used to choose indicator sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfsense/evaluate.hpp"

namespace perfsense {

struct SeriesWithGaps {
  std::vector<std::int64_t> timestamps;          // strictly ascending
  std::vector<std::optional<double>> values;     // nullopt = missing
};

/// Fills interior gaps by linear interpolation in timestamp space; leading
/// and trailing gaps take the nearest observed value. Observed values pass
/// through untouched, so the operation is idempotent.
inline SeriesWithGaps interpolate_linear(const SeriesWithGaps& s) {
  const size_t n = s.timestamps.size();
  if (s.values.size() != n)
    throw std::invalid_argument("timestamps and values differ in length");
  for (size_t i = 1; i < n; ++i)
    if (s.timestamps[i] <= s.timestamps[i - 1])
      throw std::invalid_argument("timestamps must be strictly ascending");

  std::vector<size_t> observed;
  for (size_t i = 0; i < n; ++i)
    if (s.values[i]) observed.push_back(i);
  if (observed.empty()) throw std::invalid_argument("all values missing");

  SeriesWithGaps out = s;
  // leading / trailing flat fill
  for (size_t i = 0; i < observed.front(); ++i)
    out.values[i] = *s.values[observed.front()];
  for (size_t i = observed.back() + 1; i < n; ++i)
    out.values[i] = *s.values[observed.back()];

  for (size_t k = 0; k + 1 < observed.size(); ++k) {
    size_t i0 = observed[k], i1 = observed[k + 1];
    double v0 = *s.values[i0], v1 = *s.values[i1];
    double t0 = static_cast<double>(s.timestamps[i0]);
    double t1 = static_cast<double>(s.timestamps[i1]);
    for (size_t i = i0 + 1; i < i1; ++i) {
      double t = static_cast<double>(s.timestamps[i]);
      out.values[i] = v0 + (t - t0) / (t1 - t0) * (v1 - v0);
    }
  }
  return out;
}

/// Pearson correlation matrix of the columns; symmetric, unit diagonal,
/// entries clamped into [-1,1]. A zero-variance column is an error reported
/// by name.
inline std::vector<std::vector<double>> correlation_matrix(
    const DecisionMatrix& x) {
  detail::require_min_shape(x, 2, 1);
  const size_t n = x.rows(), m = x.cols();

  std::vector<double> mean(m, 0.0), sd(m, 0.0);
  for (size_t j = 0; j < m; ++j) {
    for (size_t i = 0; i < n; ++i) mean[j] += x.at(i, j);
    mean[j] /= static_cast<double>(n);
    for (size_t i = 0; i < n; ++i) {
      double d = x.at(i, j) - mean[j];
      sd[j] += d * d;
    }
    if (sd[j] == 0.0)
      throw std::invalid_argument("zero-variance column '" + x.columns[j] + "'");
    sd[j] = std::sqrt(sd[j]);
  }

  std::vector<std::vector<double>> r(m, std::vector<double>(m, 0.0));
  for (size_t j = 0; j < m; ++j) {
    r[j][j] = 1.0;
    for (size_t k = j + 1; k < m; ++k) {
      double cov = 0.0;
      for (size_t i = 0; i < n; ++i)
        cov += (x.at(i, j) - mean[j]) * (x.at(i, k) - mean[k]);
      double v = std::clamp(cov / (sd[j] * sd[k]), -1.0, 1.0);
      r[j][k] = v;
      r[k][j] = v;
    }
  }
  return r;
}

struct PcaResult {
  std::vector<std::vector<double>> components;    // unit vectors, length m
  std::vector<double> explained_variance_ratio;   // descending, sums to ~1
  int selected_count = 0;
};

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Stops when the
/// off-diagonal Frobenius norm drops below 1e-10 or after 100 sweeps.
/// Returns eigenvalues (descending) with matching eigenvectors as rows.
inline void jacobi_eigen(std::vector<std::vector<double>> a,
                         std::vector<double>& values,
                         std::vector<std::vector<double>>& vectors) {
  const size_t m = a.size();
  vectors.assign(m, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < m; ++i) vectors[i][i] = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (size_t p = 0; p < m; ++p)
      for (size_t q = p + 1; q < m; ++q) off += a[p][q] * a[p][q];
    if (std::sqrt(off) < 1e-10) break;

    for (size_t p = 0; p + 1 < m; ++p) {
      for (size_t q = p + 1; q < m; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (size_t i = 0; i < m; ++i) {
          double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (size_t i = 0; i < m; ++i) {
          double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (size_t i = 0; i < m; ++i) {
          double vip = vectors[p][i], viq = vectors[q][i];
          vectors[p][i] = c * vip - s * viq;
          vectors[q][i] = s * vip + c * viq;
        }
      }
    }
  }

  values.resize(m);
  for (size_t i = 0; i < m; ++i) values[i] = a[i][i];

  std::vector<size_t> order(m);
  for (size_t i = 0; i < m; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t l, size_t r) { return values[l] > values[r]; });

  std::vector<double> sorted_values(m);
  std::vector<std::vector<double>> sorted_vectors(m);
  for (size_t i = 0; i < m; ++i) {
    sorted_values[i] = values[order[i]];
    sorted_vectors[i] = vectors[order[i]];
  }
  values = std::move(sorted_values);
  vectors = std::move(sorted_vectors);

  // fix signs: largest-magnitude entry positive
  for (auto& v : vectors) {
    size_t arg = 0;
    for (size_t i = 1; i < m; ++i)
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0)
      for (auto& e : v) e = -e;
  }
}

}  // namespace detail

/// PCA on the correlation matrix of the columns (indicators carry unrelated
/// units, so covariance would let scale dominate). selected_count is the
/// smallest k whose cumulative explained variance reaches variance_target.
inline PcaResult pca(const DecisionMatrix& x, double variance_target = 0.85) {
  if (!(variance_target > 0.0 && variance_target <= 1.0))
    throw std::invalid_argument("variance_target must be in (0,1]");
  const size_t n = x.rows(), m = x.cols();
  if (m < 1 || n <= m)
    throw std::invalid_argument("pca requires n > m >= 1");

  auto corr = correlation_matrix(x);  // rejects zero-variance columns

  PcaResult res;
  std::vector<double> values;
  detail::jacobi_eigen(corr, values, res.components);

  double total = 0.0;
  for (double v : values) total += std::max(v, 0.0);
  res.explained_variance_ratio.resize(m);
  for (size_t i = 0; i < m; ++i)
    res.explained_variance_ratio[i] = std::max(values[i], 0.0) / total;

  double cum = 0.0;
  res.selected_count = static_cast<int>(m);
  for (size_t i = 0; i < m; ++i) {
    cum += res.explained_variance_ratio[i];
    if (cum >= variance_target - 1e-12) {
      res.selected_count = static_cast<int>(i + 1);
      break;
    }
  }
  return res;
}

/// Column standardization to zero mean / unit sample variance, exposed for
/// the PCA reconstruction check.
inline DecisionMatrix standardize_columns(const DecisionMatrix& x) {
  detail::require_min_shape(x, 2, 1);
  const size_t n = x.rows(), m = x.cols();
  DecisionMatrix out = x;
  for (size_t j = 0; j < m; ++j) {
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) mean += x.at(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double d = x.at(i, j) - mean;
      ss += d * d;
    }
    if (ss == 0.0)
      throw std::invalid_argument("zero-variance column '" + x.columns[j] + "'");
    double sd = std::sqrt(ss / static_cast<double>(n - 1));
    for (size_t i = 0; i < n; ++i) out.at(i, j) = (x.at(i, j) - mean) / sd;
  }
  return out;
}

}  // namespace perfsense
