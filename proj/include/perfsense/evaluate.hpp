#pragma once

// TOPSIS + entropy-weight scoring core. The pipeline positivizes the raw
// decision matrix, derives objective weights from per-indicator entropy,
// normalizes columns to unit Euclidean norm, and ranks each object by its
// weighted distances to the column-wise ideal and anti-ideal targets.
//
// Weight placement: weights are applied inside the squared distance terms
// (standard weighted TOPSIS). The alternative linear aggregation over the
// contribution matrix is exposed separately as entropy_linear_score.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "perfsense/schema.hpp"

namespace perfsense {

/// n evaluation objects by m indicators, row-major, columns in schema order.
struct DecisionMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  std::vector<double> cells;

  size_t rows() const { return row_ids.size(); }
  size_t cols() const { return columns.size(); }

  double& at(size_t i, size_t j) { return cells[i * cols() + j]; }
  double at(size_t i, size_t j) const { return cells[i * cols() + j]; }

  void add_row(std::string id, const std::vector<double>& values) {
    if (values.size() != cols())
      throw std::invalid_argument("row width does not match column count");
    row_ids.push_back(std::move(id));
    cells.insert(cells.end(), values.begin(), values.end());
  }

  std::vector<double> column(size_t j) const {
    std::vector<double> out(rows());
    for (size_t i = 0; i < rows(); ++i) out[i] = at(i, j);
    return out;
  }
};

struct NormalizedMatrix {
  std::vector<std::string> row_ids;
  std::vector<std::string> columns;
  std::vector<double> cells;
  std::vector<size_t> zero_columns;  // all-zero columns left as zeros

  size_t rows() const { return row_ids.size(); }
  size_t cols() const { return columns.size(); }
  double at(size_t i, size_t j) const { return cells[i * cols() + j]; }
};

struct IdealTargets {
  std::vector<double> best;   // column-wise maxima of the normalized matrix
  std::vector<double> worst;  // column-wise minima
};

/// Entropy report per indicator: contribution matrix P (n x m, column sums 1),
/// entropy e in [0,1], variation coefficient g = 1 - e, and weights w
/// (nonnegative, summing to 1).
struct WeightVector {
  std::vector<double> w;
  std::vector<double> e;
  std::vector<double> g;
  std::vector<std::vector<double>> p;  // p[i][j]
};

struct ScoreVector {
  std::vector<std::string> row_ids;
  std::vector<double> raw;     // in [0,1]
  std::vector<double> scaled;  // 100 * raw
  std::vector<double> d_plus;
  std::vector<double> d_minus;
};

namespace detail {

inline void require_min_shape(const DecisionMatrix& x, size_t min_rows,
                              size_t min_cols) {
  if (x.rows() < min_rows || x.cols() < min_cols)
    throw std::invalid_argument(
        "decision matrix too small: need at least " + std::to_string(min_rows) +
        " rows and " + std::to_string(min_cols) + " columns");
  if (x.cells.size() != x.rows() * x.cols())
    throw std::invalid_argument("decision matrix cell count mismatch");
}

}  // namespace detail

/// Converts every column to maximal orientation:
///   minimal       x -> max(col) - x
///   intermediate  x -> 1 - |x - best| / M,  M = max|x_i - best|
///   interval(a,b) x -> 1 inside [a,b], else 1 - gap/M with
///                 M = max(a - min(col), max(col) - b)
/// A column already constant at its target (M = 0) becomes all ones.
inline DecisionMatrix positivize(const DecisionMatrix& x,
                                 const FeatureSchema& schema) {
  detail::require_min_shape(x, 1, 1);
  DecisionMatrix out = x;
  const size_t n = x.rows();

  for (size_t j = 0; j < x.cols(); ++j) {
    const IndicatorSpec& ind = schema.indicator(x.columns[j]);
    switch (ind.direction) {
      case Direction::maximal:
        break;
      case Direction::minimal: {
        double mx = x.at(0, j);
        for (size_t i = 1; i < n; ++i) mx = std::max(mx, x.at(i, j));
        for (size_t i = 0; i < n; ++i) out.at(i, j) = mx - x.at(i, j);
        break;
      }
      case Direction::intermediate: {
        double m = 0.0;
        for (size_t i = 0; i < n; ++i)
          m = std::max(m, std::abs(x.at(i, j) - ind.best));
        for (size_t i = 0; i < n; ++i)
          out.at(i, j) =
              m == 0.0 ? 1.0 : 1.0 - std::abs(x.at(i, j) - ind.best) / m;
        break;
      }
      case Direction::interval: {
        double mn = x.at(0, j), mx = x.at(0, j);
        for (size_t i = 1; i < n; ++i) {
          mn = std::min(mn, x.at(i, j));
          mx = std::max(mx, x.at(i, j));
        }
        double m = std::max(ind.a - mn, mx - ind.b);
        for (size_t i = 0; i < n; ++i) {
          double v = x.at(i, j);
          if (m <= 0.0 || (v >= ind.a && v <= ind.b))
            out.at(i, j) = 1.0;
          else if (v < ind.a)
            out.at(i, j) = 1.0 - (ind.a - v) / m;
          else
            out.at(i, j) = 1.0 - (v - ind.b) / m;
        }
        break;
      }
    }
  }
  return out;
}

/// Scales each column to unit Euclidean norm. Requires nonnegative cells
/// (positivized input); an all-zero column stays zero and is flagged.
inline NormalizedMatrix normalize(const DecisionMatrix& x_pos) {
  detail::require_min_shape(x_pos, 1, 1);
  NormalizedMatrix z;
  z.row_ids = x_pos.row_ids;
  z.columns = x_pos.columns;
  z.cells = x_pos.cells;

  const size_t n = x_pos.rows(), m = x_pos.cols();
  for (size_t j = 0; j < m; ++j) {
    double ss = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double v = x_pos.at(i, j);
      if (v < 0.0)
        throw std::invalid_argument("column '" + x_pos.columns[j] +
                                    "' has negative values; positivize first");
      ss += v * v;
    }
    if (ss == 0.0) {
      z.zero_columns.push_back(j);
      continue;
    }
    double norm = std::sqrt(ss);
    for (size_t i = 0; i < n; ++i) z.cells[i * m + j] /= norm;
  }
  return z;
}

inline IdealTargets ideal_targets(const NormalizedMatrix& z) {
  IdealTargets t;
  const size_t n = z.rows(), m = z.cols();
  t.best.resize(m);
  t.worst.resize(m);
  for (size_t j = 0; j < m; ++j) {
    double mx = z.at(0, j), mn = z.at(0, j);
    for (size_t i = 1; i < n; ++i) {
      mx = std::max(mx, z.at(i, j));
      mn = std::min(mn, z.at(i, j));
    }
    t.best[j] = mx;
    t.worst[j] = mn;
  }
  return t;
}

/// Entropy weights computed on the positivized matrix. Columns are min-max
/// standardized to [0,100]; contributions p_ij are column shares with the
/// 0*ln(0) = 0 convention; e_j = -sum(p ln p) / ln(n); g_j = 1 - e_j;
/// w = g / sum(g). A constant column gets a uniform contribution column,
/// entropy exactly 1 and weight 0. If every column is constant the weights
/// fall back to uniform.
inline WeightVector entropy_weights(const DecisionMatrix& x_pos) {
  detail::require_min_shape(x_pos, 2, 1);
  const size_t n = x_pos.rows(), m = x_pos.cols();

  WeightVector wv;
  wv.e.assign(m, 0.0);
  wv.g.assign(m, 0.0);
  wv.w.assign(m, 0.0);
  wv.p.assign(n, std::vector<double>(m, 0.0));

  const double k = 1.0 / std::log(static_cast<double>(n));

  for (size_t j = 0; j < m; ++j) {
    double mn = x_pos.at(0, j), mx = x_pos.at(0, j);
    for (size_t i = 1; i < n; ++i) {
      mn = std::min(mn, x_pos.at(i, j));
      mx = std::max(mx, x_pos.at(i, j));
    }

    if (mx == mn) {
      for (size_t i = 0; i < n; ++i) wv.p[i][j] = 1.0 / static_cast<double>(n);
      wv.e[j] = 1.0;
      wv.g[j] = 0.0;
      continue;
    }

    double sum = 0.0;
    std::vector<double> std_col(n);
    for (size_t i = 0; i < n; ++i) {
      std_col[i] = (x_pos.at(i, j) - mn) / (mx - mn) * 100.0;
      sum += std_col[i];
    }

    double h = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double p = std_col[i] / sum;
      wv.p[i][j] = p;
      if (p > 0.0) h += p * std::log(p);
    }
    wv.e[j] = std::clamp(-k * h, 0.0, 1.0);
    wv.g[j] = 1.0 - wv.e[j];
  }

  double gsum = 0.0;
  for (double g : wv.g) gsum += g;
  if (gsum == 0.0) {
    for (size_t j = 0; j < m; ++j) wv.w[j] = 1.0 / static_cast<double>(m);
  } else {
    for (size_t j = 0; j < m; ++j) wv.w[j] = wv.g[j] / gsum;
  }
  return wv;
}

/// Weighted distances to the ideal / anti-ideal targets and the relative
/// closeness score S = D- / (D+ + D-). Objects in a fully degenerate matrix
/// (D+ = D- = 0) score 0.5.
inline ScoreVector topsis_scores(const NormalizedMatrix& z,
                                 const IdealTargets& targets,
                                 const WeightVector& weights) {
  const size_t n = z.rows(), m = z.cols();
  if (targets.best.size() != m || targets.worst.size() != m ||
      weights.w.size() != m)
    throw std::invalid_argument("targets/weights dimension mismatch");

  ScoreVector s;
  s.row_ids = z.row_ids;
  s.raw.resize(n);
  s.scaled.resize(n);
  s.d_plus.resize(n);
  s.d_minus.resize(n);

  for (size_t i = 0; i < n; ++i) {
    double dp = 0.0, dm = 0.0;
    for (size_t j = 0; j < m; ++j) {
      double zij = z.at(i, j);
      double bp = targets.best[j] - zij;
      double bm = targets.worst[j] - zij;
      dp += weights.w[j] * bp * bp;
      dm += weights.w[j] * bm * bm;
    }
    s.d_plus[i] = std::sqrt(dp);
    s.d_minus[i] = std::sqrt(dm);
    double denom = s.d_plus[i] + s.d_minus[i];
    s.raw[i] = denom > 0.0 ? s.d_minus[i] / denom : 0.5;
    s.scaled[i] = 100.0 * s.raw[i];
  }
  return s;
}

/// Diagnostic linear aggregation s_i = sum_j w_j * p_ij over the entropy
/// contribution matrix. Same length-n shape as topsis_scores' raw output.
inline std::vector<double> entropy_linear_score(const DecisionMatrix& x_pos) {
  WeightVector wv = entropy_weights(x_pos);
  const size_t n = x_pos.rows(), m = x_pos.cols();
  std::vector<double> s(n, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < m; ++j) s[i] += wv.w[j] * wv.p[i][j];
  return s;
}

/// Full single-level pipeline: positivize -> entropy weights -> normalize ->
/// ideal targets -> weighted TOPSIS. Scaled scores lie in [0,100].
inline ScoreVector evaluate_snapshot(const DecisionMatrix& x,
                                     const FeatureSchema& schema) {
  detail::require_min_shape(x, 2, 1);
  DecisionMatrix x_pos = positivize(x, schema);
  WeightVector wv = entropy_weights(x_pos);
  NormalizedMatrix z = normalize(x_pos);
  IdealTargets targets = ideal_targets(z);
  return topsis_scores(z, targets, wv);
}

/// Two-stage hierarchical evaluation: stage one scores each category's
/// columns independently; stage two treats the per-category scaled scores as
/// a fresh all-maximal matrix and scores it the same way. With a single
/// category the hierarchy collapses to evaluate_snapshot.
inline ScoreVector evaluate_multilevel(const DecisionMatrix& x,
                                       const FeatureSchema& schema) {
  detail::require_min_shape(x, 2, 1);

  std::vector<std::string> categories;
  for (const auto& c : schema.categories()) {
    bool present = false;
    for (const auto& col : x.columns)
      present |= (schema.indicator(col).category == c);
    if (present) categories.push_back(c);
  }
  // Categories listed in the schema but absent from this matrix would make
  // the hierarchy silently lossy, so they are rejected when the matrix is
  // schema-wide; a sub-matrix covering fewer categories is fine.
  if (categories.empty())
    throw std::invalid_argument("matrix covers no schema category");
  if (x.cols() == schema.size() && categories.size() != schema.categories().size())
    throw std::invalid_argument("category with zero columns in matrix");

  if (categories.size() == 1) return evaluate_snapshot(x, schema);

  const size_t n = x.rows();
  DecisionMatrix stage2;
  stage2.row_ids = x.row_ids;
  stage2.columns = categories;
  stage2.cells.assign(n * categories.size(), 0.0);

  for (size_t k = 0; k < categories.size(); ++k) {
    DecisionMatrix sub;
    sub.row_ids = x.row_ids;
    for (size_t j = 0; j < x.cols(); ++j)
      if (schema.indicator(x.columns[j]).category == categories[k])
        sub.columns.push_back(x.columns[j]);
    sub.cells.resize(n * sub.columns.size());
    size_t jj = 0;
    for (size_t j = 0; j < x.cols(); ++j) {
      if (schema.indicator(x.columns[j]).category != categories[k]) continue;
      for (size_t i = 0; i < n; ++i) sub.cells[i * sub.columns.size() + jj] = x.at(i, j);
      ++jj;
    }
    ScoreVector cat = evaluate_snapshot(sub, schema);
    for (size_t i = 0; i < n; ++i) stage2.at(i, k) = cat.scaled[i];
  }

  // Stage two: category scores are maximal by construction, so positivize
  // is the identity and is skipped.
  WeightVector wv = entropy_weights(stage2);
  NormalizedMatrix z = normalize(stage2);
  IdealTargets targets = ideal_targets(z);
  return topsis_scores(z, targets, wv);
}

}  // namespace perfsense
