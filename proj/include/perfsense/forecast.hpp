#pragma once

// ARIMA(p,d,q) modeling of score series: differencing to stationarity,
// Yule-Walker AR estimation, conditional-sum-of-squares ARMA fitting with a
// deterministic coordinate search, information-criterion order selection,
// and h-step forecasts with psi-weight variance expansion.
//
// Conventions, pinned here because they vary across texts:
//   AR:  x_t = c + sum phi_i x_{t-i} + eps_t
//   MA:  x_t = mu + eps_t - theta_1 eps_{t-1} - ... - theta_q eps_{t-q}
//   The mean term is fitted only when d = 0; a differenced series is
//   modeled as zero-mean (so a plain random walk forecasts flat).
//   sigma2 = CSS / (usable length - p); information criteria use
//   n = differenced length and k = p + q + 1.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace perfsense {

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
};

struct OrderBounds {
  int p_max = 5;
  int d_max = 2;
  int q_max = 5;
};

enum class Criterion { aic, aicc, bic };

struct ArimaModel {
  ArimaOrder order;
  std::vector<double> phi;    // AR coefficients
  std::vector<double> theta;  // MA coefficients
  double intercept = 0.0;     // c = mean * (1 - sum phi)
  double mean = 0.0;          // mean of the differenced series (0 when d > 0)
  double sigma2 = 0.0;
  std::vector<double> residuals;  // length = differenced length - p
  double aic = 0.0;
  double aicc = 0.0;
  double bic = 0.0;
};

struct Forecast {
  int horizon = 0;
  std::vector<double> point;
  std::vector<std::pair<double, double>> interval_80;
  std::vector<double> variance;  // psi-weight forecast variance, pre-clamp
};

// Differencing -------------------------------------------------------------

inline std::vector<double> difference(const std::vector<double>& s, int d) {
  if (d < 0) throw std::invalid_argument("differencing order must be >= 0");
  if (static_cast<int>(s.size()) <= d)
    throw std::invalid_argument("series too short to difference " +
                                std::to_string(d) + " times");
  std::vector<double> cur = s;
  for (int r = 0; r < d; ++r) {
    std::vector<double> next(cur.size() - 1);
    for (size_t i = 0; i + 1 < cur.size(); ++i) next[i] = cur[i + 1] - cur[i];
    cur = std::move(next);
  }
  return cur;
}

struct Differenced {
  std::vector<double> values;
  std::vector<double> initials;  // first value of each intermediate level
  int d = 0;
};

inline Differenced difference_with_initials(const std::vector<double>& s, int d) {
  Differenced out;
  out.d = d;
  std::vector<double> cur = s;
  for (int r = 0; r < d; ++r) {
    out.initials.push_back(cur.front());
    std::vector<double> next(cur.size() - 1);
    for (size_t i = 0; i + 1 < cur.size(); ++i) next[i] = cur[i + 1] - cur[i];
    cur = std::move(next);
  }
  out.values = std::move(cur);
  return out;
}

/// Inverse of difference_with_initials: cumulative sums seeded by the stored
/// level initials.
inline std::vector<double> undifference(const Differenced& diff) {
  std::vector<double> cur = diff.values;
  for (int r = diff.d - 1; r >= 0; --r) {
    std::vector<double> next(cur.size() + 1);
    next[0] = diff.initials[static_cast<size_t>(r)];
    for (size_t i = 0; i < cur.size(); ++i) next[i + 1] = next[i] + cur[i];
    cur = std::move(next);
  }
  return cur;
}

// Stationarity heuristics ---------------------------------------------------

namespace detail {

inline double mean_of(const std::vector<double>& s) {
  double m = 0.0;
  for (double v : s) m += v;
  return m / static_cast<double>(s.size());
}

inline double variance_of(const std::vector<double>& s) {
  double m = mean_of(s);
  double ss = 0.0;
  for (double v : s) ss += (v - m) * (v - m);
  return ss / static_cast<double>(s.size());
}

inline double lag1_autocorr(const std::vector<double>& s) {
  double m = mean_of(s);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < s.size(); ++i) {
    den += (s[i] - m) * (s[i] - m);
    if (i > 0) num += (s[i] - m) * (s[i - 1] - m);
  }
  return den == 0.0 ? 0.0 : num / den;
}

/// Documented stationarity check: a series still needs differencing when its
/// lag-1 autocorrelation exceeds 0.95 or first-differencing cuts its
/// variance by more than half.
inline bool needs_difference(const std::vector<double>& s) {
  double var = variance_of(s);
  if (var == 0.0) return false;
  if (lag1_autocorr(s) > 0.95) return true;
  std::vector<double> d = difference(s, 1);
  return variance_of(d) < 0.5 * var;
}

}  // namespace detail

/// Smallest d <= d_max whose d-fold difference passes the stationarity
/// check; returns d_max (capped flag set) when none does.
inline int select_d(const std::vector<double>& s, int d_max = 2,
                    bool* capped = nullptr) {
  if (s.size() < 20) throw std::invalid_argument("series too short");
  if (capped) *capped = false;
  std::vector<double> cur = s;
  for (int d = 0; d < d_max; ++d) {
    if (!detail::needs_difference(cur)) return d;
    cur = difference(cur, 1);
  }
  if (detail::needs_difference(cur) && capped) *capped = true;
  return d_max;
}

// AR estimation --------------------------------------------------------------

namespace detail {

inline std::vector<double> autocovariances(const std::vector<double>& s,
                                           int max_lag) {
  const size_t n = s.size();
  double m = mean_of(s);
  std::vector<double> gamma(static_cast<size_t>(max_lag) + 1, 0.0);
  for (int h = 0; h <= max_lag; ++h) {
    double acc = 0.0;
    for (size_t t = static_cast<size_t>(h); t < n; ++t)
      acc += (s[t] - m) * (s[t - static_cast<size_t>(h)] - m);
    gamma[static_cast<size_t>(h)] = acc / static_cast<double>(n);
  }
  return gamma;
}

/// Gaussian elimination with partial pivoting for the small Toeplitz systems
/// of Yule-Walker (p <= 5).
inline std::vector<double> solve_linear(std::vector<std::vector<double>> a,
                                        std::vector<double> b) {
  const size_t n = b.size();
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12)
      throw std::runtime_error("singular autocovariance system");
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (size_t ri = n; ri-- > 0;) {
    double acc = b[ri];
    for (size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
    x[ri] = acc / a[ri][ri];
  }
  return x;
}

}  // namespace detail

struct ArFit {
  std::vector<double> phi;
  double intercept = 0.0;
  double mean = 0.0;
  double sigma2 = 0.0;
};

/// Yule-Walker estimation on sample autocovariances. For p = 0 this is the
/// sample mean / variance. sigma2 comes from the conditional residuals.
inline ArFit fit_ar(const std::vector<double>& s, int p) {
  if (p < 0) throw std::invalid_argument("p must be >= 0");
  if (s.size() < static_cast<size_t>(10 * std::max(p, 1)))
    throw std::invalid_argument("series too short for AR(" + std::to_string(p) +
                                ")");
  ArFit fit;
  fit.mean = detail::mean_of(s);
  if (p == 0) {
    fit.intercept = fit.mean;
    fit.sigma2 = detail::variance_of(s);
    return fit;
  }

  auto gamma = detail::autocovariances(s, p);
  std::vector<std::vector<double>> r(static_cast<size_t>(p),
                                     std::vector<double>(static_cast<size_t>(p)));
  std::vector<double> rhs(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) {
    rhs[static_cast<size_t>(i)] = gamma[static_cast<size_t>(i) + 1];
    for (int j = 0; j < p; ++j)
      r[static_cast<size_t>(i)][static_cast<size_t>(j)] =
          gamma[static_cast<size_t>(std::abs(i - j))];
  }
  fit.phi = detail::solve_linear(std::move(r), std::move(rhs));

  double phi_sum = 0.0;
  for (double v : fit.phi) phi_sum += v;
  fit.intercept = fit.mean * (1.0 - phi_sum);

  double css = 0.0;
  size_t count = 0;
  for (size_t t = static_cast<size_t>(p); t < s.size(); ++t) {
    double e = s[t] - fit.mean;
    for (int i = 1; i <= p; ++i)
      e -= fit.phi[static_cast<size_t>(i - 1)] *
           (s[t - static_cast<size_t>(i)] - fit.mean);
    css += e * e;
    ++count;
  }
  fit.sigma2 = css / static_cast<double>(count);
  return fit;
}

// ARMA residuals and CSS ------------------------------------------------------

namespace detail {

/// Residual recursion for the centered ARMA form
///   (y_t - mu) = sum phi_i (y_{t-i} - mu) + e_t - sum theta_j e_{t-j}
/// conditioned on e_t = 0 for t < p. Returns the full-length buffer.
inline std::vector<double> arma_residual_buffer(const std::vector<double>& y,
                                                double mu,
                                                const std::vector<double>& phi,
                                                const std::vector<double>& theta) {
  const size_t n = y.size();
  const size_t p = phi.size(), q = theta.size();
  std::vector<double> e(n, 0.0);
  for (size_t t = p; t < n; ++t) {
    double v = y[t] - mu;
    for (size_t i = 1; i <= p; ++i) v -= phi[i - 1] * (y[t - i] - mu);
    for (size_t j = 1; j <= q && j <= t; ++j)
      if (t - j >= p) v += theta[j - 1] * e[t - j];
    e[t] = v;
  }
  return e;
}

inline double arma_css(const std::vector<double>& y, double mu,
                       const std::vector<double>& phi,
                       const std::vector<double>& theta,
                       std::vector<double>* scratch = nullptr) {
  const size_t n = y.size(), p = phi.size(), q = theta.size();
  std::vector<double> local;
  std::vector<double>& c = scratch ? *scratch : local;
  c.resize(n);
  for (size_t t = 0; t < n; ++t) c[t] = y[t] - mu;

  // ring of the last q residuals; slots start at zero (the conditioning)
  double small_ring[8] = {0};
  std::vector<double> big_ring;
  double* ring = small_ring;
  if (q > 8) {
    big_ring.assign(q, 0.0);
    ring = big_ring.data();
  }
  size_t head = 0;
  double css = 0.0;
  for (size_t t = p; t < n; ++t) {
    double v = c[t];
    for (size_t i = 1; i <= p; ++i) v -= phi[i - 1] * c[t - i];
    size_t idx = head;
    for (size_t j = 1; j <= q; ++j) {
      idx = idx == 0 ? q - 1 : idx - 1;
      v += theta[j - 1] * ring[idx];
    }
    if (q > 0) {
      ring[head] = v;
      head = head + 1 == q ? 0 : head + 1;
    }
    css += v * v;
  }
  return css;
}

/// Deterministic coordinate search with a halving step schedule. Terminates
/// on relative objective change below `tol` across a pass, on step collapse,
/// or after max_passes.
template <typename F>
bool coordinate_descent(F&& objective, std::vector<double>& params,
                        std::vector<double> steps, double tol, int max_passes,
                        double* final_value = nullptr) {
  double best = objective(params);
  bool converged = false;
  for (int pass = 0; pass < max_passes; ++pass) {
    double pass_start = best;
    bool improved = false;
    for (size_t i = 0; i < params.size(); ++i) {
      double saved = params[i];
      params[i] = saved + steps[i];
      double v = objective(params);
      if (v < best) {
        best = v;
        improved = true;
        continue;
      }
      params[i] = saved - steps[i];
      v = objective(params);
      if (v < best) {
        best = v;
        improved = true;
      } else {
        params[i] = saved;
      }
    }
    if (!improved) {
      double max_step = 0.0;
      for (size_t i = 0; i < steps.size(); ++i) {
        steps[i] *= 0.5;
        max_step = std::max(max_step, steps[i]);
      }
      if (max_step < 1e-9) {
        converged = true;
        break;
      }
    } else if (pass_start - best < tol * std::max(1.0, pass_start)) {
      converged = true;
      break;
    }
  }
  if (final_value) *final_value = best;
  return converged;
}

}  // namespace detail

struct MaFit {
  std::vector<double> theta;
  double mean = 0.0;
  double sigma2 = 0.0;
};

/// Conditional-sum-of-squares MA fit (innovations initialized to zero) via
/// coordinate search, tolerance 1e-8 on the CSS. Throws after max_iter
/// passes without convergence.
inline MaFit fit_ma(const std::vector<double>& s, int q, int max_iter = 500) {
  if (q < 0) throw std::invalid_argument("q must be >= 0");
  if (s.size() < static_cast<size_t>(10 * std::max(q, 1)))
    throw std::invalid_argument("series too short for MA(" + std::to_string(q) +
                                ")");
  MaFit fit;
  fit.mean = detail::mean_of(s);
  if (q == 0) {
    fit.sigma2 = detail::variance_of(s);
    return fit;
  }

  std::vector<double> params(static_cast<size_t>(q) + 1, 0.0);
  params[0] = fit.mean;
  std::vector<double> steps(params.size(), 0.1);
  steps[0] = 0.1 * std::max(1.0, std::abs(fit.mean));

  std::vector<double> scratch_theta(static_cast<size_t>(q)), centered;
  const std::vector<double> no_phi;
  auto objective = [&](const std::vector<double>& ps) {
    for (size_t j = 0; j < scratch_theta.size(); ++j) {
      if (std::abs(ps[j + 1]) > 5.0)
        return std::numeric_limits<double>::infinity();
      scratch_theta[j] = ps[j + 1];
    }
    return detail::arma_css(s, ps[0], no_phi, scratch_theta, &centered);
  };

  double css = 0.0;
  bool ok = detail::coordinate_descent(objective, params, steps, 1e-8, max_iter,
                                       &css);
  if (!ok)
    throw std::runtime_error("MA fit did not converge within " +
                             std::to_string(max_iter) + " iterations");

  fit.mean = params[0];
  fit.theta.assign(params.begin() + 1, params.end());
  fit.sigma2 = css / static_cast<double>(s.size());
  return fit;
}

// Polynomial roots for stationarity / invertibility ---------------------------

namespace detail {

/// Durand-Kerner roots of c[0] + c[1] z + ... + c[deg] z^deg. Deterministic
/// fixed starting points; plenty for the degree <= 5 polynomials here.
inline std::vector<std::complex<double>> poly_roots(std::vector<double> coeffs) {
  while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
  const size_t deg = coeffs.size() - 1;
  if (deg == 0) return {};

  std::vector<std::complex<double>> c(coeffs.size());
  for (size_t i = 0; i < coeffs.size(); ++i) c[i] = coeffs[i] / coeffs.back();

  auto eval = [&](std::complex<double> z) {
    std::complex<double> acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
    return acc;
  };

  std::vector<std::complex<double>> roots(deg);
  std::complex<double> seed(0.4, 0.9);
  std::complex<double> pw = 1.0;
  for (size_t i = 0; i < deg; ++i) {
    pw *= seed;
    roots[i] = pw;
  }

  for (int iter = 0; iter < 200; ++iter) {
    double moved = 0.0;
    for (size_t i = 0; i < deg; ++i) {
      std::complex<double> denom = 1.0;
      for (size_t j = 0; j < deg; ++j)
        if (j != i) denom *= roots[i] - roots[j];
      std::complex<double> delta = eval(roots[i]) / denom;
      roots[i] -= delta;
      moved = std::max(moved, std::abs(delta));
    }
    if (moved < 1e-12) break;
  }
  return roots;
}

/// True when all roots of 1 - a_1 z - ... - a_k z^k lie outside the unit
/// circle (within tolerance 1e-6).
inline bool roots_outside_unit_circle(const std::vector<double>& a) {
  if (a.empty()) return true;
  std::vector<double> coeffs(a.size() + 1);
  coeffs[0] = 1.0;
  for (size_t i = 0; i < a.size(); ++i) coeffs[i + 1] = -a[i];
  for (const auto& r : detail::poly_roots(coeffs))
    if (std::abs(r) <= 1.0 - 1e-6) return false;
  return true;
}

inline void information_criteria(ArimaModel& m, size_t n_diff) {
  const double n = static_cast<double>(n_diff);
  const double k = static_cast<double>(m.order.p + m.order.q + 1);
  double s2 = std::max(m.sigma2, 1e-300);
  m.aic = n * std::log(s2) + 2.0 * k;
  m.aicc = m.aic + 2.0 * k * (k + 1.0) / (n - k - 1.0);
  m.bic = n * std::log(s2) + k * std::log(n);
}

}  // namespace detail

/// Fits ARIMA(p,d,q) by CSS on the d-differenced series. AR coefficients are
/// initialized from Yule-Walker, MA from zeros; the joint coordinate search
/// runs extra seeded restarts when a MA part is present. Non-stationary or
/// non-invertible fits are rejected.
inline ArimaModel fit_arima(const std::vector<double>& s, ArimaOrder order) {
  if (order.p < 0 || order.d < 0 || order.q < 0)
    throw std::invalid_argument("orders must be >= 0");
  if (static_cast<int>(s.size()) <= order.d)
    throw std::invalid_argument("series too short to difference");

  std::vector<double> y = difference(s, order.d);
  const size_t n = y.size();
  if (n < static_cast<size_t>(10 * std::max({order.p, order.q, 1})))
    throw std::invalid_argument("series too short for the requested order");

  const bool with_mean = (order.d == 0);
  const size_t p = static_cast<size_t>(order.p);
  const size_t q = static_cast<size_t>(order.q);

  std::vector<double> phi0;
  if (order.p > 0) phi0 = fit_ar(y, order.p).phi;
  double mu0 = with_mean ? detail::mean_of(y) : 0.0;

  // Parameter layout: [mu (if d = 0), phi..., theta...]
  auto unpack = [&](const std::vector<double>& ps, double& mu,
                    std::vector<double>& phi, std::vector<double>& theta) {
    size_t off = 0;
    mu = with_mean ? ps[off++] : 0.0;
    phi.assign(ps.begin() + static_cast<long>(off),
               ps.begin() + static_cast<long>(off + p));
    theta.assign(ps.begin() + static_cast<long>(off + p), ps.end());
  };

  std::vector<double> scratch_phi(p), scratch_theta(q), centered;
  auto objective = [&](const std::vector<double>& ps) {
    const size_t off = with_mean ? 1 : 0;
    for (size_t i = 0; i < p + q; ++i)
      if (std::abs(ps[off + i]) > 5.0)
        return std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < p; ++i) scratch_phi[i] = ps[off + i];
    for (size_t j = 0; j < q; ++j) scratch_theta[j] = ps[off + p + j];
    double mu = with_mean ? ps[0] : 0.0;
    return detail::arma_css(y, mu, scratch_phi, scratch_theta, &centered);
  };

  auto make_start = [&](const std::vector<double>& phi_init,
                        const std::vector<double>& theta_init) {
    std::vector<double> ps;
    if (with_mean) ps.push_back(mu0);
    ps.insert(ps.end(), phi_init.begin(), phi_init.end());
    ps.insert(ps.end(), theta_init.begin(), theta_init.end());
    return ps;
  };

  std::vector<std::vector<double>> starts;
  starts.push_back(make_start(phi0.empty() ? std::vector<double>(p, 0.0) : phi0,
                              std::vector<double>(q, 0.0)));
  if (q > 0) {
    // seeded restart: the MA surface is the non-convex part
    std::mt19937 rng(0x5EEDu + static_cast<unsigned>(order.p * 8 + order.q));
    std::normal_distribution<double> jitter(0.0, 0.3);
    std::vector<double> phi_r = phi0.empty() ? std::vector<double>(p, 0.0) : phi0;
    std::vector<double> theta_r(q);
    for (auto& v : phi_r) v += 0.15 * jitter(rng);
    for (auto& v : theta_r) v = jitter(rng);
    starts.push_back(make_start(phi_r, theta_r));
  }

  double best_css = std::numeric_limits<double>::infinity();
  std::vector<double> best_params;
  bool any_converged = false;
  for (auto& start : starts) {
    std::vector<double> params = start;
    std::vector<double> steps(params.size(), 0.1);
    if (with_mean) steps[0] = 0.1 * std::max(1.0, std::abs(mu0));
    double css = 0.0;
    bool ok = detail::coordinate_descent(objective, params, steps, 1e-8, 500,
                                         &css);
    if (ok && css < best_css) {
      best_css = css;
      best_params = params;
      any_converged = true;
    }
  }
  if (!any_converged)
    throw std::runtime_error("ARIMA fit did not converge");

  ArimaModel m;
  m.order = order;
  double mu;
  unpack(best_params, mu, m.phi, m.theta);
  m.mean = mu;
  double phi_sum = 0.0;
  for (double v : m.phi) phi_sum += v;
  m.intercept = mu * (1.0 - phi_sum);

  if (!detail::roots_outside_unit_circle(m.phi))
    throw std::runtime_error("fitted AR part is non-stationary");
  if (!detail::roots_outside_unit_circle(m.theta))
    throw std::runtime_error("fitted MA part is non-invertible");

  auto buffer = detail::arma_residual_buffer(y, mu, m.phi, m.theta);
  m.residuals.assign(buffer.begin() + static_cast<long>(p), buffer.end());
  m.sigma2 = best_css / static_cast<double>(m.residuals.size());
  detail::information_criteria(m, n);
  return m;
}

/// Recomputes the conditional residuals of a model against a series; used by
/// forecasting and by the residual-reproducibility check.
inline std::vector<double> arima_residuals(const ArimaModel& m,
                                           const std::vector<double>& history) {
  std::vector<double> y = difference(history, m.order.d);
  auto buffer = detail::arma_residual_buffer(y, m.mean, m.phi, m.theta);
  return std::vector<double>(buffer.begin() + static_cast<long>(m.phi.size()),
                             buffer.end());
}

/// Grid search over p in [0,p_max], q in [0,q_max] with d from select_d;
/// returns the converged candidate with the smallest criterion. Ties go to
/// the smaller p+q, then the smaller p.
inline ArimaModel auto_order(const std::vector<double>& s,
                             OrderBounds bounds = {},
                             Criterion criterion = Criterion::bic,
                             bool* d_capped = nullptr) {
  if (s.size() < 50) throw std::invalid_argument("series shorter than 50");
  int d = select_d(s, bounds.d_max, d_capped);

  std::optional<ArimaModel> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (int p = 0; p <= bounds.p_max; ++p) {
    for (int q = 0; q <= bounds.q_max; ++q) {
      ArimaModel m;
      try {
        m = fit_arima(s, ArimaOrder{p, d, q});
      } catch (const std::exception&) {
        continue;
      }
      double value = criterion == Criterion::aic    ? m.aic
                     : criterion == Criterion::aicc ? m.aicc
                                                    : m.bic;
      bool take = false;
      if (!best) {
        take = true;
      } else if (value < best_value - 1e-9) {
        take = true;
      } else if (std::abs(value - best_value) <= 1e-9) {
        int cand = p + q, incumbent = best->order.p + best->order.q;
        take = cand < incumbent ||
               (cand == incumbent && p < best->order.p);
      }
      if (take) {
        best = std::move(m);
        best_value = value;
      }
    }
  }
  if (!best) throw std::runtime_error("no ARIMA candidate converged");
  return *best;
}

/// h-step forecast: ARMA recursion on the differenced scale with future
/// innovations zero, inverted through the differencing chain. 80% intervals
/// use point +- 1.2816 * sqrt(Var_h) with Var_h from the psi-weight
/// expansion (integrated d times). Outputs are clamped to the [0,100] score
/// domain after the intervals are formed.
inline Forecast forecast(const ArimaModel& m, const std::vector<double>& history,
                         int h) {
  if (h < 1) throw std::invalid_argument("horizon must be >= 1");
  if (static_cast<size_t>(h) > 10 * history.size())
    throw std::invalid_argument("horizon exceeds 10x history length");
  if (static_cast<int>(history.size()) <= m.order.d)
    throw std::invalid_argument("history too short for model differencing");

  const size_t p = m.phi.size(), q = m.theta.size();

  // Differencing chain, keeping each level's tail for the inversion.
  std::vector<std::vector<double>> levels(static_cast<size_t>(m.order.d) + 1);
  levels[0] = history;
  for (int r = 1; r <= m.order.d; ++r)
    levels[static_cast<size_t>(r)] = difference(levels[static_cast<size_t>(r - 1)], 1);
  const std::vector<double>& y = levels.back();
  const size_t n = y.size();

  auto ebuf = detail::arma_residual_buffer(y, m.mean, m.phi, m.theta);

  std::vector<double> extended = y;
  extended.reserve(n + static_cast<size_t>(h));
  for (int k = 1; k <= h; ++k) {
    size_t t = n + static_cast<size_t>(k) - 1;
    double v = m.mean;
    for (size_t i = 1; i <= p && i <= t; ++i)
      v += m.phi[i - 1] * (extended[t - i] - m.mean);
    for (size_t j = 1; j <= q && j <= t; ++j)
      if (t - j < n) v -= m.theta[j - 1] * ebuf[t - j];
    extended.push_back(v);
  }
  std::vector<double> diff_fc(extended.begin() + static_cast<long>(n),
                              extended.end());

  // Invert the differencing: each level integrates from its last observation.
  std::vector<double> fc = diff_fc;
  for (int r = m.order.d - 1; r >= 0; --r) {
    double prev = levels[static_cast<size_t>(r)].back();
    for (auto& v : fc) {
      v = prev + v;
      prev = v;
    }
  }

  // Psi weights of the ARMA part, integrated d times.
  std::vector<double> psi(static_cast<size_t>(h), 0.0);
  psi[0] = 1.0;
  for (size_t j = 1; j < psi.size(); ++j) {
    double v = (j <= q) ? -m.theta[j - 1] : 0.0;
    for (size_t i = 1; i <= p && i <= j; ++i) v += m.phi[i - 1] * psi[j - i];
    psi[j] = v;
  }
  for (int r = 0; r < m.order.d; ++r)
    for (size_t j = 1; j < psi.size(); ++j) psi[j] += psi[j - 1];

  Forecast out;
  out.horizon = h;
  out.point = fc;
  out.variance.resize(static_cast<size_t>(h));
  out.interval_80.resize(static_cast<size_t>(h));
  double acc = 0.0;
  for (int k = 0; k < h; ++k) {
    acc += psi[static_cast<size_t>(k)] * psi[static_cast<size_t>(k)];
    out.variance[static_cast<size_t>(k)] = m.sigma2 * acc;
    double se = std::sqrt(out.variance[static_cast<size_t>(k)]);
    out.interval_80[static_cast<size_t>(k)] = {fc[static_cast<size_t>(k)] - 1.2816 * se,
                                               fc[static_cast<size_t>(k)] + 1.2816 * se};
  }

  for (int k = 0; k < h; ++k) {
    auto& [lo, hi] = out.interval_80[static_cast<size_t>(k)];
    lo = std::clamp(lo, 0.0, 100.0);
    hi = std::clamp(hi, 0.0, 100.0);
    out.point[static_cast<size_t>(k)] =
        std::clamp(out.point[static_cast<size_t>(k)], 0.0, 100.0);
  }
  return out;
}

}  // namespace perfsense
