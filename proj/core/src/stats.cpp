#include "netsig/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "netsig/error.hpp"
#include "netsig/util.hpp"

namespace netsig::stats {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_series(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorCode::SeriesTooShort, fmt::format("length {}", values.size()));
}

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_gaussian(std::span<const double> x, const std::vector<double>& mean, const std::vector<double>& var) {
  double acc = 0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - mean[d];
    acc += std::log(2.0 * std::numbers::pi * var[d]) + diff * diff / var[d];
  }
  return -0.5 * acc;
}

// Per-component log(w_k) + log N(x | mu_k, var_k).
void component_log_terms(const GmmModel& m, std::span<const double> x, std::vector<double>& out) {
  out.resize(m.components());
  for (std::size_t k = 0; k < m.components(); ++k) {
    out[k] = m.weights[k] > 0 ? std::log(m.weights[k]) + log_gaussian(x, m.means[k], m.variances[k]) : kNegInf;
  }
}

double e_step(const GmmModel& m, const Matrix& rows, Matrix& resp) {
  resp.assign(rows.size(), std::vector<double>(m.components(), 0.0));
  std::vector<double> terms;
  double ll = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    component_log_terms(m, rows[i], terms);
    const double lse = log_sum_exp(terms);
    ll += lse;
    for (std::size_t k = 0; k < terms.size(); ++k) resp[i][k] = std::exp(terms[k] - lse);
  }
  return ll;
}

void m_step(GmmModel& m, const Matrix& rows, const Matrix& resp, double floor) {
  const auto n = rows.size();
  const auto dims = m.dims();
  for (std::size_t k = 0; k < m.components(); ++k) {
    double nk = 0;
    for (std::size_t i = 0; i < n; ++i) nk += resp[i][k];
    if (!(nk > 0)) {
      // Empty component: drop its weight, keep its parameters.
      m.weights[k] = 0;
      continue;
    }
    m.weights[k] = nk / static_cast<double>(n);
    std::vector<double> mean(dims, 0.0), var(dims, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dims; ++d) mean[d] += resp[i][k] * rows[i][d];
    }
    for (auto& v : mean) v /= nk;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dims; ++d) {
        const double diff = rows[i][d] - mean[d];
        var[d] += resp[i][k] * diff * diff;
      }
    }
    for (auto& v : var) v = std::max(v / nk, floor);
    m.means[k] = std::move(mean);
    m.variances[k] = std::move(var);
  }
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return s;
}

Matrix seed_means(const Matrix& rows, std::size_t k, Rng& rng) {
  const auto n = rows.size();
  Matrix centers;
  centers.push_back(rows[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1))]);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(rows[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = n - 1;
    if (total > 0) {
      double target = rng.uniform01() * total;
      for (std::size_t i = 0; i < n; ++i) {
        target -= d2[i];
        if (target < 0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    }
    centers.push_back(rows[pick]);
  }
  return centers;
}

}  // namespace

std::vector<double> score_zscore(std::span<const double> values) {
  require_series(values);
  const double n = static_cast<double>(values.size());
  double sum = 0;
  for (double x : values) sum += x;
  const double mean = sum / n;
  double sq = 0;
  for (double x : values) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / n);
  std::vector<double> out(values.size(), 0.0);
  if (sd == 0) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = std::abs(values[i] - mean) / sd;
  return out;
}

double median(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  const auto n = v.size();
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), mid, v.end());
  const double upper = *mid;
  if (n % 2) return upper;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

std::vector<double> score_modified_zscore(std::span<const double> values) {
  require_series(values);
  const double med = median(values);
  std::vector<double> dev;
  dev.reserve(values.size());
  for (double x : values) dev.push_back(std::abs(x - med));
  const double mad = median(dev);
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (mad == 0) {
      out[i] = values[i] == med ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
      out[i] = 0.6745 * dev[i] / mad;
    }
  }
  return out;
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::SeriesTooShort, "percentile of empty series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

GmmModel fit_gmm(const Matrix& rows, const GmmConfig& config) {
  if (config.components < 1 || static_cast<std::size_t>(config.components) > rows.size()) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("need 1 <= k <= rows, got k={} rows={}", config.components, rows.size()));
  }
  const auto dims = rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != dims) throw Error(ErrorCode::SchemaMismatch, "ragged matrix");
  }

  GmmModel m;
  auto k = static_cast<std::size_t>(config.components);
  const bool all_identical =
      std::all_of(rows.begin(), rows.end(), [&](const auto& r) { return r == rows.front(); });
  if (all_identical && k > 1) {
    m.warnings.push_back(fmt::format("DegenerateComponent: all {} rows identical; using k=1 instead of k={}",
                                     rows.size(), k));
    k = 1;
  }

  Rng rng(config.seed);
  m.means = seed_means(rows, k, rng);
  m.weights.assign(k, 1.0 / static_cast<double>(k));
  std::vector<double> global_var(dims, 0.0);
  {
    std::vector<double> mean(dims, 0.0);
    for (const auto& r : rows)
      for (std::size_t d = 0; d < dims; ++d) mean[d] += r[d];
    for (auto& v : mean) v /= static_cast<double>(rows.size());
    for (const auto& r : rows)
      for (std::size_t d = 0; d < dims; ++d) global_var[d] += (r[d] - mean[d]) * (r[d] - mean[d]);
    for (auto& v : global_var) v = std::max(v / static_cast<double>(rows.size()), config.variance_floor);
  }
  m.variances.assign(k, global_var);

  Matrix resp;
  double ll = e_step(m, rows, resp);
  m.log_likelihood_history.push_back(ll);
  int it = 0;
  while (it < config.max_iters) {
    ++it;
    m_step(m, rows, resp, config.variance_floor);
    const double next = e_step(m, rows, resp);
    m.log_likelihood_history.push_back(next);
    const double gain = next - ll;
    ll = next;
    if (gain < config.tol) {
      m.converged = true;
      break;
    }
  }
  m.log_likelihood = ll;
  m.iterations = it;
  return m;
}

double log_density(const GmmModel& model, std::span<const double> x) {
  if (x.size() != model.dims()) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("row has {} dims, model {}", x.size(), model.dims()));
  }
  std::vector<double> terms;
  component_log_terms(model, x, terms);
  return log_sum_exp(terms);
}

std::vector<double> score_gmm(const GmmModel& model, const Matrix& rows) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(-log_density(model, r));
  return out;
}

Matrix responsibilities(const GmmModel& model, const Matrix& rows) {
  for (const auto& r : rows) {
    if (r.size() != model.dims()) throw Error(ErrorCode::SchemaMismatch, "row dimension mismatch");
  }
  Matrix resp;
  e_step(model, rows, resp);
  return resp;
}

}  // namespace netsig::stats
