#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace netsig::stats {

// |x - mean| / stddev (population). All zeros when stddev is 0.
// Throws Error{SeriesTooShort} for fewer than two values.
std::vector<double> score_zscore(std::span<const double> values);

// 0.6745 * |x - median| / MAD. When MAD is 0, values at the median score 0
// and every other value scores +infinity.
std::vector<double> score_modified_zscore(std::span<const double> values);

double median(std::span<const double> values);

// Linear interpolation between closest ranks, q in [0, 100].
double percentile(std::span<const double> values, double q);

using Matrix = std::vector<std::vector<double>>;

struct GmmConfig {
  int components = 3;
  int max_iters = 200;
  double tol = 1e-6;
  double variance_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GmmModel {
  std::vector<double> weights;
  Matrix means;      // components x dims
  Matrix variances;  // components x dims, diagonal
  double log_likelihood = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihood_history;  // one value per E-step
  std::vector<std::string> warnings;

  std::size_t dims() const { return means.empty() ? 0 : means.front().size(); }
  std::size_t components() const { return weights.size(); }
};

// EM with diagonal covariances and k-means++ seeding. Falls back to one
// component (with a warning) when every row is identical.
GmmModel fit_gmm(const Matrix& rows, const GmmConfig& config);

double log_density(const GmmModel& model, std::span<const double> x);

// Negative log-likelihood of each row. Throws Error{SchemaMismatch} on a dimension mismatch.
std::vector<double> score_gmm(const GmmModel& model, const Matrix& rows);

// Posterior component probabilities per row.
Matrix responsibilities(const GmmModel& model, const Matrix& rows);

}  // namespace netsig::stats
