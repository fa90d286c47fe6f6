#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ldtail/covariance.hpp"
#include "ldtail/error.hpp"
#include "ldtail/field.hpp"
#include "ldtail/functional.hpp"
#include "ldtail/optimizer.hpp"
#include "ldtail/random.hpp"

namespace ldtail {

enum class McMethod { crude, importance };

inline std::string to_string(McMethod m) { return m == McMethod::crude ? "crude" : "importance"; }

struct McEstimate {
  McMethod method = McMethod::crude;
  double mean = 0.0;
  double std_error = 0.0;
  /// log of mean; finite even when mean underflows. -inf when there are no hits.
  double log_mean = -std::numeric_limits<double>::infinity();
  std::int64_t n = 0;
  std::int64_t hits = 0;
  double ci95_low = 0.0;
  double ci95_high = 0.0;
  std::uint64_t seed = 0;
  /// (sum w)^2 / sum w^2 over hits; equals hits for crude sampling.
  double effective_sample_size = 0.0;
  double log_weight_min = 0.0;
  double log_weight_max = 0.0;
  std::vector<std::string> warnings;

  double relative_std_error() const {
    return mean > 0.0 ? std_error / mean : std::numeric_limits<double>::infinity();
  }
};

/// Per-sample trace, optionally returned by the estimators.
struct SampleLog {
  std::vector<double> g_value;
  std::vector<char> indicator;
  std::vector<double> log_weight;
};

struct McOptions {
  std::int64_t n = 10000;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Samples in one chunk share a stream (seed, chunk index).
inline constexpr std::int64_t kSamplesPerChunk = 1024;

/// log dP/dQ at xi for the tilt dQ/dP = exp(<xi*, xi> - K(xi*)/2).
inline double log_likelihood_ratio(const CovarianceModel& model, const ScalarField& xi, const ScalarField& xi_star) {
  return -inner_product(*model.grid(), xi_star, xi) + 0.5 * k_energy(model, xi_star);
}

inline double likelihood_ratio(const CovarianceModel& model, const ScalarField& xi, const ScalarField& xi_star) {
  return std::exp(log_likelihood_ratio(model, xi, xi_star));
}

namespace detail {

/// Draws xi = shift + L z for every sample, evaluates G(sigma xi) and the log
/// weight. Chunks are processed by `workers` threads in any order; results
/// land in per-sample slots so the reduction below is order-fixed.
inline SampleLog draw_samples(const Problem& problem, double sigma, double level, const ScalarField* xi_star,
                              const McOptions& opts) {
  const CovarianceModel& cov = problem.covariance();
  const GridPtr& grid = problem.grid();
  const auto n = static_cast<std::size_t>(opts.n);
  SampleLog log;
  log.g_value.assign(n, 0.0);
  log.indicator.assign(n, 0);
  log.log_weight.assign(n, 0.0);

  std::optional<ScalarField> shift;
  double half_k = 0.0;
  if (xi_star) {
    shift = apply_C(cov, *xi_star);
    half_k = 0.5 * k_energy(cov, *xi_star);
  }

  const std::int64_t chunks = (opts.n + kSamplesPerChunk - 1) / kSamplesPerChunk;
  std::atomic<std::int64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr error;
  std::string error_msg;
  std::int64_t error_index = std::numeric_limits<std::int64_t>::max();

  auto work = [&] {
    ScalarField xi(grid);
    ScalarField arg(grid);
    Eigen::VectorXd z;
    for (std::int64_t c = next++; c < chunks; c = next++) {
      RandomStream stream(opts.seed, static_cast<std::uint64_t>(c));
      const std::int64_t end = std::min(opts.n, (c + 1) * kSamplesPerChunk);
      for (std::int64_t k = c * kSamplesPerChunk; k < end; ++k) {
        try {
          cov.sample_into(stream, z, xi);
          if (shift) xi += *shift;
          for (std::size_t i = 0; i < xi.size(); ++i) arg[i] = sigma * xi[i];
          const double g = problem.value(arg);
          const auto s = static_cast<std::size_t>(k);
          log.g_value[s] = g;
          log.indicator[s] = g > level ? 1 : 0;
          if (xi_star) log.log_weight[s] = -inner_product(*grid, *xi_star, xi) + half_k;
        } catch (const std::exception& e) {
          std::lock_guard lock(err_mu);
          if (k < error_index) {
            error_index = k;
            error_msg = e.what();
          }
          return;
        }
      }
    }
  };

  const int workers = std::max(1, opts.workers);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error_index != std::numeric_limits<std::int64_t>::max()) {
    throw NumericalError("monte carlo: sample " + std::to_string(error_index) + " failed: " + error_msg);
  }
  return log;
}

inline McEstimate reduce(const SampleLog& log, McMethod method, const McOptions& opts) {
  McEstimate est;
  est.method = method;
  est.n = opts.n;
  est.seed = opts.seed;
  const double n = static_cast<double>(opts.n);

  double shift = -std::numeric_limits<double>::infinity();
  double lw_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < log.indicator.size(); ++k) {
    if (!log.indicator[k]) continue;
    ++est.hits;
    shift = std::max(shift, log.log_weight[k]);
    lw_min = std::min(lw_min, log.log_weight[k]);
  }
  if (est.hits == 0) {
    est.warnings.push_back("no sample reached the level");
    est.ci95_low = est.ci95_high = 0.0;
    return est;
  }
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t k = 0; k < log.indicator.size(); ++k) {
    if (!log.indicator[k]) continue;
    const double w = std::exp(log.log_weight[k] - shift);
    s1 += w;
    s2 += w * w;
  }
  est.log_weight_min = lw_min;
  est.log_weight_max = shift;
  est.effective_sample_size = s1 * s1 / s2;
  est.log_mean = shift + std::log(s1 / n);
  est.mean = std::exp(shift) * s1 / n;
  // With unit weights second_moment == mean, matching the Bernoulli variance.
  const double second_moment = std::exp(2.0 * shift) * s2 / n;
  const double var = std::max(0.0, second_moment - est.mean * est.mean);
  est.std_error = std::sqrt(var / n);
  est.ci95_low = est.mean - 1.96 * est.std_error;
  est.ci95_high = est.mean + 1.96 * est.std_error;
  if (method == McMethod::importance && est.effective_sample_size < 0.01 * n) {
    est.warnings.push_back("effective sample size " + std::to_string(est.effective_sample_size) +
                           " is below 1% of n");
  }
  return est;
}

}  // namespace detail

/// Fraction of samples with G(sigma xi) > level under the prior field.
inline McEstimate crude_mc(const Problem& problem, double sigma, double level, const McOptions& opts,
                           SampleLog* samples = nullptr) {
  if (opts.n < 1) throw InvalidArgument("mc.n must be at least 1");
  SampleLog log = detail::draw_samples(problem, sigma, level, nullptr, opts);
  McEstimate est = detail::reduce(log, McMethod::crude, opts);
  const double n = static_cast<double>(opts.n);
  est.mean = static_cast<double>(est.hits) / n;
  est.std_error = std::sqrt((est.mean - est.mean * est.mean) / n);
  est.ci95_low = est.mean - 1.96 * est.std_error;
  est.ci95_high = est.mean + 1.96 * est.std_error;
  if (samples) *samples = std::move(log);
  return est;
}

inline McEstimate crude_mc(const Problem& problem, const AsymptoticParams& params, const McOptions& opts,
                           SampleLog* samples = nullptr) {
  return crude_mc(problem, params.sigma, params.b, opts, samples);
}

/// Samples xi = C xi* + L z, i.e. the prior shifted to the dominating point's
/// mean C xi* (not xi* itself), and weights hits by dP/dQ.
inline McEstimate importance_sampling(const Problem& problem, double sigma, double level, const ScalarField& xi_star,
                                      const McOptions& opts, SampleLog* samples = nullptr) {
  if (opts.n < 1) throw InvalidArgument("mc.n must be at least 1");
  check_on_grid(*problem.grid(), xi_star);
  SampleLog log = detail::draw_samples(problem, sigma, level, &xi_star, opts);
  McEstimate est = detail::reduce(log, McMethod::importance, opts);
  if (samples) *samples = std::move(log);
  return est;
}

inline McEstimate importance_sampling(const Problem& problem, const AsymptoticParams& params,
                                      const KktSolution& solution, const McOptions& opts,
                                      SampleLog* samples = nullptr) {
  return importance_sampling(problem, params.sigma, params.b, solution.xi_star, opts, samples);
}

}  // namespace ldtail
