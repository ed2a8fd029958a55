#pragma once

// Censored Weibull likelihood, posterior kernel, and the one-dimensional
// marginal integrand left after integrating eta out analytically.
//
// Everything is evaluated in log space. Two kernels appear:
//  * the exact censored log-likelihood, with event terms
//    log(beta) + beta log(eta) + (beta - 1) log(x), used for sampling;
//  * the normalizing-constant kernel, with event exponent beta instead of
//    beta - 1. The two differ by the parameter-free constant sum(delta log x),
//    see LikelihoodData::normalizing_offset().

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "wbpost/data.hpp"
#include "wbpost/prior.hpp"

namespace wbpost {

inline constexpr double kMinTime = 1e-6;
inline constexpr double kMaxTime = 1e6;
inline constexpr double kMaxLikelihoodBeta = 1e4;

class KernelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct WeibullParams {
  double eta;
  double beta;

  WeibullParams(double eta, double beta);
};

/// log Gamma(a) for a > 0 (Lanczos, g = 607/128).
double log_gamma(double a);

/// Log-times and event flags, checked against [kMinTime, kMaxTime].
class LikelihoodData {
 public:
  explicit LikelihoodData(const Dataset& d);

  std::size_t n() const { return log_x_.size(); }
  std::size_t m() const { return m_; }
  double log_x_max() const { return log_x_max_; }
  double sum_delta_log_x() const { return sum_delta_log_x_; }
  /// h = sum(delta (log x_max - log x)) >= 0.
  double h() const { return h_; }
  /// Normalizing kernel minus exact log posterior kernel.
  double normalizing_offset() const { return sum_delta_log_x_; }

  double log_likelihood(double log_eta, double beta) const;

  /// log sum_i x_i^beta, shifted by log x_max so no power is ever formed.
  double log_S(double beta) const;

  /// log sum_i exp(beta (log x_i - log x_max)), in [0, log n].
  double log_S_shifted(double beta) const;

  const std::vector<double>& log_times() const { return log_x_; }
  const std::vector<int>& events() const { return delta_; }

 private:
  std::vector<double> log_x_;
  std::vector<int> delta_;
  // Sorted log(x_i / x_max); fixed order keeps results permutation-invariant.
  std::vector<double> rel_log_x_;
  std::size_t m_ = 0;
  double log_x_max_ = 0.0;
  double sum_delta_log_x_ = 0.0;
  double h_ = 0.0;
};

double log_likelihood(const WeibullParams& params, const Dataset& d);

/// log prior + exact log-likelihood; prior must be in eta coordinates.
double log_posterior_kernel(const WeibullParams& params, const PriorSpec& prior,
                            const Dataset& d);

/// Same point, normalizing-constant kernel (event exponent beta).
double log_normalizing_kernel(const WeibullParams& params, const PriorSpec& prior,
                              const Dataset& d);

double log_S(double beta, const Dataset& d);

struct MarginalIntegrandValue {
  double log_value = 0.0;
  bool inner_divergent = false;
};

/// beta -> log of the eta-integrated normalizing kernel:
///   -p/beta + (m+q-1) log beta + beta sum(delta log x)
///     - a(beta) log S(beta) + log Gamma(a(beta)),   a(beta) = m + (r+1)/beta.
/// Evaluated as
///   -p/beta + (m+q-1) log beta - h beta - (r+1) log x_max
///     - a(beta) log S_shifted(beta) + log Gamma(a(beta)),
/// which is algebraically identical and free of cancellation at large beta.
class MarginalIntegrand {
 public:
  /// Theta-coordinate priors are mapped to eta first.
  MarginalIntegrand(const PriorSpec& prior, const Dataset& d);

  MarginalIntegrandValue operator()(double beta) const;

  /// a(beta) = m + (r+1)/beta.
  double gamma_argument(double beta) const;

  /// True when a(beta) <= 0 for some beta > 0, decided from (r, m) alone:
  /// r < -1, or r = -1 with no events.
  bool has_inner_divergence() const;

  /// Largest beta with a(beta) <= 0 (infinite when every beta qualifies);
  /// empty when a(beta) > 0 everywhere.
  std::optional<double> inner_divergence_threshold() const;

  const PriorSpec& prior() const { return prior_; }
  const LikelihoodData& data() const { return data_; }

 private:
  PriorSpec prior_;
  LikelihoodData data_;
};

MarginalIntegrandValue log_marginal_integrand(double beta, const PriorSpec& prior,
                                              const Dataset& d);

}  // namespace wbpost
