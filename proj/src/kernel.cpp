#include "wbpost/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace wbpost {

WeibullParams::WeibullParams(double eta_, double beta_) : eta(eta_), beta(beta_) {
  if (!(eta > 0.0) || !std::isfinite(eta) || !(beta > 0.0) || !std::isfinite(beta))
    throw KernelError("Weibull parameters must be positive and finite");
}

double log_gamma(double a) {
  if (!(a > 0.0)) throw KernelError("log_gamma needs a > 0");
  if (std::isinf(a)) return a;
  static constexpr std::array<double, 14> cof = {
      57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
      -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
      -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
      .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
      -.261908384015814087e-4, .368991826595316234e-5};
  double y = a;
  double tmp = a + 5.24218750000000000;  // g + 1/2 with g = 607/128
  tmp = (a + 0.5) * std::log(tmp) - tmp;
  double ser = 0.999999999999997092;
  for (double c : cof) ser += c / ++y;
  return tmp + std::log(2.5066282746310005 * ser / a);
}

LikelihoodData::LikelihoodData(const Dataset& d) {
  const auto& rows = d.observations();
  log_x_.reserve(rows.size());
  delta_.reserve(rows.size());
  double x_max = 0.0;
  for (const auto& o : rows) {
    if (o.time < kMinTime || o.time > kMaxTime)
      throw KernelError("observation times must lie in [1e-6, 1e6]");
    log_x_.push_back(std::log(o.time));
    delta_.push_back(o.event);
    x_max = std::max(x_max, o.time);
  }
  log_x_max_ = std::log(x_max);

  rel_log_x_.reserve(rows.size());
  for (double lx : log_x_) rel_log_x_.push_back(lx - log_x_max_);
  std::sort(rel_log_x_.begin(), rel_log_x_.end());

  const auto s = summarize(d);
  m_ = s.m;
  sum_delta_log_x_ = s.sum_delta_log_x;
  h_ = s.h;
}

double LikelihoodData::log_S_shifted(double beta) const {
  // Entries equal to zero are the maxima; the rest contribute exp(<0).
  double ties = 0.0;
  double tail = 0.0;
  for (double rel : rel_log_x_) {
    if (rel == 0.0)
      ties += 1.0;
    else
      tail += std::exp(beta * rel);
  }
  return ties == 1.0 ? std::log1p(tail) : std::log(ties + tail);
}

double LikelihoodData::log_S(double beta) const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw KernelError("log_S needs beta >= 0");
  return beta * log_x_max_ + log_S_shifted(beta);
}

double LikelihoodData::log_likelihood(double log_eta, double beta) const {
  if (!(beta > 0.0) || beta > kMaxLikelihoodBeta)
    throw KernelError("beta must lie in (0, 1e4]");
  const double m = static_cast<double>(m_);
  const double events = m * std::log(beta) + beta * m * log_eta +
                        (beta - 1.0) * sum_delta_log_x_;
  // sum_i (eta x_i)^beta; overflow gives -inf, the correct limit.
  const double cumulative = std::exp(beta * log_eta + log_S(beta));
  return events - cumulative;
}

double log_likelihood(const WeibullParams& params, const Dataset& d) {
  return LikelihoodData(d).log_likelihood(std::log(params.eta), params.beta);
}

double log_posterior_kernel(const WeibullParams& params, const PriorSpec& prior,
                            const Dataset& d) {
  const PriorSpec eta = in_eta_coordinates(prior);
  const double log_prior =
      -eta.p() / params.beta + eta.r() * std::log(params.eta) + eta.q() * std::log(params.beta);
  return log_prior + log_likelihood(params, d);
}

double log_normalizing_kernel(const WeibullParams& params, const PriorSpec& prior,
                              const Dataset& d) {
  return log_posterior_kernel(params, prior, d) + LikelihoodData(d).normalizing_offset();
}

double log_S(double beta, const Dataset& d) { return LikelihoodData(d).log_S(beta); }

MarginalIntegrand::MarginalIntegrand(const PriorSpec& prior, const Dataset& d)
    : prior_(in_eta_coordinates(prior)), data_(d) {}

double MarginalIntegrand::gamma_argument(double beta) const {
  return static_cast<double>(data_.m()) + (prior_.r() + 1.0) / beta;
}

bool MarginalIntegrand::has_inner_divergence() const {
  return prior_.r() < -1.0 || (prior_.r() == -1.0 && data_.m() == 0);
}

std::optional<double> MarginalIntegrand::inner_divergence_threshold() const {
  if (!has_inner_divergence()) return std::nullopt;
  if (data_.m() == 0) return std::numeric_limits<double>::infinity();
  return -(prior_.r() + 1.0) / static_cast<double>(data_.m());
}

MarginalIntegrandValue MarginalIntegrand::operator()(double beta) const {
  if (!(beta > 0.0) || !std::isfinite(beta))
    throw KernelError("marginal integrand needs finite beta > 0");
  const double a = gamma_argument(beta);
  if (!(a > 0.0)) return {std::numeric_limits<double>::infinity(), true};

  const double m = static_cast<double>(data_.m());
  const double r = prior_.r();
  const double q = prior_.q();
  double v = -data_.h() * beta - (r + 1.0) * data_.log_x_max() -
             a * data_.log_S_shifted(beta) + log_gamma(a);
  if (prior_.p() != 0.0) v -= prior_.p() / beta;
  if (m + q - 1.0 != 0.0) v += (m + q - 1.0) * std::log(beta);
  return {v, false};
}

MarginalIntegrandValue log_marginal_integrand(double beta, const PriorSpec& prior,
                                              const Dataset& d) {
  return MarginalIntegrand(prior, d)(beta);
}

}  // namespace wbpost
