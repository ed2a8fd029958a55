#include "wbpost/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "wbpost/kernel.hpp"

namespace wbpost {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::size_t chain) {
  return splitmix64(splitmix64(seed) ^ (0xD1B54A32D192ED03ULL * (chain + 1)));
}

// Log target in the sampled coordinates.
class Target {
 public:
  Target(const PriorSpec& prior, const Dataset& d, SamplingSpace space)
      : prior_(in_eta_coordinates(prior)), data_(d), space_(space) {}

  double operator()(const std::array<double, 2>& x) const {
    double log_eta = 0.0;
    double beta = 0.0;
    double log_beta = 0.0;
    if (space_ == SamplingSpace::log) {
      log_eta = x[0];
      log_beta = x[1];
      beta = std::exp(log_beta);
    } else {
      if (!(x[0] > 0.0) || !(x[1] > 0.0)) return kNegInf;
      log_eta = std::log(x[0]);
      beta = x[1];
      log_beta = std::log(beta);
    }
    if (!(beta > 0.0) || beta > kMaxLikelihoodBeta || !std::isfinite(log_eta)) return kNegInf;
    double v = data_.log_likelihood(log_eta, beta) - prior_.p() / beta +
               prior_.r() * log_eta + prior_.q() * log_beta;
    // Jacobian of (eta, beta) -> (log eta, log beta).
    if (space_ == SamplingSpace::log) v += log_eta + log_beta;
    return std::isnan(v) ? kNegInf : v;
  }

  const LikelihoodData& data() const { return data_; }

 private:
  PriorSpec prior_;
  LikelihoodData data_;
  SamplingSpace space_;
};

Chain run_one(const Target& target, const SamplerConfig& cfg, std::size_t index) {
  std::mt19937_64 rng(chain_seed(cfg.seed, index));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  const auto& data = target.data();
  double sum_x = 0.0;
  for (double lx : data.log_times()) sum_x += std::exp(lx);
  const double log_eta0 = std::log(static_cast<double>(data.m()) / sum_x);

  std::array<double, 2> x{log_eta0 + (unif(rng) - 0.5), unif(rng) - 0.5};
  std::array<double, 2> log_step{std::log(0.5), std::log(0.5)};
  if (cfg.space == SamplingSpace::natural) {
    x = {std::exp(x[0]), std::exp(x[1])};
    log_step = {std::log(0.2 * x[0]), std::log(0.2 * x[1])};
  }
  double current = target(x);

  Chain chain;
  chain.log_eta.reserve(cfg.iterations);
  chain.log_beta.reserve(cfg.iterations);
  std::array<std::size_t, 2> accepted{0, 0};

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const bool warm = it < cfg.warmup;
    for (int c = 0; c < 2; ++c) {
      auto proposal = x;
      proposal[c] += std::exp(log_step[c]) * normal(rng);
      const double cand = target(proposal);
      const double log_alpha = cand - current;
      const bool accept = log_alpha >= 0.0 || std::log(unif(rng)) < log_alpha;
      if (accept) {
        x = proposal;
        current = cand;
      }
      if (warm) {
        // Robbins-Monro step toward the target acceptance rate.
        const double gain = 1.0 / std::pow(static_cast<double>(it) + 10.0, 0.6);
        log_step[c] += gain * ((accept ? 1.0 : 0.0) - cfg.target_acceptance);
      } else if (accept) {
        ++accepted[c];
      }
    }
    if (cfg.space == SamplingSpace::log) {
      chain.log_eta.push_back(x[0]);
      chain.log_beta.push_back(x[1]);
    } else {
      chain.log_eta.push_back(std::log(x[0]));
      chain.log_beta.push_back(std::log(x[1]));
    }
  }
  const double post = static_cast<double>(cfg.iterations - cfg.warmup);
  chain.coordinate_acceptance = {accepted[0] / post, accepted[1] / post};
  chain.acceptance_rate = 0.5 * (chain.coordinate_acceptance[0] + chain.coordinate_acceptance[1]);
  chain.step_sizes = {std::exp(log_step[0]), std::exp(log_step[1])};
  return chain;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

std::vector<std::vector<double>> split(const std::vector<std::vector<double>>& chains) {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    // Odd lengths drop the middle draw.
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

std::vector<double> autocovariance(const std::vector<double>& x, std::size_t max_lag) {
  const double mu = mean_of(x);
  const std::size_t n = x.size();
  std::vector<double> acov(max_lag + 1, 0.0);
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - mu) * (x[i + lag] - mu);
    acov[lag] = s / static_cast<double>(n);
  }
  return acov;
}

Quantiles quantiles_of(const std::vector<double>& sorted) {
  Quantiles q;
  for (std::size_t i = 0; i < kReportProbs.size(); ++i)
    q.values[i] = sorted_quantile(sorted, kReportProbs[i]);
  return q;
}

}  // namespace

void SamplerConfig::validate() const {
  if (chains < 2) throw std::invalid_argument("at least two chains are required");
  if (iterations == 0 || warmup >= iterations)
    throw std::invalid_argument("warmup must be smaller than iterations");
  if (!(target_acceptance > 0.0 && target_acceptance < 1.0))
    throw std::invalid_argument("target_acceptance must lie in (0,1)");
}

std::vector<std::vector<double>> ChainSet::post_warmup_draws(int coordinate) const {
  std::vector<std::vector<double>> out;
  for (const auto& c : chains) {
    const auto& v = coordinate == 0 ? c.log_eta : c.log_beta;
    out.emplace_back(v.begin() + static_cast<std::ptrdiff_t>(warmup), v.end());
  }
  return out;
}

ChainSet run_chains(const PriorSpec& prior, const Dataset& d, const SamplerConfig& cfg) {
  cfg.validate();
  const auto verdict = classify(prior, summarize(d));
  if (verdict.status == ProprietyStatus::ImproperByTheorem)
    throw SamplerRefusal("refusing to sample: " + to_string(verdict.status) + " (" + verdict.condition +
                             "); MCMC output would be meaningless",
                         verdict);
  if (verdict.status == ProprietyStatus::OutsideTheoremScope && !cfg.allow_empirical)
    throw SamplerRefusal("refusing to sample: " + to_string(verdict.status) + " (" + verdict.condition +
                             "); an explicit empirical override is required",
                         verdict);

  const Target target(prior, d, cfg.space);
  std::vector<std::future<Chain>> jobs;
  for (std::size_t c = 0; c < cfg.chains; ++c)
    jobs.push_back(std::async(std::launch::async,
                              [&target, &cfg, c] { return run_one(target, cfg, c); }));
  ChainSet out;
  out.iterations = cfg.iterations;
  out.warmup = cfg.warmup;
  for (auto& j : jobs) out.chains.push_back(j.get());
  return out;
}

void write_draws_csv(const ChainSet& chains, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "chain,iteration,log_eta,log_beta\n";
  for (std::size_t c = 0; c < chains.chains.size(); ++c) {
    const auto& ch = chains.chains[c];
    for (std::size_t i = chains.warmup; i < chains.iterations; ++i)
      out << c << ',' << i - chains.warmup << ',' << ch.log_eta[i] << ',' << ch.log_beta[i]
          << '\n';
  }
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
  const auto halves = split(chains);
  const double n = static_cast<double>(halves.front().size());
  const double m = static_cast<double>(halves.size());
  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    means.push_back(mean_of(h));
    w += variance_of(h, means.back());
  }
  w /= m;
  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= n / (m - 1.0);
  const double var_plus = (n - 1.0) / n * w + b / n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
  const auto halves = split(chains);
  const std::size_t n = halves.front().size();
  const double m = static_cast<double>(halves.size());
  const double nd = static_cast<double>(n);

  std::vector<double> means;
  double w = 0.0;
  for (const auto& h : halves) {
    means.push_back(mean_of(h));
    w += variance_of(h, means.back());
  }
  w /= m;
  const double grand = mean_of(means);
  double b = 0.0;
  for (double mu : means) b += (mu - grand) * (mu - grand);
  b *= nd / (m - 1.0);
  const double var_plus = (nd - 1.0) / nd * w + b / nd;

  // Autocovariances grow lazily: RWM chains decorrelate within a few hundred lags.
  std::size_t max_lag = std::min<std::size_t>(n - 1, 256);
  std::vector<std::vector<double>> acov;
  auto compute = [&] {
    acov.clear();
    for (const auto& h : halves) acov.push_back(autocovariance(h, max_lag));
  };
  compute();
  auto rho = [&](std::size_t t) {
    double mean_acov = 0.0;
    for (const auto& a : acov) mean_acov += a[t];
    mean_acov /= m;
    // Chain-level variance uses the n-1 denominator, autocovariances use n.
    return 1.0 - (w - mean_acov * nd / (nd - 1.0)) / var_plus;
  };

  double tau = -1.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < n; t += 2) {
    if (t + 1 > max_lag) {
      max_lag = std::min<std::size_t>(n - 1, max_lag * 2);
      compute();
      if (t + 1 > max_lag) break;
    }
    double pair = rho(t) + rho(t + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);  // initial monotone sequence
    prev_pair = pair;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1.0 / std::log10(m * nd));
  return m * nd / tau;
}

double sorted_quantile(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) throw SummaryError("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double Quantiles::at(double prob) const {
  for (std::size_t i = 0; i < kReportProbs.size(); ++i)
    if (kReportProbs[i] == prob) return values[i];
  throw SummaryError("quantile level not reported");
}

PosteriorReport summarize_posterior(const ChainSet& chains, const PriorSpec& prior,
                                    const DatasetSummary& summary) {
  if (chains.chains.size() < 2) throw SummaryError("at least two chains are required");
  if (chains.post_warmup() < 100)
    throw SummaryError("fewer than 100 post-warmup draws per chain");

  const auto log_eta = chains.post_warmup_draws(0);
  const auto log_beta = chains.post_warmup_draws(1);
  std::vector<std::vector<double>> beta_draws = log_beta;
  for (auto& c : beta_draws)
    for (double& v : c) v = std::exp(v);

  std::vector<double> pooled_log_eta;
  std::vector<double> pooled_beta;
  for (const auto& c : log_eta) pooled_log_eta.insert(pooled_log_eta.end(), c.begin(), c.end());
  for (const auto& c : beta_draws) pooled_beta.insert(pooled_beta.end(), c.begin(), c.end());

  PosteriorReport rep;
  rep.draws = pooled_beta.size();
  rep.diagnostics.rhat_log_eta = split_rhat(log_eta);
  rep.diagnostics.rhat_log_beta = split_rhat(log_beta);
  rep.diagnostics.ess_log_eta = effective_sample_size(log_eta);
  rep.diagnostics.ess_log_beta = effective_sample_size(log_beta);
  rep.diagnostics.ess_beta = effective_sample_size(beta_draws);
  for (const auto& c : chains.chains) rep.diagnostics.acceptance.push_back(c.acceptance_rate);

  // Shape parameter: moments only when the theorem says they exist.
  const auto m1 = moment_finiteness(prior, summary, MomentParameter::beta, 1.0);
  const auto m2 = moment_finiteness(prior, summary, MomentParameter::beta, 2.0);
  const double mu = mean_of(pooled_beta);
  const double sd = std::sqrt(variance_of(pooled_beta, mu));
  if (m1.status == MomentStatus::Finite) {
    rep.beta.mean = mu;
    rep.beta.mcse_mean = sd / std::sqrt(rep.diagnostics.ess_beta);
  } else {
    rep.beta.warnings.push_back("posterior mean of beta not reported: finiteness is " +
                                to_string(m1.status));
  }
  if (m2.status == MomentStatus::Finite)
    rep.beta.sd = sd;
  else
    rep.beta.warnings.push_back("posterior sd of beta not reported: finiteness is " +
                                to_string(m2.status));
  std::sort(pooled_beta.begin(), pooled_beta.end());
  rep.beta.quantiles = quantiles_of(pooled_beta);

  // Scale parameters: quantiles on the log scale, so theta quantiles are
  // exactly the reversed reciprocals of eta quantiles.
  std::sort(pooled_log_eta.begin(), pooled_log_eta.end());
  std::vector<double> pooled_log_theta(pooled_log_eta.rbegin(), pooled_log_eta.rend());
  for (double& v : pooled_log_theta) v = -v;
  for (std::size_t i = 0; i < kReportProbs.size(); ++i) {
    rep.eta.quantiles.values[i] = std::exp(sorted_quantile(pooled_log_eta, kReportProbs[i]));
    rep.theta.quantiles.values[i] = std::exp(sorted_quantile(pooled_log_theta, kReportProbs[i]));
  }
  const auto eta_moment = moment_finiteness(prior, summary, MomentParameter::eta, 1.0);
  const auto theta_moment = moment_finiteness(prior, summary, MomentParameter::theta, 1.0);
  auto gate_text = [](const char* name, MomentStatus s) {
    if (s == MomentStatus::Infinite)
      return std::string("posterior moments of ") + name +
             " are infinite; mean and sd are not reported, use quantiles";
    return std::string("posterior moments of ") + name + " are not reported (finiteness " +
           to_string(s) + "); use quantiles";
  };
  rep.eta.warning = gate_text("eta", eta_moment.status);
  rep.theta.warning = gate_text("theta", theta_moment.status);

  const double top = sorted_quantile(pooled_log_eta, 0.999);
  const double decades = (pooled_log_eta.back() - top) / std::log(10.0);
  if (decades > 2.0) {
    std::ostringstream os;
    os.precision(3);
    os << "the top 0.1% of eta draws spans " << decades
       << " decades; the right tail is heavy, rely on quantiles";
    rep.tail_note = os.str();
  }
  return rep;
}

}  // namespace wbpost
