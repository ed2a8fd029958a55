#pragma once

// Adaptive random-walk Metropolis on (log eta, log beta) with a moment gate
// on the reported summaries.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbpost/data.hpp"
#include "wbpost/prior.hpp"
#include "wbpost/propriety.hpp"

namespace wbpost {

/// `natural` samples (eta, beta) directly and exists to cross-check the
/// log-coordinate Jacobian.
enum class SamplingSpace { log, natural };

struct SamplerConfig {
  std::size_t chains = 4;
  std::size_t iterations = 20000;
  std::size_t warmup = 5000;
  std::uint64_t seed = 1;
  double target_acceptance = 0.3;
  SamplingSpace space = SamplingSpace::log;
  // Permits sampling when the theorem is silent (OutsideTheoremScope). The
  // caller is responsible for having checked the oracle.
  bool allow_empirical = false;

  void validate() const;
};

struct Chain {
  // All iterations, warmup included.
  std::vector<double> log_eta;
  std::vector<double> log_beta;
  // Post-warmup acceptance, per coordinate update and overall.
  std::array<double, 2> coordinate_acceptance{};
  double acceptance_rate = 0.0;
  // Frozen proposal scales (log-coordinate or natural units).
  std::array<double, 2> step_sizes{};
};

struct ChainSet {
  std::vector<Chain> chains;
  std::size_t iterations = 0;
  std::size_t warmup = 0;

  std::size_t post_warmup() const { return iterations - warmup; }
  /// Post-warmup draws of one coordinate (0 = log eta, 1 = log beta) per chain.
  std::vector<std::vector<double>> post_warmup_draws(int coordinate) const;
};

class SamplerRefusal : public std::runtime_error {
 public:
  SamplerRefusal(const std::string& what, ProprietyVerdict v)
      : std::runtime_error(what), verdict(std::move(v)) {}
  ProprietyVerdict verdict;
};

/// Refuses (SamplerRefusal) unless the posterior is proper by the theorem,
/// or the theorem is silent and cfg.allow_empirical is set.
ChainSet run_chains(const PriorSpec& prior, const Dataset& d, const SamplerConfig& cfg);

/// Post-warmup draws as CSV: chain,iteration,log_eta,log_beta; iteration
/// counts from 0 at the first post-warmup draw.
void write_draws_csv(const ChainSet& chains, const std::filesystem::path& path);

/// Split-R-hat (each chain halved).
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Multi-chain effective sample size on split chains with Geyer's initial
/// monotone sequence.
double effective_sample_size(const std::vector<std::vector<double>>& chains);

/// Linear-interpolation sample quantile (Hyndman-Fan type 7) of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double prob);

inline constexpr std::array<double, 5> kReportProbs = {0.025, 0.25, 0.5, 0.75, 0.975};

struct Quantiles {
  std::array<double, 5> values{};
  double at(double prob) const;
};

struct ShapeSummary {
  // Present only when the corresponding moment is finite.
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> mcse_mean;
  Quantiles quantiles;
  std::vector<std::string> warnings;
};

/// Eta or theta: quantiles only. There is deliberately no mean or sd member.
struct ScaleSummary {
  Quantiles quantiles;
  std::string warning;
};

struct Diagnostics {
  double rhat_log_eta = 0.0;
  double rhat_log_beta = 0.0;
  double ess_log_eta = 0.0;
  double ess_log_beta = 0.0;
  double ess_beta = 0.0;
  std::vector<double> acceptance;
};

struct PosteriorReport {
  ShapeSummary beta;
  ScaleSummary eta;
  ScaleSummary theta;
  Diagnostics diagnostics;
  std::optional<std::string> tail_note;
  std::size_t draws = 0;
};

class SummaryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

PosteriorReport summarize_posterior(const ChainSet& chains, const PriorSpec& prior,
                                    const DatasetSummary& summary);

}  // namespace wbpost
