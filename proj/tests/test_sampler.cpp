#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "test_util.hpp"
#include "wbpost/sampler.hpp"

using namespace wbpost;

namespace {

const Dataset two({{1, 1}, {2, 1}});

SamplerConfig config(std::size_t iters, std::size_t warmup, std::uint64_t seed) {
  SamplerConfig c;
  c.iterations = iters;
  c.warmup = warmup;
  c.seed = seed;
  return c;
}

std::vector<double> pooled_beta(const ChainSet& cs) {
  std::vector<double> out;
  for (const auto& c : cs.post_warmup_draws(1))
    for (double v : c) out.push_back(std::exp(v));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> pooled_log_eta(const ChainSet& cs) {
  std::vector<double> out;
  for (const auto& c : cs.post_warmup_draws(0)) out.insert(out.end(), c.begin(), c.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Monte-Carlo standard error of a sample quantile: local spread of the
// quantile function times the binomial standard error at the given ESS.
double quantile_se(const std::vector<double>& sorted, double p, double ess) {
  const double slope = (sorted_quantile(sorted, p + 0.02) - sorted_quantile(sorted, p - 0.02)) / 0.04;
  return slope * std::sqrt(p * (1 - p) / ess);
}

}  // namespace

TEST_CASE("config validation") {
  SamplerConfig c;
  c.chains = 1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.warmup = c.iterations;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SamplerConfig{};
  c.target_acceptance = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(SamplerConfig{}.validate());
}

TEST_CASE("refusals") {
  try {
    run_chains(catalog("uniform"), two, config(1000, 500, 1));
    FAIL("expected refusal");
  } catch (const SamplerRefusal& e) {
    CHECK(std::string(e.what()).find("ImproperByTheorem") != std::string::npos);
    CHECK(e.verdict.status == ProprietyStatus::ImproperByTheorem);
  }
  CHECK_THROWS_AS(run_chains(catalog("mdi"), two, config(1000, 500, 1)), SamplerRefusal);
  CHECK_THROWS_AS(run_chains({-1, 0, 1}, two, config(1000, 500, 1)), SamplerRefusal);
  auto allowed = config(1000, 500, 1);
  allowed.allow_empirical = true;
  CHECK_NOTHROW(run_chains({-1, 0, 1}, two, allowed));
}

TEST_CASE("determinism and shape") {
  const auto a = run_chains(catalog("jeffreys"), two, config(2000, 500, 42));
  const auto b = run_chains(catalog("jeffreys"), two, config(2000, 500, 42));
  const auto c = run_chains(catalog("jeffreys"), two, config(2000, 500, 43));
  REQUIRE(a.chains.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(a.chains[i].log_eta == b.chains[i].log_eta);
    CHECK(a.chains[i].log_beta == b.chains[i].log_beta);
    CHECK(a.chains[i].log_eta.size() == 2000);
    CHECK(std::all_of(a.chains[i].log_beta.begin(), a.chains[i].log_beta.end(),
                      [](double v) { return std::isfinite(v); }));
  }
  CHECK(a.chains[0].log_beta != c.chains[0].log_beta);
  // Chains get distinct sub-seeds.
  CHECK(a.chains[0].log_beta != a.chains[1].log_beta);
  CHECK(a.post_warmup() == 1500);
}

TEST_CASE("two-point fixture: adaptation, beta mean, quantile symmetry") {
  const auto cs = run_chains(catalog("jeffreys"), two, config(20000, 5000, 11));
  for (const auto& c : cs.chains) {
    CHECK(c.acceptance_rate >= 0.15);
    CHECK(c.acceptance_rate <= 0.5);
  }
  const auto rep = summarize_posterior(cs, catalog("jeffreys"), summarize(two));
  REQUIRE(rep.beta.mean);
  REQUIRE(rep.beta.mcse_mean);
  REQUIRE(rep.beta.sd);
  // pi^2 / (6 ln^2 2), from the quadrature ratio.
  const double want = 3.423714742537303;
  INFO("mean " << *rep.beta.mean << " mcse " << *rep.beta.mcse_mean);
  CHECK(std::abs(*rep.beta.mean - want) <= 3 * *rep.beta.mcse_mean);
  CHECK(*rep.beta.sd == doctest::Approx(2.126261298956117).epsilon(0.1));
  CHECK(rep.draws == 60000);

  for (std::size_t i = 0; i < kReportProbs.size(); ++i) {
    const double theta = rep.theta.quantiles.values[i];
    const double eta_mirror = rep.eta.quantiles.values[kReportProbs.size() - 1 - i];
    CHECK(std::abs(theta * eta_mirror - 1.0) <= 1e-12);
  }
  CHECK(rep.eta.warning.find("infinite") != std::string::npos);
  CHECK(rep.theta.warning.find("infinite") != std::string::npos);
}

TEST_CASE("heavy eta tail is flagged") {
  // Two events: eta has no finite mean and its draws span many decades.
  const auto cs = run_chains(catalog("jeffreys"), two, config(20000, 5000, 11));
  const auto rep = summarize_posterior(cs, catalog("jeffreys"), summarize(two));
  const auto le = pooled_log_eta(cs);
  const double decades = (le.back() - sorted_quantile(le, 0.999)) / std::log(10.0);
  CHECK(rep.tail_note.has_value() == (decades > 2.0));
}

TEST_CASE("empirical override: beta moments are withheld") {
  auto cfg = config(2000, 500, 5);
  cfg.allow_empirical = true;
  const PriorSpec gap(-1, 0, 1);
  const auto cs = run_chains(gap, two, cfg);
  const auto rep = summarize_posterior(cs, gap, summarize(two));
  CHECK_FALSE(rep.beta.mean.has_value());
  CHECK_FALSE(rep.beta.sd.has_value());
  CHECK(rep.beta.warnings.size() == 2);
}

TEST_CASE("log-coordinate Jacobian: natural-coordinate sampling agrees") {
  const auto d = load_csv(testutil::fixture("sim200.csv"));
  auto cfg = config(20000, 5000, 8);
  const auto log_run = run_chains(catalog("jeffreys"), d, cfg);
  cfg.space = SamplingSpace::natural;
  const auto nat_run = run_chains(catalog("jeffreys"), d, cfg);

  const auto a = summarize_posterior(log_run, catalog("jeffreys"), summarize(d));
  const auto b = summarize_posterior(nat_run, catalog("jeffreys"), summarize(d));
  const auto ba = pooled_beta(log_run);
  const auto bb = pooled_beta(nat_run);
  for (double p : {0.25, 0.5, 0.75}) {
    const double se = std::hypot(quantile_se(ba, p, a.diagnostics.ess_beta),
                                 quantile_se(bb, p, b.diagnostics.ess_beta));
    CHECK(std::abs(a.beta.quantiles.at(p) - b.beta.quantiles.at(p)) < 3 * se);
  }
  const auto ea = pooled_log_eta(log_run);
  const auto eb = pooled_log_eta(nat_run);
  const double se = std::hypot(quantile_se(ea, 0.5, a.diagnostics.ess_log_eta),
                               quantile_se(eb, 0.5, b.diagnostics.ess_log_eta));
  CHECK(std::abs(sorted_quantile(ea, 0.5) - sorted_quantile(eb, 0.5)) < 3 * se);
}

TEST_CASE("beta draws are invariant to rescaling the data") {
  const auto d = load_csv(testutil::fixture("sim200.csv"));
  const auto a_run = run_chains(catalog("jeffreys"), d, config(20000, 5000, 21));
  const auto b_run = run_chains(catalog("jeffreys"), d.scaled(3.0), config(20000, 5000, 22));
  const auto a = summarize_posterior(a_run, catalog("jeffreys"), summarize(d));
  const auto b = summarize_posterior(b_run, catalog("jeffreys"), summarize(d.scaled(3.0)));
  const auto sa = pooled_beta(a_run);
  const auto sb = pooled_beta(b_run);
  for (double p : kReportProbs) {
    const double se = std::hypot(quantile_se(sa, p, a.diagnostics.ess_beta),
                                 quantile_se(sb, p, b.diagnostics.ess_beta));
    INFO("p=" << p);
    CHECK(std::abs(a.beta.quantiles.at(p) - b.beta.quantiles.at(p)) < 3 * se);
  }
  // eta scales by 1/3 instead.
  CHECK(a.eta.quantiles.at(0.5) / b.eta.quantiles.at(0.5) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("split R-hat and ESS on synthetic chains") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0, 1);
  std::vector<std::vector<double>> iid(4, std::vector<double>(5000));
  for (auto& c : iid)
    for (double& v : c) v = z(rng);
  CHECK(split_rhat(iid) < 1.01);
  CHECK(effective_sample_size(iid) == doctest::Approx(20000).epsilon(0.1));

  // AR(1) with phi: integrated autocorrelation time (1 + phi) / (1 - phi).
  const double phi = 0.8;
  std::vector<std::vector<double>> ar(4, std::vector<double>(20000));
  for (auto& c : ar) {
    double x = z(rng) / std::sqrt(1 - phi * phi);
    for (double& v : c) {
      x = phi * x + z(rng);
      v = x;
    }
  }
  CHECK(effective_sample_size(ar) == doctest::Approx(80000 * (1 - phi) / (1 + phi)).epsilon(0.15));

  // Chains stuck at different levels.
  auto shifted = iid;
  for (double& v : shifted[0]) v += 3;
  CHECK(split_rhat(shifted) > 1.1);
}

TEST_CASE("sorted_quantile is type 7") {
  const std::vector<double> v = {1, 2, 3, 4};
  CHECK(sorted_quantile(v, 0.0) == 1);
  CHECK(sorted_quantile(v, 1.0) == 4);
  CHECK(sorted_quantile(v, 0.5) == doctest::Approx(2.5));
  CHECK(sorted_quantile(v, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS_AS(sorted_quantile({}, 0.5), SummaryError);
}

TEST_CASE("summarize_posterior needs 100 post-warmup draws per chain") {
  const auto cs = run_chains(catalog("jeffreys"), two, config(150, 100, 1));
  CHECK_THROWS_AS(summarize_posterior(cs, catalog("jeffreys"), summarize(two)), SummaryError);
}

TEST_CASE("draws csv layout") {
  const auto cs = run_chains(catalog("jeffreys"), two, config(300, 100, 9));
  const auto path = std::filesystem::temp_directory_path() / "wbpost_draws.csv";
  write_draws_csv(cs, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "chain,iteration,log_eta,log_beta");
  std::size_t rows = 0;
  std::string first;
  while (std::getline(in, line)) {
    if (rows == 0) first = line;
    ++rows;
  }
  CHECK(rows == 4 * 200);
  CHECK(first.rfind("0,0,", 0) == 0);
  std::filesystem::remove(path);
}
