#include "wbpost/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <thread>

#include "wbpost/kernel.hpp"
#include "wbpost/report.hpp"
#include "wbpost/sampler.hpp"

namespace wbpost::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void emit(const Json& report, std::ostream& out, std::ostream& err) {
  out << report.dump() << '\n';
  err << report.dump(2) << '\n';
}

std::string join(const std::vector<std::string>& args) {
  std::string s;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ' ';
    s += args[i];
  }
  return s;
}

std::uint64_t parse_seed(const std::string& text, const char* origin) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw UsageError(std::string("invalid seed '") + text + "' from " + origin);
  return v;
}

std::uint64_t default_seed() {
  const char* env = std::getenv(kSeedEnv);
  if (env == nullptr) return 1;
  return parse_seed(env, kSeedEnv);
}

Agreement agreement_of(const ProprietyVerdict& v, const std::optional<Convergence>& c) {
  if (v.status == ProprietyStatus::OutsideTheoremScope) return Agreement::gap;
  if (!c) return Agreement::ambiguous;
  const bool convergent = *c == Convergence::Convergent;
  return convergent == v.proper() ? Agreement::agree : Agreement::disagree;
}

int exit_for(const ProprietyVerdict& v, Agreement a) {
  switch (a) {
    case Agreement::gap: return kTheoremGap;
    case Agreement::agree: return v.proper() ? kSuccess : kImproper;
    default: return kInconclusive;
  }
}

std::string agreement_text(Agreement a) {
  switch (a) {
    case Agreement::agree: return "agrees-with-theorem";
    case Agreement::disagree: return "disagrees-with-theorem";
    case Agreement::gap: return "theorem gap";
    case Agreement::ambiguous: return "oracle inconclusive";
  }
  return "?";
}

struct Inputs {
  std::string prior_text;
  std::string data_path;
  std::string parametrization = "eta";
};

struct Loaded {
  PriorSpec prior{0, 0, 0};
  Dataset data{{{1.0, 1}}};
  DatasetSummary summary;
};

Loaded load(const Inputs& in) {
  const auto param = parse_parametrization(in.parametrization);
  Loaded l{parse_prior(in.prior_text, param), load_csv(in.data_path), {}};
  l.summary = summarize(l.data);
  return l;
}

Json base_report(const std::string& command, const std::vector<std::string>& args) {
  return Json{{"tool_version", kToolVersion}, {"command", command}, {"argv", join(args)}};
}

Json input_block(const Inputs& in, const Loaded& l) {
  Json j{{"prior_text", in.prior_text},
         {"prior", to_json(l.prior)},
         {"data", in.data_path},
         {"summary", to_json(l.summary)}};
  if (l.prior.parametrization() == Parametrization::theta)
    j["prior_eta"] = to_json(in_eta_coordinates(l.prior));
  return j;
}

int cmd_check(const Inputs& in, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  const auto l = load(in);
  const auto v = classify(l.prior, l.summary);
  Json rep = base_report("check", args);
  rep["input"] = input_block(in, l);
  rep["verdict"] = to_json(v);
  rep["provenance"] = "theorem";
  rep["moments"] = moment_table(l.prior, l.summary);
  emit(rep, out, err);
  switch (v.status) {
    case ProprietyStatus::ProperByTheorem: return kSuccess;
    case ProprietyStatus::ImproperByTheorem: return kImproper;
    case ProprietyStatus::OutsideTheoremScope: return kTheoremGap;
  }
  return kInconclusive;
}

int cmd_oracle(const Inputs& in, bool integrate, const std::vector<std::string>& args,
               std::ostream& out, std::ostream& err) {
  const auto l = load(in);
  Json rep = base_report(integrate ? "normalize" : "oracle", args);
  rep["input"] = input_block(in, l);
  const auto verdict = classify(l.prior, l.summary);
  rep["verdict"] = to_json(verdict);

  std::optional<Convergence> classification;
  try {
    if (integrate) {
      const auto res = normalizing_constant(l.prior, l.data);
      classification = res.report.classification;
      rep["oracle"] = to_json(res.report);
      if (res.constant) {
        rep["normalizing_constant"] = to_json(*res.constant);
        if (res.report.empirical) rep["normalizing_constant"]["empirical"] = true;
      } else {
        rep["normalizing_constant"] = nullptr;
        rep["divergence"] = to_string(res.report.classification);
      }
    } else {
      auto report = classify_convergence(MarginalIntegrand(l.prior, l.data));
      report.empirical = verdict.status == ProprietyStatus::OutsideTheoremScope;
      classification = report.classification;
      rep["oracle"] = to_json(report);
    }
  } catch (const AmbiguousConvergence& e) {
    auto partial = e.report;
    partial.empirical = verdict.status == ProprietyStatus::OutsideTheoremScope;
    rep["oracle"] = to_json(partial);
    rep["oracle"]["classification"] = "ambiguous";
    rep["oracle_error"] = e.what();
  } catch (const IntegrationError& e) {
    rep["integration_error"] = e.what();
    if (classification) {
      emit(rep, out, err);
      return kInconclusive;
    }
  }
  const auto a = agreement_of(verdict, classification);
  rep["agreement"] = agreement_text(a);
  emit(rep, out, err);
  return exit_for(verdict, a);
}

struct FitOptions {
  std::size_t chains = 4;
  std::size_t iterations = 20000;
  std::size_t warmup = 5000;
  std::optional<std::uint64_t> seed;
  double target_acceptance = 0.3;
  bool allow_empirical = false;
  std::string draws_out;
};

int refuse(Json rep, const std::string& why, int code, std::ostream& out, std::ostream& err) {
  rep["refused"] = true;
  rep["reason"] = why;
  emit(rep, out, err);
  return code;
}

int cmd_fit(const Inputs& in, const FitOptions& fo, const std::vector<std::string>& args,
            std::ostream& out, std::ostream& err) {
  SamplerConfig cfg;
  cfg.chains = fo.chains;
  cfg.iterations = fo.iterations;
  cfg.warmup = fo.warmup;
  cfg.seed = fo.seed ? *fo.seed : default_seed();
  cfg.target_acceptance = fo.target_acceptance;
  cfg.allow_empirical = fo.allow_empirical;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.iterations - cfg.warmup < 100)
    throw UsageError("at least 100 post-warmup iterations per chain are required");

  const auto l = load(in);
  Json rep = base_report("fit", args);
  rep["input"] = input_block(in, l);
  rep["seed"] = cfg.seed;
  rep["sampler"] = Json{{"chains", cfg.chains},
                        {"iterations", cfg.iterations},
                        {"warmup", cfg.warmup},
                        {"target_acceptance", cfg.target_acceptance}};
  const auto verdict = classify(l.prior, l.summary);
  rep["verdict"] = to_json(verdict);

  if (verdict.status == ProprietyStatus::ImproperByTheorem)
    return refuse(rep,
                  "posterior is improper (" + verdict.condition +
                      "); MCMC would return finite-looking summaries of a non-existent distribution",
                  kImproper, out, err);
  if (verdict.status == ProprietyStatus::OutsideTheoremScope) {
    if (!cfg.allow_empirical)
      return refuse(rep,
                    "propriety is not established by the theorem (" + verdict.condition +
                        "); rerun with --allow-empirical to rely on the numerical oracle",
                    kTheoremGap, out, err);
    try {
      auto report = classify_convergence(MarginalIntegrand(l.prior, l.data));
      report.empirical = true;
      rep["oracle"] = to_json(report);
      if (report.classification != Convergence::Convergent)
        return refuse(rep, "numerical oracle reports " + to_string(report.classification),
                      kImproper, out, err);
    } catch (const AmbiguousConvergence& e) {
      rep["oracle_error"] = e.what();
      return refuse(rep, "numerical oracle is inconclusive", kInconclusive, out, err);
    }
    rep["empirical"] = true;
  }

  const auto chains = run_chains(l.prior, l.data, cfg);
  const auto posterior = summarize_posterior(chains, l.prior, l.summary);
  rep["posterior"] = to_json(posterior);
  if (!fo.draws_out.empty()) {
    write_draws_csv(chains, fo.draws_out);
    rep["draws_file"] = Json{{"path", fo.draws_out},
                             {"layout", "chain,iteration,log_eta,log_beta; post-warmup only"}};
  }
  emit(rep, out, err);
  return kSuccess;
}

struct SimulateOptions {
  double eta = 1.0;
  double beta = 1.0;
  std::size_t n = 100;
  double censor_fraction = 0.0;
  std::optional<std::uint64_t> seed;
  std::string out_path;
};

int cmd_simulate(const SimulateOptions& so, const std::vector<std::string>& args,
                 std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = so.seed ? *so.seed : default_seed();
  Dataset d = [&] {
    try {
      return simulate_dataset(so.eta, so.beta, so.n, so.censor_fraction, seed);
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
  }();
  write_csv(d, so.out_path);
  Json rep = base_report("simulate", args);
  rep["seed"] = seed;
  rep["parameters"] = Json{{"eta", so.eta},
                           {"beta", so.beta},
                           {"n", so.n},
                           {"censor_fraction", so.censor_fraction},
                           {"censoring_rate", censoring_rate_for(so.eta, so.beta, so.censor_fraction)}};
  rep["out"] = so.out_path;
  rep["summary"] = to_json(summarize(d));
  emit(rep, out, err);
  return kSuccess;
}

struct SweepOptions {
  std::string r_grid = "-2,-1,0,1";
  std::string q_grid = "-3,-2,-1,0,1";
  std::string p_grid = "0,gamma";
  std::string suite = "builtin";
  std::string parametrization = "eta";
};

std::vector<NamedDataset> load_suite(const std::string& spec) {
  if (spec == "builtin") return builtin_suite();
  std::vector<NamedDataset> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = std::min(spec.find(',', start), spec.size());
    const std::string path = spec.substr(start, comma - start);
    if (path.empty()) throw UsageError("empty path in --data-suite");
    out.push_back({std::filesystem::path(path).stem().string(), load_csv(path)});
    start = comma + 1;
  }
  return out;
}

int cmd_sweep(const SweepOptions& so, const std::vector<std::string>& args, std::ostream& out,
              std::ostream& err) {
  std::vector<double> r, q, p;
  try {
    r = parse_grid(so.r_grid);
    q = parse_grid(so.q_grid);
    p = parse_grid(so.p_grid);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (r.empty() || q.empty() || p.empty()) throw UsageError("empty grid");
  const auto suite = load_suite(so.suite);
  const auto param = parse_parametrization(so.parametrization);
  const auto result = run_sweep(r, q, p, suite, param);

  Json rep = base_report("sweep", args);
  rep["grid"] = Json{{"r", r}, {"q", q}, {"p", p}, {"parametrization", so.parametrization}};
  Json suite_json = Json::array();
  for (const auto& s : suite)
    suite_json.push_back(Json{{"name", s.name}, {"summary", to_json(summarize(s.data))}});
  rep["data_suite"] = suite_json;

  Json rows = Json::array();
  for (const auto& row : result.rows) {
    Json j{{"index", row.index},
           {"dataset", row.dataset},
           {"r", row.prior.r()},
           {"q", row.prior.q()},
           {"p", row.prior.p()},
           {"verdict", to_json(row.verdict)},
           {"oracle", row.oracle ? to_string(row.oracle->classification) : "ambiguous"},
           {"empirical", row.verdict.status == ProprietyStatus::OutsideTheoremScope},
           {"agreement", to_string(row.agreement)},
           {"exit_code", exit_for(row.verdict, row.agreement)}};
    if (row.oracle) j["evidence"] = row.oracle->evidence;
    if (!row.oracle_note.empty()) j["oracle_note"] = row.oracle_note;
    rows.push_back(j);
  }
  rep["rows"] = rows;
  rep["summary"] = Json{{"rows", result.rows.size()},
                        {"gap_rows", result.gaps},
                        {"checked", result.checked},
                        {"agreed", result.agreed},
                        {"all_agree", result.all_agree()}};
  emit(rep, out, err);
  err << "agreement " << result.agreed << "/" << result.checked << " outside " << result.gaps
      << " gap rows\n";
  return result.all_agree() ? kSuccess : kInconclusive;
}

}  // namespace

std::string to_string(Agreement a) {
  switch (a) {
    case Agreement::agree: return "agree";
    case Agreement::disagree: return "disagree";
    case Agreement::gap: return "gap";
    case Agreement::ambiguous: return "ambiguous";
  }
  return "?";
}

std::vector<NamedDataset> builtin_suite() {
  return {
      {"m0_two_censored", Dataset({{1.0, 0}, {2.0, 0}})},
      {"m1_single_event", Dataset({{1.0, 0}, {2.0, 1}})},
      {"m2_distinct", Dataset({{1.0, 1}, {2.0, 1}})},
      {"m3_one_tie", Dataset({{0.5, 1}, {0.5, 1}, {2.0, 1}, {3.0, 0}})},
      {"m2_tied_larger_censored", Dataset({{1.0, 1}, {1.0, 1}, {3.0, 0}})},
  };
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    std::string tok = text.substr(start, comma - start);
    tok.erase(0, tok.find_first_not_of(' '));
    tok.erase(tok.find_last_not_of(' ') + 1);
    if (tok == "gamma") {
      out.push_back(kEulerGamma);
    } else {
      if (!tok.empty() && tok.front() == '+') tok.erase(0, 1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw std::invalid_argument("bad grid value '" + tok + "'");
      out.push_back(v);
    }
    start = comma + 1;
  }
  return out;
}

SweepResult run_sweep(const std::vector<double>& r_grid, const std::vector<double>& q_grid,
                      const std::vector<double>& p_grid, const std::vector<NamedDataset>& suite,
                      Parametrization parametrization, const OracleConfig& cfg) {
  SweepResult result;
  for (const auto& ds : suite)
    for (double r : r_grid)
      for (double q : q_grid)
        for (double p : p_grid) {
          SweepRow row;
          row.index = result.rows.size();
          row.prior = PriorSpec(r, q, p, parametrization);
          row.dataset = ds.name;
          result.rows.push_back(std::move(row));
        }

  std::vector<const Dataset*> data_of;
  for (const auto& ds : suite)
    for (std::size_t k = 0; k < r_grid.size() * q_grid.size() * p_grid.size(); ++k)
      data_of.push_back(&ds.data);

  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(result.rows.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < result.rows.size(); i = next++) {
      auto& row = result.rows[i];
      try {
        const Dataset& d = *data_of[i];
        row.verdict = classify(row.prior, summarize(d));
        try {
          row.oracle = classify_convergence(MarginalIntegrand(row.prior, d), cfg);
          row.oracle->empirical = row.verdict.status == ProprietyStatus::OutsideTheoremScope;
        } catch (const AmbiguousConvergence& e) {
          row.oracle_note = e.what();
        }
        row.agreement = agreement_of(
            row.verdict, row.oracle ? std::optional(row.oracle->classification) : std::nullopt);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads =
      std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, 16);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& f : failures)
    if (f) std::rethrow_exception(f);

  for (const auto& row : result.rows) {
    if (row.agreement == Agreement::gap) {
      ++result.gaps;
      continue;
    }
    ++result.checked;
    if (row.agreement == Agreement::agree) ++result.agreed;
  }
  return result;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Objective Bayesian analysis of right-censored Weibull data", "wbpost"};
  app.require_subcommand(1);

  Inputs check_in, norm_in, oracle_in, fit_in;
  auto add_inputs = [](CLI::App* sub, Inputs& in) {
    sub->add_option("--prior", in.prior_text, "catalog name or r,q,p")->required();
    sub->add_option("--data", in.data_path, "time,event CSV")->required();
    sub->add_option("--parametrization", in.parametrization, "eta or theta")
        ->check(CLI::IsMember({"eta", "theta"}));
  };
  auto* check = app.add_subcommand("check", "propriety verdict and moment table");
  add_inputs(check, check_in);
  auto* normalize = app.add_subcommand("normalize", "log normalizing constant");
  add_inputs(normalize, norm_in);
  auto* oracle = app.add_subcommand("oracle", "numerical convergence classification");
  add_inputs(oracle, oracle_in);

  FitOptions fo;
  std::uint64_t fit_seed = 0;
  auto* fit = app.add_subcommand("fit", "posterior sampling");
  add_inputs(fit, fit_in);
  fit->add_option("--chains", fo.chains);
  fit->add_option("--iters", fo.iterations);
  fit->add_option("--warmup", fo.warmup);
  auto* fit_seed_opt = fit->add_option("--seed", fit_seed);
  fit->add_option("--target-acceptance", fo.target_acceptance);
  fit->add_flag("--allow-empirical", fo.allow_empirical,
                "sample when the theorem is silent and the oracle reports convergence");
  fit->add_option("--draws-out", fo.draws_out, "write post-warmup draws as CSV");

  SweepOptions so;
  auto* sweep = app.add_subcommand("sweep", "theorem versus oracle over a prior grid");
  sweep->add_option("--r-grid", so.r_grid);
  sweep->add_option("--q-grid", so.q_grid);
  sweep->add_option("--p-grid", so.p_grid);
  sweep->add_option("--data-suite", so.suite, "'builtin' or comma list of CSV files");
  sweep->add_option("--parametrization", so.parametrization)
      ->check(CLI::IsMember({"eta", "theta"}));

  SimulateOptions sim;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "draw a censored Weibull sample");
  simulate->add_option("--eta", sim.eta)->required();
  simulate->add_option("--beta", sim.beta)->required();
  simulate->add_option("--n", sim.n)->required();
  simulate->add_option("--censor-fraction", sim.censor_fraction);
  auto* sim_seed_opt = simulate->add_option("--seed", sim_seed);
  simulate->add_option("--out", sim.out_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }
  if (fit_seed_opt->count()) fo.seed = fit_seed;
  if (sim_seed_opt->count()) sim.seed = sim_seed;

  try {
    if (check->parsed()) return cmd_check(check_in, args, out, err);
    if (normalize->parsed()) return cmd_oracle(norm_in, true, args, out, err);
    if (oracle->parsed()) return cmd_oracle(oracle_in, false, args, out, err);
    if (fit->parsed()) return cmd_fit(fit_in, fo, args, out, err);
    if (sweep->parsed()) return cmd_sweep(so, args, out, err);
    if (simulate->parsed()) return cmd_simulate(sim, args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const PriorError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const KernelError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInconclusive;
  }
  return kUsage;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace wbpost::cli
