#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "test_util.hpp"
#include "wbpost/cli.hpp"

using nlohmann::json;
using testutil::fixture;

namespace {

struct Outcome {
  int code = -1;
  json report;
  std::string out;
  std::string err;
};

Outcome call(std::vector<std::string> args) {
  std::ostringstream out, err;
  Outcome o;
  o.code = wbpost::cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  if (!o.out.empty() && o.out.front() == '{') o.report = json::parse(o.out);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kTwo = fixture("two_points.csv");

}  // namespace

TEST_CASE("check") {
  auto o = call({"check", "--prior", "jeffreys", "--data", kTwo});
  CHECK(o.code == 0);
  CHECK(o.report["verdict"]["status"] == "ProperByTheorem");
  CHECK(o.report["moments"].size() == 6);
  CHECK(o.report["provenance"] == "theorem");

  o = call({"check", "--prior", "mdi", "--data", kTwo});
  CHECK(o.code == 2);
  CHECK(o.report["verdict"]["status"] == "ImproperByTheorem");
  CHECK(o.report["verdict"]["theorem_item"] == "i");

  o = call({"check", "--prior=-1,0,1", "--data", kTwo});
  CHECK(o.code == 3);
  CHECK(o.report["verdict"]["status"] == "OutsideTheoremScope");
}

TEST_CASE("check: theta parametrization") {
  auto o = call({"check", "--prior=-1,0,0", "--parametrization", "theta", "--data", kTwo});
  CHECK(o.code == 0);
  CHECK(o.report["verdict"]["theorem_item"] == "ii_theta");
  CHECK(o.report["input"]["prior_eta"]["r"] == -1.0);
  o = call({"check", "--prior=0,0,0", "--parametrization", "theta", "--data", kTwo});
  CHECK(o.code == 2);
  CHECK(o.report["input"]["prior_eta"]["r"] == -2.0);
}

TEST_CASE("parse failures exit 1") {
  CHECK(call({"check", "--prior", "nope", "--data", kTwo}).code == 1);
  CHECK(call({"check", "--prior", "jeffreys", "--data", "/no/such.csv"}).code == 1);
  CHECK(call({"check", "--prior", "jeffreys"}).code == 1);
  CHECK(call({"fit", "--prior", "jeffreys"}).code == 1);
  CHECK(call({}).code == 1);
  CHECK(call({"frobnicate"}).code == 1);
  CHECK(call({"check", "--prior", "jeffreys", "--data", kTwo, "--parametrization", "phi"}).code == 1);
  const auto bad = std::filesystem::temp_directory_path() / "wbpost_bad.csv";
  std::ofstream(bad) << "time,event\n-1.0,1\n";
  const auto o = call({"check", "--prior", "jeffreys", "--data", bad.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("non-positive time at row 1") != std::string::npos);
  std::filesystem::remove(bad);
}

TEST_CASE("help exits 0") { CHECK(call({"--help"}).code == 0); }

TEST_CASE("normalize") {
  auto o = call({"normalize", "--prior", "jeffreys", "--data", kTwo});
  CHECK(o.code == 0);
  CHECK(o.report["normalizing_constant"]["log_d"].get<double>() ==
        doctest::Approx(0.3665129205816643).epsilon(1e-8));
  o = call({"normalize", "--prior", "jeffreys_rule", "--data", kTwo});
  CHECK(o.report["normalizing_constant"]["log_d"].get<double>() ==
        doctest::Approx(-0.3266342599782810).epsilon(1e-8));
  o = call({"normalize", "--prior", "uniform", "--data", kTwo});
  CHECK(o.code == 2);
  CHECK(o.report["normalizing_constant"].is_null());
  CHECK(o.report.contains("divergence"));
}

TEST_CASE("oracle") {
  auto o = call({"oracle", "--prior", "jeffreys", "--data", kTwo});
  CHECK(o.code == 0);
  CHECK(o.report["oracle"]["classification"] == "Convergent");
  CHECK(o.report["agreement"] == "agrees-with-theorem");

  o = call({"oracle", "--prior=-1,0,1", "--data", kTwo});
  CHECK(o.code == 3);
  CHECK(o.report["agreement"] == "theorem gap");
  CHECK(o.report["oracle"]["empirical"] == true);

  o = call({"oracle", "--prior=-2,0,0", "--data", kTwo});
  CHECK(o.code == 2);
  CHECK(o.report["oracle"]["classification"] == "DivergentInner");
}

TEST_CASE("oracle: disagreement with the theorem exits 4") {
  const auto o = call({"oracle", "--prior", "jeffreys", "--data", fixture("censored_max_single_event.csv")});
  CHECK(o.code == 4);
  CHECK(o.report["agreement"] == "disagrees-with-theorem");
}

TEST_CASE("fit refusals produce no draws") {
  const auto draws = std::filesystem::temp_directory_path() / "wbpost_refused_draws.csv";
  std::filesystem::remove(draws);
  for (const char* prior : {"uniform", "mdi"}) {
    const auto o = call({"fit", "--prior", prior, "--data", fixture("sim200.csv"), "--draws-out", draws.string()});
    CHECK(o.code == 2);
    CHECK(o.report["refused"] == true);
    CHECK_FALSE(o.report.contains("posterior"));
    CHECK_FALSE(std::filesystem::exists(draws));
  }
  const auto gap = call({"fit", "--prior=-1,0,1", "--data", kTwo});
  CHECK(gap.code == 3);
  CHECK(gap.report["refused"] == true);
}

TEST_CASE("fit: empirical override") {
  const auto o = call({"fit", "--prior=-1,0,1", "--data", kTwo, "--allow-empirical", "--iters", "600",
                       "--warmup", "300", "--seed", "4"});
  CHECK(o.code == 0);
  CHECK(o.report["empirical"] == true);
  CHECK(o.report["oracle"]["classification"] == "Convergent");
  CHECK_FALSE(o.report["posterior"]["beta"].contains("mean"));
}

TEST_CASE("fit: report and draws") {
  const auto draws = std::filesystem::temp_directory_path() / "wbpost_fit_draws.csv";
  const std::vector<std::string> args = {"fit", "--prior", "jeffreys", "--data", fixture("sim200.csv"),
                                         "--chains", "4", "--iters", "3000", "--warmup", "1000",
                                         "--seed", "11", "--draws-out", draws.string()};
  const auto a = call(args);
  CHECK(a.code == 0);
  CHECK(a.report["seed"] == 11);
  CHECK(a.report["posterior"]["beta"].contains("mean"));
  CHECK_FALSE(a.report["posterior"]["eta"].contains("mean"));
  CHECK(a.report["posterior"]["eta"].contains("quantiles"));
  CHECK(std::filesystem::exists(draws));
  const auto first = slurp(draws);
  const auto b = call(args);
  CHECK(a.out == b.out);
  CHECK(slurp(draws) == first);
  std::filesystem::remove(draws);
  CHECK(call({"fit", "--prior", "jeffreys", "--data", kTwo, "--iters", "150", "--warmup", "100"}).code == 1);
  CHECK(call({"fit", "--prior", "jeffreys", "--data", kTwo, "--chains", "1"}).code == 1);
}

TEST_CASE("fit: seed from the environment") {
  const std::vector<std::string> args = {"fit", "--prior", "jeffreys", "--data", kTwo, "--iters", "400", "--warmup", "200"};
  setenv(wbpost::cli::kSeedEnv, "77", 1);
  const auto a = call(args);
  unsetenv(wbpost::cli::kSeedEnv);
  CHECK(a.report["seed"] == 77);
  const auto b = call(args);
  CHECK(b.report["seed"] == 1);
  setenv(wbpost::cli::kSeedEnv, "abc", 1);
  CHECK(call(args).code == 1);
  unsetenv(wbpost::cli::kSeedEnv);
}

TEST_CASE("sweep") {
  auto o = call({"sweep"});
  CHECK(o.code == 0);
  CHECK(o.report["rows"].size() == 200);
  CHECK(o.report["summary"]["agreed"] == o.report["summary"]["checked"]);
  CHECK(o.report["summary"]["gap_rows"].get<int>() > 0);
  for (const auto& row : o.report["rows"])
    if (row["agreement"] == "gap") CHECK(row["exit_code"] == 3);
  CHECK(o.err.find("agreement ") != std::string::npos);

  o = call({"sweep", "--r-grid", "0"});
  CHECK(o.code == 0);
  for (const auto& row : o.report["rows"]) {
    CHECK(row["verdict"]["status"] == "ImproperByTheorem");
    CHECK(row["oracle"].get<std::string>().rfind("Divergent", 0) == 0);
  }

  CHECK(call({"sweep", "--r-grid", ""}).code == 1);
  CHECK(call({"sweep", "--q-grid", "1,,2"}).code == 1);
  o = call({"sweep", "--r-grid=-1", "--q-grid", "0", "--p-grid", "0", "--data-suite", kTwo + "," + fixture("three_censored.csv")});
  CHECK(o.code == 0);
  CHECK(o.report["rows"].size() == 2);
  CHECK(o.report["rows"][0]["dataset"] == "two_points");
}

TEST_CASE("sweep output is deterministic") { CHECK(call({"sweep"}).out == call({"sweep"}).out); }

TEST_CASE("simulate") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = (dir / "wbpost_sim_a.csv").string();
  const auto b = (dir / "wbpost_sim_b.csv").string();
  const std::vector<std::string> base = {"simulate", "--eta", "1", "--beta", "1", "--n", "100",
                                         "--censor-fraction", "0", "--seed", "7", "--out"};
  auto args = base;
  args.push_back(a);
  const auto o = call(args);
  CHECK(o.code == 0);
  const auto d = wbpost::load_csv(a);
  const auto s = wbpost::summarize(d);
  CHECK(s.n == 100);
  CHECK(s.m == 100);
  args = base;
  args.push_back(b);
  call(args);
  CHECK(slurp(a) == slurp(b));
  CHECK(call({"simulate", "--eta", "-1", "--beta", "1", "--n", "10", "--out", a}).code == 1);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("installed binary exit codes") {
  const std::string bin = WBPOST_CLI;
  CHECK(WEXITSTATUS(std::system((bin + " check --prior jeffreys --data " + kTwo + " >/dev/null 2>&1").c_str())) == 0);
  CHECK(WEXITSTATUS(std::system((bin + " check --prior mdi --data " + kTwo + " >/dev/null 2>&1").c_str())) == 2);
  CHECK(WEXITSTATUS(std::system((bin + " check --prior=-1,0,1 --data " + kTwo + " >/dev/null 2>&1").c_str())) == 3);
  CHECK(WEXITSTATUS(std::system((bin + " fit --prior jeffreys >/dev/null 2>&1").c_str())) == 1);
}
