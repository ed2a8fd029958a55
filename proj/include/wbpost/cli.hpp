#pragma once

// Command-line front end. Every command writes one machine-readable JSON line
// to `out` and the same report pretty-printed to `err`.

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "wbpost/data.hpp"
#include "wbpost/prior.hpp"
#include "wbpost/propriety.hpp"
#include "wbpost/quadrature.hpp"

namespace wbpost::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kImproper = 2,
  kTheoremGap = 3,
  kInconclusive = 4,  // oracle disagrees with the theorem, or cannot decide
};

inline constexpr const char* kToolVersion = "wbpost 1.0.0";
inline constexpr const char* kSeedEnv = "WBPOST_SEED";

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct NamedDataset {
  std::string name;
  Dataset data;
};

/// The five datasets of the default theorem-vs-oracle grid: no events, one
/// event, two distinct events, three events with a tie, and two tied events
/// below a larger censored time.
std::vector<NamedDataset> builtin_suite();

enum class Agreement { agree, disagree, gap, ambiguous };
std::string to_string(Agreement a);

struct SweepRow {
  std::size_t index = 0;
  PriorSpec prior{0, 0, 0};
  std::string dataset;
  ProprietyVerdict verdict;
  std::optional<ConvergenceReport> oracle;  // empty when the oracle was ambiguous
  std::string oracle_note;
  Agreement agreement = Agreement::agree;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::size_t checked = 0;  // rows outside the theorem's gaps
  std::size_t agreed = 0;
  std::size_t gaps = 0;
  bool all_agree() const { return agreed == checked; }
};

/// Rows are ordered dataset-major, then r, q, p in the given order. Rows are
/// evaluated concurrently; the result does not depend on scheduling.
SweepResult run_sweep(const std::vector<double>& r_grid, const std::vector<double>& q_grid,
                      const std::vector<double>& p_grid, const std::vector<NamedDataset>& suite,
                      Parametrization parametrization = Parametrization::eta,
                      const OracleConfig& cfg = {});

/// Comma list of numbers; "gamma" stands for the Euler-Mascheroni constant.
std::vector<double> parse_grid(const std::string& text);

}  // namespace wbpost::cli
