#pragma once

// Log-space quadrature over (0, inf) on dyadic panels [2^j, 2^(j+1)], a
// panel-trend divergence classifier, and a brute-force 2-D trapezoid used as
// an independent check of the normalizing constant.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wbpost/data.hpp"
#include "wbpost/kernel.hpp"
#include "wbpost/prior.hpp"
#include "wbpost/propriety.hpp"

namespace wbpost {

/// beta -> log f(beta). May return -inf; +inf and NaN are errors.
using LogIntegrand = std::function<double(double)>;

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LogNormalizingConstant {
  double log_d = 0.0;
  double abs_log_error_estimate = 0.0;
  std::size_t panels_used = 0;
};

/// One panel integrated by globally adaptive Gauss-Kronrod (7/15) bisection.
struct PanelIntegral {
  double log_value = 0.0;
  double log_abs_error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

PanelIntegral integrate_panel(const LogIntegrand& f, double lo, double hi, double rel_tol,
                              std::size_t max_intervals = 400);

/// log of the integral of exp(f) over (0, inf). Panels are added outward from
/// beta = 1 until the outermost one is negligible; failure to get there by
/// 2^-60 or 2^61, or an error estimate above rel_tol, throws IntegrationError.
LogNormalizingConstant integrate_1d(const LogIntegrand& f, double rel_tol = 1e-10);

/// Same, over [lower, inf), with panels [lower 2^i, lower 2^(i+1)].
LogNormalizingConstant integrate_from(const LogIntegrand& f, double lower,
                                      double rel_tol = 1e-10);

enum class Convergence { Convergent, DivergentAtZero, DivergentAtInfinity, DivergentInner };

std::string to_string(Convergence c);

/// Decision thresholds for classify_convergence.
struct OracleConfig {
  int min_panel = -60;
  int max_panel = 60;
  int tail_ratios = 8;          // consecutive successive-panel ratios examined
  double decay_ratio = 0.9;     // ratio below which a tail counts as decaying
  double floor = 1e-12;         // end panel must be below floor * total
  double flat_tolerance = 1e-6; // ratio >= 1 - flat_tolerance counts as non-decreasing
  double panel_rel_tol = 1e-6;
};

struct ConvergenceReport {
  Convergence classification = Convergence::Convergent;
  int first_panel = 0;                  // j of panel_log_sums.front()
  std::vector<double> panel_log_sums;   // log of the integral over [2^j, 2^(j+1)]
  std::string evidence;
  std::optional<double> inner_threshold;
  /// Set by callers when no theorem backs the classification.
  bool empirical = false;
};

/// Raised when neither the decay rule nor the growth rule fires. Carries the
/// panel evidence.
class AmbiguousConvergence : public std::runtime_error {
 public:
  AmbiguousConvergence(const std::string& what, ConvergenceReport partial)
      : std::runtime_error(what), report(std::move(partial)) {}
  ConvergenceReport report;
};

ConvergenceReport classify_convergence(const LogIntegrand& f, const OracleConfig& cfg = {});

/// Reports DivergentInner straight from (r, m) when a(beta) <= 0 somewhere;
/// otherwise runs the panel analysis.
ConvergenceReport classify_convergence(const MarginalIntegrand& f,
                                       const OracleConfig& cfg = {});

struct NormalizationResult {
  ConvergenceReport report;
  std::optional<LogNormalizingConstant> constant;  // present iff Convergent
  ProprietyVerdict verdict;
};

/// log d(x): classification first, then integrate_1d when Convergent.
NormalizationResult normalizing_constant(const PriorSpec& prior, const Dataset& d,
                                         double rel_tol = 1e-10,
                                         const OracleConfig& cfg = {});

/// Trapezoid axis: `intervals` equal steps over [lo, hi].
struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t intervals = 100;
};

/// Grid for brute_force_2d. The beta axis is log(beta); the scale axis is
/// w = beta log(eta x_max) (equivalently beta log(x_max / theta)), the log of
/// the rescaled cumulative hazard, where the kernel has O(1) width for every
/// beta.
struct BruteForceGrid {
  GridAxis log_beta{-18.420680743952367, 18.420680743952367, 2000};  // beta in [1e-8, 1e8]
  GridAxis scaled_log_scale{-60.0, 8.0, 700};

  BruteForceGrid refined(std::size_t factor) const;
};

/// log d(x) by 2-D trapezoid of the normalizing kernel. Theta-coordinate
/// priors are integrated in theta directly, without the eta mapping.
double brute_force_2d(const PriorSpec& prior, const Dataset& d,
                      const BruteForceGrid& grid = {});

/// log( integral over beta >= eps of the parameter^k-weighted kernel ) - log d
/// for each cutoff eps. Requires a proper posterior by the theorem.
std::vector<double> truncated_moment_growth(const PriorSpec& prior, const Dataset& d,
                                            MomentParameter parameter, double k,
                                            std::span<const double> cutoffs,
                                            double rel_tol = 1e-10);

}  // namespace wbpost
