#pragma once

// Symbolic propriety and moment-finiteness decisions for the
// exp(-p/beta) eta^r beta^q prior family under right-censored Weibull data.
//
// The decision table is exactly the published characterisation:
//   r != -1                                   -> improper (item i)
//   r == -1, p == 0, >= 2 distinct events     -> proper iff q > -m (item ii)
//   r == -1, p == 0, m <= 1                   -> improper (item iii)
// Everything else (p > 0 with r == -1; m >= 2 with all events tied) is
// reported as outside the theorem's scope and left to the numerical oracle.

#include <optional>
#include <string>

#include "wbpost/data.hpp"
#include "wbpost/prior.hpp"

namespace wbpost {

enum class ProprietyStatus { ProperByTheorem, ImproperByTheorem, OutsideTheoremScope };

enum class TheoremItem { none, i, ii, iii };

enum class TheoremGap { none, a_positive_p, b_tied_events };

struct ProprietyVerdict {
  ProprietyStatus status = ProprietyStatus::OutsideTheoremScope;
  TheoremItem item = TheoremItem::none;
  TheoremGap gap = TheoremGap::none;
  std::string condition;
  std::optional<std::string> gap_note;
  // Coordinates the caller supplied the prior in; decisions are always made
  // after mapping to eta.
  Parametrization parametrization = Parametrization::eta;
  // Theta-coordinate prior decided by item ii after the coordinate change.
  bool via_theta_mapping = false;

  bool proper() const { return status == ProprietyStatus::ProperByTheorem; }

  /// "i", "ii", "iii", "ii_theta" (item ii reached from a theta-coordinate
  /// prior), or "none" for gaps.
  std::string theorem_item_tag() const;
};

ProprietyVerdict classify(const PriorSpec& prior, const DatasetSummary& summary);

enum class MomentStatus { Finite, Infinite, NotApplicable, Unknown };

enum class MomentParameter { eta, beta, theta };

struct MomentVerdict {
  MomentStatus status = MomentStatus::Unknown;
  MomentParameter parameter = MomentParameter::beta;
  double order = 1.0;
};

class MomentOrderError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// E[parameter^k | x] finiteness by reclassifying the prior with shifted
/// exponents: beta^k shifts q by k, eta^k shifts r by k, theta^k = eta^-k
/// shifts r by -k.
MomentVerdict moment_finiteness(const PriorSpec& prior, const DatasetSummary& summary,
                                MomentParameter parameter, double k);

std::string to_string(ProprietyStatus s);
std::string to_string(TheoremItem i);
std::string to_string(MomentStatus s);
std::string to_string(MomentParameter p);
MomentParameter parse_moment_parameter(const std::string& text);

}  // namespace wbpost
