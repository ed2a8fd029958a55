#include "wbpost/propriety.hpp"

#include <cmath>
#include <sstream>

namespace wbpost {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

constexpr const char* kOracleAdvice =
    "the theorem does not decide this case; run the numerical oracle, whose "
    "verdict is empirical evidence only";

}  // namespace

std::string ProprietyVerdict::theorem_item_tag() const {
  if (status == ProprietyStatus::OutsideTheoremScope) return "none";
  if (via_theta_mapping) return "ii_theta";
  return to_string(item);
}

namespace {

ProprietyVerdict classify_eta(const PriorSpec& eta, const DatasetSummary& s) {
  ProprietyVerdict v;
  const double m = static_cast<double>(s.m);

  if (eta.r() != -1.0) {
    v.status = ProprietyStatus::ImproperByTheorem;
    v.item = TheoremItem::i;
    v.condition = "r = " + fmt(eta.r()) + " != -1";
    return v;
  }
  if (eta.p() != 0.0) {
    v.status = ProprietyStatus::OutsideTheoremScope;
    v.gap = TheoremGap::a_positive_p;
    v.condition = "r = -1 with p = " + fmt(eta.p()) + " != 0";
    v.gap_note = std::string("r = -1 with p > 0 is not covered by any item; ") + kOracleAdvice;
    return v;
  }
  if (s.m <= 1) {
    v.status = ProprietyStatus::ImproperByTheorem;
    v.item = TheoremItem::iii;
    v.condition = "r = -1, p = 0, m = " + std::to_string(s.m) + " <= 1";
    return v;
  }
  if (s.distinct_uncensored >= 2) {
    v.item = TheoremItem::ii;
    if (eta.q() > -m) {
      v.status = ProprietyStatus::ProperByTheorem;
      v.condition = "r = -1, p = 0, q = " + fmt(eta.q()) + " > -m = " + fmt(-m);
    } else {
      v.status = ProprietyStatus::ImproperByTheorem;
      v.condition = "r = -1, p = 0, q = " + fmt(eta.q()) + " <= -m = " + fmt(-m);
    }
    return v;
  }
  v.status = ProprietyStatus::OutsideTheoremScope;
  v.gap = TheoremGap::b_tied_events;
  v.condition = "r = -1, p = 0, m = " + std::to_string(s.m) +
                " >= 2 but fewer than two distinct event times";
  v.gap_note = std::string("all event times are tied; ") + kOracleAdvice;
  return v;
}

}  // namespace

ProprietyVerdict classify(const PriorSpec& prior, const DatasetSummary& summary) {
  auto v = classify_eta(in_eta_coordinates(prior), summary);
  v.parametrization = prior.parametrization();
  v.via_theta_mapping = prior.parametrization() == Parametrization::theta &&
                          v.item == TheoremItem::ii;
  return v;
}

MomentVerdict moment_finiteness(const PriorSpec& prior, const DatasetSummary& summary,
                                MomentParameter parameter, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) throw MomentOrderError("moment order k must be > 0");
  MomentVerdict out;
  out.parameter = parameter;
  out.order = k;

  const auto base = classify(prior, summary);
  if (base.status == ProprietyStatus::OutsideTheoremScope) {
    out.status = MomentStatus::Unknown;
    return out;
  }
  if (base.status == ProprietyStatus::ImproperByTheorem) {
    out.status = MomentStatus::NotApplicable;
    return out;
  }

  const PriorSpec eta = in_eta_coordinates(prior);
  PriorSpec shifted = eta;
  switch (parameter) {
    case MomentParameter::beta: shifted = eta.with_q(eta.q() + k); break;
    case MomentParameter::eta: shifted = eta.with_r(eta.r() + k); break;
    case MomentParameter::theta: shifted = eta.with_r(eta.r() - k); break;
  }
  const auto moved = classify(shifted, summary);
  out.status = moved.proper() ? MomentStatus::Finite : MomentStatus::Infinite;
  return out;
}

std::string to_string(ProprietyStatus s) {
  switch (s) {
    case ProprietyStatus::ProperByTheorem: return "ProperByTheorem";
    case ProprietyStatus::ImproperByTheorem: return "ImproperByTheorem";
    case ProprietyStatus::OutsideTheoremScope: return "OutsideTheoremScope";
  }
  return "?";
}

std::string to_string(TheoremItem i) {
  switch (i) {
    case TheoremItem::none: return "none";
    case TheoremItem::i: return "i";
    case TheoremItem::ii: return "ii";
    case TheoremItem::iii: return "iii";
  }
  return "?";
}

std::string to_string(MomentStatus s) {
  switch (s) {
    case MomentStatus::Finite: return "Finite";
    case MomentStatus::Infinite: return "Infinite";
    case MomentStatus::NotApplicable: return "NotApplicable";
    case MomentStatus::Unknown: return "Unknown";
  }
  return "?";
}

std::string to_string(MomentParameter p) {
  switch (p) {
    case MomentParameter::eta: return "eta";
    case MomentParameter::beta: return "beta";
    case MomentParameter::theta: return "theta";
  }
  return "?";
}

MomentParameter parse_moment_parameter(const std::string& text) {
  if (text == "eta") return MomentParameter::eta;
  if (text == "beta") return MomentParameter::beta;
  if (text == "theta") return MomentParameter::theta;
  throw std::invalid_argument("moment parameter must be eta, beta or theta");
}

}  // namespace wbpost
