#include "wbpost/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace wbpost {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  if (a == kInf || b == kInf) return kInf;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

double log_sum(const std::vector<double>& v) {
  double hi = -kInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == -kInf || hi == kInf) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

// Streaming log-sum-exp.
class LogAccumulator {
 public:
  void add(double x) {
    if (x == -kInf) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  double value() const { return max_ == -kInf ? -kInf : max_ + std::log(sum_); }

 private:
  double max_ = -kInf;
  double sum_ = 0.0;
};

class IntegrandOverflow : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

double checked(const LogIntegrand& f, double x) {
  const double v = f(x);
  if (std::isnan(v)) {
    std::ostringstream os;
    os << "log-integrand is NaN at beta = " << x;
    throw IntegrationError(os.str());
  }
  if (v == kInf) {
    std::ostringstream os;
    os << "log-integrand is +inf at beta = " << x;
    throw IntegrandOverflow(os.str());
  }
  return v;
}

struct Piece {
  double a;
  double b;
  double log_value;
  double log_error;
};

Piece gauss_kronrod(const LogIntegrand& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 7> lo{};
  std::array<double, 7> hi{};
  const double mid = checked(f, center);
  double peak = mid;
  for (int k = 0; k < 7; ++k) {
    lo[k] = checked(f, center - half * kXgk[k]);
    hi[k] = checked(f, center + half * kXgk[k]);
    peak = std::max({peak, lo[k], hi[k]});
  }
  if (peak == -kInf) return {a, b, -kInf, -kInf};

  double kronrod = kWgk[7] * std::exp(mid - peak);
  double gauss = kWg[3] * std::exp(mid - peak);
  for (int k = 0; k < 7; ++k) {
    const double pair = std::exp(lo[k] - peak) + std::exp(hi[k] - peak);
    kronrod += kWgk[k] * pair;
    if (k % 2 == 1) gauss += kWg[k / 2] * pair;
  }
  const double log_scale = peak + std::log(half);
  const double diff = std::abs(kronrod - gauss);
  return {a, b, log_scale + std::log(kronrod),
          diff > 0.0 ? log_scale + std::log(diff) : -kInf};
}

void check_tolerance(double rel_tol) {
  if (!(rel_tol >= 1e-12 && rel_tol <= 1e-2))
    throw IntegrationError("rel_tol must lie in [1e-12, 1e-2]");
}

// Accumulates panels in one direction until, while panels are still
// shrinking, the geometric bound on the rest falls below 0.1 * rel_tol of the
// running total. The unvisited
// remainder is bounded by a geometric tail and booked as error.
class PanelSweep {
 public:
  PanelSweep(const LogIntegrand& f, double rel_tol) : f_(f), rel_tol_(rel_tol) {}

  // Panels [lower(i), upper(i)] for i = 0 .. max_panels-1.
  template <typename Bounds>
  bool run(Bounds bounds, int max_panels, double previous = std::nan("")) {
    const double log_stop = std::log(0.1 * rel_tol_);
    for (int i = 0; i < max_panels; ++i) {
      const auto [lo, hi] = bounds(i);
      const auto p = integrate_panel(f_, lo, hi, 0.1 * rel_tol_);
      values_.push_back(p.log_value);
      errors_.push_back(p.log_abs_error);
      total_ = log_add(total_, p.log_value);
      if (!std::isnan(previous)) {
        if (p.log_value == -kInf) return true;
        if (p.log_value < previous) {
          const double log_ratio = p.log_value - previous;
          const double log_tail = p.log_value + log_ratio - std::log1p(-std::exp(log_ratio));
          // Stop on the tail bound itself: with slow decay it can exceed the
          // last panel many times over.
          if (log_tail < total_ + log_stop) {
            errors_.push_back(log_tail);
            return true;
          }
        }
      }
      previous = p.log_value;
    }
    return false;
  }

  double first_value() const { return values_.front(); }
  double total() const { return total_; }
  double error() const { return log_sum(errors_); }
  std::size_t panels() const { return values_.size(); }

 private:
  const LogIntegrand& f_;
  double rel_tol_;
  std::vector<double> values_;
  std::vector<double> errors_;
  double total_ = -kInf;
};

LogNormalizingConstant finish(const PanelSweep& sweep, double rel_tol) {
  const double total = sweep.total();
  if (total == -kInf) throw IntegrationError("integral is zero; its log is undefined");
  const double rel = std::exp(sweep.error() - total);
  if (!(rel <= rel_tol)) {
    std::ostringstream os;
    os << "error estimate " << rel << " exceeds rel_tol " << rel_tol;
    throw IntegrationError(os.str());
  }
  return {total, std::log1p(rel), sweep.panels()};
}

}  // namespace

PanelIntegral integrate_panel(const LogIntegrand& f, double lo, double hi, double rel_tol,
                              std::size_t max_intervals) {
  std::vector<Piece> pieces{gauss_kronrod(f, lo, hi)};
  const double log_tol = std::log(rel_tol);
  PanelIntegral out;
  while (true) {
    double total = -kInf;
    double err = -kInf;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      total = log_add(total, pieces[i].log_value);
      err = log_add(err, pieces[i].log_error);
      if (pieces[i].log_error > pieces[worst].log_error) worst = i;
    }
    out.log_value = total;
    out.log_abs_error = err;
    out.intervals = pieces.size();
    if (total == -kInf || err <= total + log_tol) {
      out.converged = true;
      return out;
    }
    if (pieces.size() >= max_intervals) return out;
    const Piece w = pieces[worst];
    const double mid = 0.5 * (w.a + w.b);
    if (!(mid > w.a && mid < w.b)) return out;
    pieces[worst] = gauss_kronrod(f, w.a, mid);
    pieces.push_back(gauss_kronrod(f, mid, w.b));
  }
}

LogNormalizingConstant integrate_1d(const LogIntegrand& f, double rel_tol) {
  check_tolerance(rel_tol);
  PanelSweep sweep(f, rel_tol);
  const bool right = sweep.run(
      [](int i) { return std::pair{std::ldexp(1.0, i), std::ldexp(1.0, i + 1)}; }, 61);
  if (!right) throw IntegrationError("integrand does not decay before beta = 2^61");
  const bool left = sweep.run(
      [](int i) { return std::pair{std::ldexp(1.0, -i - 1), std::ldexp(1.0, -i)}; }, 60,
      sweep.first_value());
  if (!left) throw IntegrationError("integrand does not decay before beta = 2^-60");
  return finish(sweep, rel_tol);
}

LogNormalizingConstant integrate_from(const LogIntegrand& f, double lower, double rel_tol) {
  check_tolerance(rel_tol);
  if (!(lower > 0.0) || !std::isfinite(lower))
    throw IntegrationError("lower limit must be positive and finite");
  PanelSweep sweep(f, rel_tol);
  const int budget = std::max(2, 62 - std::ilogb(lower));
  const bool ok = sweep.run(
      [lower](int i) {
        return std::pair{std::ldexp(lower, i), std::ldexp(lower, i + 1)};
      },
      budget);
  if (!ok) throw IntegrationError("integrand does not decay before beta = 2^61");
  return finish(sweep, rel_tol);
}

std::string to_string(Convergence c) {
  switch (c) {
    case Convergence::Convergent: return "Convergent";
    case Convergence::DivergentAtZero: return "DivergentAtZero";
    case Convergence::DivergentAtInfinity: return "DivergentAtInfinity";
    case Convergence::DivergentInner: return "DivergentInner";
  }
  return "?";
}

namespace {

// Panel ratios read from the end of the range inward: L[end] vs L[end -+ 1].
struct TailTrend {
  bool growing = true;   // every ratio >= 1 - flat_tolerance
  bool decaying = true;  // every ratio < decay_ratio
  double min_log_ratio = kInf;
  double max_log_ratio = -kInf;
};

TailTrend tail_trend(const std::vector<double>& L, bool head, const OracleConfig& cfg) {
  TailTrend t;
  const int n = static_cast<int>(L.size());
  const double log_flat = std::log1p(-cfg.flat_tolerance);
  const double log_decay = std::log(cfg.decay_ratio);
  for (int s = 0; s < cfg.tail_ratios; ++s) {
    const int outer = head ? s : n - 1 - s;
    const int inner = head ? s + 1 : n - 2 - s;
    const double a = L[outer];
    const double b = L[inner];
    if (a == -kInf && b == -kInf) {
      t.growing = false;
      continue;
    }
    const double lr = a - b;
    if (!std::isnan(lr)) {
      t.min_log_ratio = std::min(t.min_log_ratio, lr);
      t.max_log_ratio = std::max(t.max_log_ratio, lr);
    }
    if (!(a >= b + log_flat)) t.growing = false;
    if (!(a < b + log_decay)) t.decaying = false;
  }
  return t;
}

std::string describe(const char* side, const TailTrend& t, double end_fraction) {
  std::ostringstream os;
  os.precision(6);
  os << side << ": successive panel ratios toward the end in [" << std::exp(t.min_log_ratio)
     << ", " << std::exp(t.max_log_ratio) << "]";
  if (t.growing)
    os << " (non-decreasing)";
  else if (t.decaying)
    os << " (decaying), end panel fraction of total " << end_fraction;
  else
    os << " (no rule fired)";
  return os.str();
}

}  // namespace

ConvergenceReport classify_convergence(const LogIntegrand& f, const OracleConfig& cfg) {
  if (cfg.max_panel - cfg.min_panel < 2 * cfg.tail_ratios + 1)
    throw std::invalid_argument("panel range too short for the configured tail window");
  ConvergenceReport rep;
  rep.first_panel = cfg.min_panel;
  for (int j = cfg.min_panel; j <= cfg.max_panel; ++j) {
    double v = 0.0;
    try {
      v = integrate_panel(f, std::ldexp(1.0, j), std::ldexp(1.0, j + 1), cfg.panel_rel_tol, 60)
              .log_value;
    } catch (const IntegrandOverflow&) {
      v = kInf;
    }
    rep.panel_log_sums.push_back(v);
  }

  double total = -kInf;
  for (double v : rep.panel_log_sums) total = log_add(total, v);
  const auto& L = rep.panel_log_sums;
  const auto head = tail_trend(L, true, cfg);
  const auto tail = tail_trend(L, false, cfg);
  const double head_fraction = std::exp(L.front() - total);
  const double tail_fraction = std::exp(L.back() - total);
  const bool head_ok = head.decaying && head_fraction < cfg.floor;
  const bool tail_ok = tail.decaying && tail_fraction < cfg.floor;

  std::ostringstream ev;
  ev << "dyadic panels 2^" << cfg.min_panel << "..2^" << cfg.max_panel + 1 << "; "
     << describe("beta->0", head, head_fraction) << "; "
     << describe("beta->inf", tail, tail_fraction) << "; rule: ";
  if (head.growing) {
    rep.classification = Convergence::DivergentAtZero;
    ev << "head panels non-decreasing";
  } else if (tail.growing) {
    rep.classification = Convergence::DivergentAtInfinity;
    ev << "tail panels non-decreasing";
  } else if (head_ok && tail_ok) {
    rep.classification = Convergence::Convergent;
    ev << "both tails decay with ratio < " << cfg.decay_ratio << " over " << cfg.tail_ratios
       << " panels and end panels < " << cfg.floor << " of total";
  } else {
    ev << "ambiguous";
    rep.evidence = ev.str();
    throw AmbiguousConvergence("convergence pattern is ambiguous: " + rep.evidence, rep);
  }
  rep.evidence = ev.str();
  return rep;
}

ConvergenceReport classify_convergence(const MarginalIntegrand& f, const OracleConfig& cfg) {
  if (f.has_inner_divergence()) {
    ConvergenceReport rep;
    rep.classification = Convergence::DivergentInner;
    rep.inner_threshold = f.inner_divergence_threshold();
    std::ostringstream ev;
    ev << "a(beta) = m + (r+1)/beta <= 0 for beta <= " << *rep.inner_threshold
       << " (r = " << f.prior().r() << ", m = " << f.data().m()
       << "); the eta integral diverges there";
    rep.evidence = ev.str();
    return rep;
  }
  return classify_convergence([&f](double beta) { return f(beta).log_value; }, cfg);
}

NormalizationResult normalizing_constant(const PriorSpec& prior, const Dataset& d,
                                         double rel_tol, const OracleConfig& cfg) {
  NormalizationResult out;
  out.verdict = classify(prior, summarize(d));
  const MarginalIntegrand integrand(prior, d);
  out.report = classify_convergence(integrand, cfg);
  out.report.empirical = out.verdict.status == ProprietyStatus::OutsideTheoremScope;
  if (out.report.classification == Convergence::Convergent)
    out.constant =
        integrate_1d([&integrand](double beta) { return integrand(beta).log_value; }, rel_tol);
  return out;
}

BruteForceGrid BruteForceGrid::refined(std::size_t factor) const {
  BruteForceGrid g = *this;
  g.log_beta.intervals *= factor;
  g.scaled_log_scale.intervals *= factor;
  return g;
}

double brute_force_2d(const PriorSpec& prior, const Dataset& d, const BruteForceGrid& grid) {
  const LikelihoodData data(d);
  const double m = static_cast<double>(data.m());
  const double log_x_max = data.log_x_max();
  std::vector<double> rel;
  for (double lx : data.log_times()) rel.push_back(lx - log_x_max);

  // (r+1) log(scale) collects the prior power and the Jacobian of
  // w = beta log(eta x_max); in theta coordinates log(theta) = -log(eta).
  const double scale_sign = prior.parametrization() == Parametrization::eta ? 1.0 : -1.0;
  const double r = prior.r();
  const double q = prior.q();
  const double p = prior.p();

  const auto& vb = grid.log_beta;
  const auto& vw = grid.scaled_log_scale;
  if (vb.intervals < 2 || vw.intervals < 2 || !(vb.hi > vb.lo) || !(vw.hi > vw.lo))
    throw IntegrationError("degenerate brute-force grid");
  const double dv = (vb.hi - vb.lo) / static_cast<double>(vb.intervals);
  const double dw = (vw.hi - vw.lo) / static_cast<double>(vw.intervals);
  const double log_half = std::log(0.5);

  LogAccumulator total;
  for (std::size_t iv = 0; iv <= vb.intervals; ++iv) {
    const double v = vb.lo + dv * static_cast<double>(iv);
    const double beta = std::exp(v);
    const double beta_terms = -p / beta + (m + q) * v;
    LogAccumulator row;
    for (std::size_t iw = 0; iw <= vw.intervals; ++iw) {
      const double w = vw.lo + dw * static_cast<double>(iw);
      const double log_eta = w / beta - log_x_max;
      double cumulative = 0.0;
      for (double rl : rel) cumulative += std::exp(w + beta * rl);
      double val = beta_terms + scale_sign * (r + 1.0) * log_eta + m * beta * log_eta +
                   beta * data.sum_delta_log_x() - cumulative;
      if (iw == 0 || iw == vw.intervals) val += log_half;
      row.add(val);
    }
    double rv = row.value();
    if (iv == 0 || iv == vb.intervals) rv += log_half;
    total.add(rv);
  }
  return total.value() + std::log(dv) + std::log(dw);
}

std::vector<double> truncated_moment_growth(const PriorSpec& prior, const Dataset& d,
                                            MomentParameter parameter, double k,
                                            std::span<const double> cutoffs, double rel_tol) {
  if (!(k > 0.0)) throw MomentOrderError("moment order k must be > 0");
  const auto verdict = classify(prior, summarize(d));
  if (!verdict.proper())
    throw std::invalid_argument("truncated moments need a posterior proper by the theorem");

  const PriorSpec eta = in_eta_coordinates(prior);
  const MarginalIntegrand base(eta, d);
  const double log_d =
      integrate_1d([&base](double b) { return base(b).log_value; }, rel_tol).log_d;

  PriorSpec shifted = eta;
  switch (parameter) {
    case MomentParameter::beta: shifted = eta.with_q(eta.q() + k); break;
    case MomentParameter::eta: shifted = eta.with_r(eta.r() + k); break;
    case MomentParameter::theta: shifted = eta.with_r(eta.r() - k); break;
  }
  const MarginalIntegrand weighted(shifted, d);
  const auto threshold = weighted.inner_divergence_threshold();

  std::vector<double> out;
  out.reserve(cutoffs.size());
  for (double eps : cutoffs) {
    if (threshold && eps <= *threshold) {
      out.push_back(kInf);
      continue;
    }
    const auto v =
        integrate_from([&weighted](double b) { return weighted(b).log_value; }, eps, rel_tol);
    out.push_back(v.log_d - log_d);
  }
  return out;
}

}  // namespace wbpost
