#include "wbpost/prior.hpp"

#include <charconv>
#include <cmath>

namespace wbpost {

PriorSpec::PriorSpec(double r, double q, double p, Parametrization parametrization)
    : r_(r), q_(q), p_(p), param_(parametrization) {
  if (!std::isfinite(r) || !std::isfinite(q) || !std::isfinite(p))
    throw PriorError("prior exponents must be finite");
  if (p < 0.0) throw PriorError("prior coefficient p must be non-negative");
}

const std::vector<std::string>& catalog_names() {
  static const std::vector<std::string> names = {
      "uniform", "jeffreys_rule", "jeffreys", "mdi", "reference_eta", "reference_beta"};
  return names;
}

PriorSpec catalog(std::string_view name) {
  if (name == "uniform") return {0.0, 0.0, 0.0};
  // Jeffreys' first rule; both reference priors reduce to it.
  if (name == "jeffreys_rule" || name == "reference_eta" || name == "reference_beta")
    return {-1.0, -1.0, 0.0};
  if (name == "jeffreys") return {-1.0, 0.0, 0.0};
  if (name == "mdi") return {1.0, 1.0, kEulerGamma};
  throw PriorError("unknown prior '" + std::string(name) + "'");
}

namespace {

double parse_number(std::string_view s) {
  if (s == "gamma") return kEulerGamma;
  double v = 0.0;
  // from_chars rejects a leading '+'.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
    throw PriorError("cannot parse number '" + std::string(s) + "'");
  return v;
}

}  // namespace

PriorSpec parse_prior(std::string_view text, Parametrization parametrization) {
  if (text.find(',') == std::string_view::npos) {
    auto spec = catalog(text);
    return {spec.r(), spec.q(), spec.p(), parametrization};
  }
  std::vector<double> parts;
  while (true) {
    const auto pos = text.find(',');
    parts.push_back(parse_number(text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  if (parts.size() != 3) throw PriorError("custom prior must be 'r,q,p'");
  return {parts[0], parts[1], parts[2], parametrization};
}

PriorSpec to_eta_parametrization(const PriorSpec& theta_prior) {
  if (theta_prior.parametrization() != Parametrization::theta)
    throw PriorError("prior is already in eta coordinates");
  return {-theta_prior.r() - 2.0, theta_prior.q(), theta_prior.p(), Parametrization::eta};
}

PriorSpec to_theta_parametrization(const PriorSpec& eta_prior) {
  if (eta_prior.parametrization() != Parametrization::eta)
    throw PriorError("prior is already in theta coordinates");
  return {-eta_prior.r() - 2.0, eta_prior.q(), eta_prior.p(), Parametrization::theta};
}

PriorSpec in_eta_coordinates(const PriorSpec& prior) {
  return prior.parametrization() == Parametrization::eta ? prior
                                                         : to_eta_parametrization(prior);
}

std::string to_string(Parametrization p) {
  return p == Parametrization::eta ? "eta" : "theta";
}

Parametrization parse_parametrization(std::string_view text) {
  if (text == "eta") return Parametrization::eta;
  if (text == "theta") return Parametrization::theta;
  throw PriorError("parametrization must be 'eta' or 'theta'");
}

double FisherMatrix::determinant() const {
  return entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
}

FisherMatrix FisherMatrix::inverse() const {
  const double det = determinant();
  FisherMatrix inv;
  inv.n = n;
  inv.entries[0][0] = entries[1][1] / det;
  inv.entries[1][1] = entries[0][0] / det;
  inv.entries[0][1] = -entries[0][1] / det;
  inv.entries[1][0] = -entries[1][0] / det;
  return inv;
}

FisherMatrix fisher_information(double eta, double beta, double n) {
  if (!(eta > 0.0) || !(beta > 0.0) || !(n >= 1.0))
    throw PriorError("fisher_information needs eta > 0, beta > 0, n >= 1");
  const double one_minus_gamma = 1.0 - kEulerGamma;
  FisherMatrix f;
  f.n = n;
  f.entries[0][0] = n * beta * beta / (eta * eta);
  f.entries[0][1] = n * one_minus_gamma / eta;
  f.entries[1][0] = f.entries[0][1];
  f.entries[1][1] = n * (kPi * kPi / 6.0 + one_minus_gamma * one_minus_gamma) / (beta * beta);
  return f;
}

double mdi_entropy(double eta, double beta) {
  if (!(eta > 0.0) || !(beta > 0.0))
    throw PriorError("mdi_entropy needs eta > 0 and beta > 0");
  return std::log(eta * beta) + kEulerGamma * (1.0 - 1.0 / beta) - 1.0;
}

}  // namespace wbpost
