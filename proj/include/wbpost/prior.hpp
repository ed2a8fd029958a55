#pragma once

// Priors of the form exp(-p/beta) * scale^r * beta^q, and the objective
// members of that family.

#include <array>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wbpost {

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kPi = std::numbers::pi;

/// Which scale parameter the exponent r refers to: eta (rate-like, as in
/// f(x) = beta eta^beta (eta x)^(beta-1) exp(-(eta x)^beta)) or theta = 1/eta.
enum class Parametrization { eta, theta };

class PriorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// exp(-p/beta) * scale^r * beta^q, up to an unspecified constant.
class PriorSpec {
 public:
  PriorSpec(double r, double q, double p,
            Parametrization parametrization = Parametrization::eta);

  double r() const { return r_; }
  double q() const { return q_; }
  double p() const { return p_; }
  Parametrization parametrization() const { return param_; }

  PriorSpec with_r(double r) const { return {r, q_, p_, param_}; }
  PriorSpec with_q(double q) const { return {r_, q, p_, param_}; }

  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;

 private:
  double r_;
  double q_;
  double p_;
  Parametrization param_;
};

/// Names accepted by catalog().
const std::vector<std::string>& catalog_names();

/// uniform, jeffreys_rule, jeffreys, mdi, reference_eta, reference_beta.
PriorSpec catalog(std::string_view name);

/// Either a catalog name or a literal "r,q,p" triple.
PriorSpec parse_prior(std::string_view text,
                      Parametrization parametrization = Parametrization::eta);

/// Change of variables eta = 1/theta: theta^r d(theta) -> eta^(-r-2) d(eta).
PriorSpec to_eta_parametrization(const PriorSpec& theta_prior);
PriorSpec to_theta_parametrization(const PriorSpec& eta_prior);

/// Returns the prior itself when already in eta coordinates.
PriorSpec in_eta_coordinates(const PriorSpec& prior);

std::string to_string(Parametrization p);
Parametrization parse_parametrization(std::string_view text);

/// Expected Fisher information of n complete Weibull observations, in
/// (eta, beta) order.
struct FisherMatrix {
  std::array<std::array<double, 2>, 2> entries{};
  double n = 1.0;

  double operator()(int i, int j) const { return entries[i][j]; }
  double determinant() const;
  FisherMatrix inverse() const;
};

FisherMatrix fisher_information(double eta, double beta, double n);

/// Entropy functional whose exponential gives the MDI prior:
/// H = log(eta beta) + gamma (1 - 1/beta) - 1.
double mdi_entropy(double eta, double beta);

}  // namespace wbpost
