#pragma once

// Parameters, reaction terms and the scalar nonlinearity of the full
// cross-diffusion limit of the SKT competition model.
//
// Notation used throughout the library:
//   f(u,v) = u (a1 - b1 u - c1 v),   g(u,v) = v (a2 - b2 u - c2 v)
//   w = delta u - gamma v,           tau = u v
//   h(u,tau) = f(u, tau/u) - gamma g(u, tau/u)
//   H(u,tau) = int_{z2}^{u} h(s,tau) (delta + gamma tau / s^2) ds

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace sktlimit {

struct ModelParams {
  double a1 = 1.0;  // birth rates
  double a2 = 1.0;
  double b1 = 1.0;  // competition coefficients
  double b2 = 1.0;
  double c1 = 1.0;
  double c2 = 1.0;
  double gamma = 1.0;  // limit ratio alpha / beta
  double delta = 1.0;  // diffusion ratio d1 / d2

  /// Throws DomainError unless every coefficient is finite and positive.
  void validate() const;

  double A() const { return a1 / a2; }
  double B() const { return b1 / b2; }
  double C() const { return c1 / c2; }
};

enum class RegimeTag { WeakCompetition, StrongCompetition, Degenerate };

struct Regime {
  RegimeTag tag = RegimeTag::Degenerate;
  /// For Degenerate: which equality or ordering failed. Empty otherwise.
  std::string detail;

  bool nondegenerate() const { return tag != RegimeTag::Degenerate; }
};

std::string_view to_string(RegimeTag tag);

/// Weak: C < A < B. Strong: B < A < C. Anything else is Degenerate.
Regime classify_regime(const ModelParams& p);

double reaction_f(double u, double v, const ModelParams& p);
double reaction_g(double u, double v, const ModelParams& p);

struct DensityPair {
  double u = 0.0;
  double v = 0.0;
};

struct LimitPair {
  double w = 0.0;
  double tau = 0.0;
};

/// Inverse of (u,v) -> (delta u - gamma v, u v). Requires tau > 0.
DensityPair uv_from_w(double w, double tau, const ModelParams& p);
/// Requires u > 0 and v > 0.
LimitPair w_from_uv(double u, double v, const ModelParams& p);

/// w as a function of u on the level set u v = tau.
double w_of_u(double u, double tau, const ModelParams& p);

double h_value(double u, double tau, const ModelParams& p);
double h_du(double u, double tau, const ModelParams& p);

/// Coefficients (highest degree first) of u^2 h(u,tau):
///   -b1 u^4 + a1 u^3 + tau (gamma b2 - c1) u^2 - gamma a2 tau u + gamma c2 tau^2.
std::array<double, 5> h_quartic(double tau, const ModelParams& p);

inline constexpr double kRootAtol = 1e-11;
inline constexpr double kRootMergeRel = 1e-8;

/// Positive zeros of h(., tau), strictly increasing.
struct ZeroTriple {
  double tau = 0.0;
  std::vector<double> zeros;
  bool complete = false;

  double z1() const { return zeros.at(0); }
  double z2() const { return zeros.at(1); }
  double z3() const { return zeros.at(2); }
};

/// Companion-matrix eigenvalues of the quartic followed by Newton polishing
/// on h. Roots closer than kRootMergeRel are merged. Throws DomainError for
/// tau <= 0 and RootFindingFailure if a root cannot be polished to kRootAtol.
ZeroTriple zeros_of_h(double tau, const ModelParams& p);

/// Membership of tau in the admissible set: three distinct zeros and
/// tau <= tau_bar.
bool in_admissible_set(double tau, const ModelParams& p);

/// min{ a1^2 / (4 b1 c1), a2^2 / (4 b2 c2) }.
double tau_bar(const ModelParams& p);

/// Supremum of T such that h(., tau) has three zeros for every tau in (0, T),
/// capped at tau_bar. Located by a grid scan followed by bisection on the
/// completeness flag down to `resolution`.
double tau_tilde(const ModelParams& p, double resolution = 1e-8);

double discriminant_D(const ModelParams& p);

struct ConstantState {
  double u_star = 0.0;
  double v_star = 0.0;
  double w_star = 0.0;
  double tau_star = 0.0;
};

/// The positive constant solution. Throws RegimeError in the degenerate
/// regime or when b1 c2 == b2 c1.
ConstantState constant_state(const ModelParams& p);

/// Closed-form zeros of u -> f(u, tau/u) and u -> g(u, tau/u).
struct FgLandmarks {
  double z1f = 0.0;
  double z2f = 0.0;
  double z1g = 0.0;
  double z2g = 0.0;
};

/// Throws DomainError if either discriminant a_i^2 - 4 b_i c_i tau is negative.
FgLandmarks fg_zero_landmarks(double tau, const ModelParams& p);

/// Closed-form antiderivative of h(s,tau) (delta + gamma tau / s^2).
///
/// The integrand is a Laurent polynomial in s with powers 2..-4; its
/// antiderivative carries a single log term. Differences are evaluated term by
/// term with factored power differences and log1p, so they keep full relative
/// accuracy when the two arguments are close.
class Potential {
 public:
  Potential(const ModelParams& p, double tau, double base);

  double tau() const { return tau_; }
  double base() const { return base_; }

  /// H(u) = int_base^u h w ds.
  double operator()(double u) const { return difference(base_, u); }
  /// int_a^b h w ds for a, b > 0.
  double difference(double a, double b) const;
  /// int_a^{a+offset} h w ds. Takes the offset itself so that offsets below
  /// the resolution of a keep their relative accuracy.
  double difference_from(double a, double offset) const;
  /// h(u) (delta + gamma tau / u^2).
  double density(double u) const;
  /// delta + gamma tau / u^2, i.e. dw/du.
  double weight(double u) const;

 private:
  ModelParams p_;
  double tau_;
  double base_;
  // coef_[k] multiplies s^(2-k) in the integrand, k = 0..6.
  std::array<double, 7> coef_{};
};

/// H(u, tau) with lower limit z2(tau). Throws DomainError for u <= 0 and
/// StateError when h(., tau) does not have three zeros.
double potential_H(double u, double tau, const ModelParams& p);

}  // namespace sktlimit
