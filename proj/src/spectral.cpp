#include "sktlimit/spectral.hpp"

#include <boost/math/constants/constants.hpp>

#include <cmath>
#include <sstream>

#include "sktlimit/errors.hpp"

namespace sktlimit {

namespace {
constexpr double kPi = boost::math::constants::pi<double>();
}

double lambda_j(int j) {
  if (j < 0) throw DomainError("lambda_j: j must be >= 0");
  const double k = j * kPi;
  return k * k;
}

double bifurcation_numerator(const ModelParams& p) {
  const ConstantState s = constant_state(p);
  return (p.gamma * p.b2 + p.c1) * s.tau_star - p.b1 * s.u_star * s.u_star -
         p.gamma * p.c2 * s.v_star * s.v_star;
}

BifurcationForms bifurcation_forms(const ModelParams& p, int j) {
  if (j < 1) throw DomainError("bifurcation_point: j must be >= 1");
  const ConstantState s = constant_state(p);
  const double D = discriminant_D(p);
  if (!(D > 0.0)) {
    std::ostringstream os;
    os << "D = " << D << " <= 0: no pitchfork from the constant solution";
    throw DiscriminantError(os.str());
  }
  const double den = (p.delta * s.u_star + p.gamma * s.v_star) * lambda_j(j);
  const double q = p.b2 * p.c1 - p.b1 * p.c2;
  return {bifurcation_numerator(p) / den, p.a2 * p.a2 * p.b2 * p.c2 * D / (q * q * den)};
}

double bifurcation_point(const ModelParams& p, int j) {
  const BifurcationForms f = bifurcation_forms(p, j);
  if (std::abs(f.from_numerator - f.from_discriminant) > 1e-10 * std::abs(f.from_discriminant)) {
    std::ostringstream os;
    os << "closed forms of d^(" << j << ") disagree: " << f.from_numerator << " vs "
       << f.from_discriminant;
    throw NumericalError(os.str());
  }
  return f.from_discriminant;
}

std::array<double, 4> constant_mode_matrix(const ModelParams& p, double d) {
  if (!(d > 0.0)) throw DomainError("d must be positive");
  const ConstantState s = constant_state(p);
  const double scale = 1.0 / (p.delta * s.u_star + p.gamma * s.v_star);
  const double gb1dc1 = p.gamma * p.b1 + p.delta * p.c1;
  return {-bifurcation_numerator(p) / d * scale,
          (gb1dc1 * s.u_star - p.gamma * (p.gamma * p.b2 + p.delta * p.c2) * s.v_star) /
              d * scale,
          (p.b1 * s.u_star * s.u_star - p.c1 * s.tau_star) / p.c1 * scale,
          gb1dc1 * s.u_star / p.c1 * scale};
}

double mu_j(const ModelParams& p, double d, int j) {
  if (!(d > 0.0)) throw DomainError("d must be positive");
  const ConstantState s = constant_state(p);
  const double lam = lambda_j(j);
  const double shift =
      bifurcation_numerator(p) / ((p.delta * s.u_star + p.gamma * s.v_star) * d);
  return (lam - shift) / (lam + 1.0);
}

SpectralReport spectral_report(const ModelParams& p, double d, int j_max) {
  SpectralReport r;
  r.d = d;
  const auto m = constant_mode_matrix(p, d);
  const double tr = m[0] + m[3];
  const double det = m[0] * m[3] - m[1] * m[2];
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det));
  std::complex<double> lo = 0.5 * (tr - disc);
  std::complex<double> hi = 0.5 * (tr + disc);
  if (lo.real() > hi.real() ||
      (lo.real() == hi.real() && lo.imag() > hi.imag())) {
    std::swap(lo, hi);
  }
  r.mu0 = {lo, hi};
  for (const auto& mu : r.mu0) {
    if (std::abs(mu.imag()) <= kImagTolerance && mu.real() < 0.0) ++r.sigma;
  }
  for (int j = 1; j <= j_max; ++j) {
    r.mu_seq.push_back(mu_j(p, d, j));
    if (r.mu_seq.back() < 0.0) ++r.sigma;
  }
  r.index = r.sigma % 2 == 0 ? 1 : -1;
  return r;
}

int expected_index(const ModelParams& p, double d) {
  const Regime regime = classify_regime(p);
  if (!regime.nondegenerate()) throw RegimeError(regime.detail);
  int j = 0;
  while (d < bifurcation_point(p, j + 1)) ++j;
  const bool odd = j % 2 == 1;
  if (regime.tag == RegimeTag::WeakCompetition) return odd ? -1 : 1;
  return odd ? 1 : -1;
}

}  // namespace sktlimit
