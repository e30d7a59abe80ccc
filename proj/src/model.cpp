#include "sktlimit/model.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

#include "sktlimit/errors.hpp"

namespace sktlimit {

void ModelParams::validate() const {
  const std::array<std::pair<const char*, double>, 8> fields{{{"a1", a1},
                                                              {"a2", a2},
                                                              {"b1", b1},
                                                              {"b2", b2},
                                                              {"c1", c1},
                                                              {"c2", c2},
                                                              {"gamma", gamma},
                                                              {"delta", delta}}};
  for (const auto& [name, value] : fields) {
    if (!std::isfinite(value) || value <= 0.0) {
      std::ostringstream os;
      os << "model parameter " << name << " must be positive and finite, got "
         << value;
      throw DomainError(os.str());
    }
  }
}

std::string_view to_string(RegimeTag tag) {
  switch (tag) {
    case RegimeTag::WeakCompetition:
      return "weak";
    case RegimeTag::StrongCompetition:
      return "strong";
    case RegimeTag::Degenerate:
      return "degenerate";
  }
  return "degenerate";
}

Regime classify_regime(const ModelParams& p) {
  p.validate();
  const double A = p.A();
  const double B = p.B();
  const double C = p.C();
  if (C < A && A < B) return {RegimeTag::WeakCompetition, {}};
  if (B < A && A < C) return {RegimeTag::StrongCompetition, {}};

  std::ostringstream os;
  if (A == B) {
    os << "A == B (" << A << ")";
  } else if (A == C) {
    os << "A == C (" << A << ")";
  } else {
    os << "neither C < A < B nor B < A < C holds (A=" << A << ", B=" << B
       << ", C=" << C << ")";
  }
  return {RegimeTag::Degenerate, os.str()};
}

double reaction_f(double u, double v, const ModelParams& p) {
  return u * (p.a1 - p.b1 * u - p.c1 * v);
}

double reaction_g(double u, double v, const ModelParams& p) {
  return v * (p.a2 - p.b2 * u - p.c2 * v);
}

DensityPair uv_from_w(double w, double tau, const ModelParams& p) {
  if (!(tau > 0.0)) throw DomainError("uv_from_w: tau must be positive");
  const double s = std::hypot(w, 2.0 * std::sqrt(p.gamma * p.delta * tau));
  // Take the branch without cancellation and recover the other from u v = tau.
  if (w >= 0.0) {
    const double u = (s + w) / (2.0 * p.delta);
    return {u, tau / u};
  }
  const double v = (s - w) / (2.0 * p.gamma);
  return {tau / v, v};
}

LimitPair w_from_uv(double u, double v, const ModelParams& p) {
  if (!(u > 0.0) || !(v > 0.0)) {
    throw DomainError("w_from_uv: densities must be positive");
  }
  return {p.delta * u - p.gamma * v, u * v};
}

double w_of_u(double u, double tau, const ModelParams& p) {
  return p.delta * u - p.gamma * tau / u;
}

double h_value(double u, double tau, const ModelParams& p) {
  if (!(u > 0.0)) throw DomainError("h: u must be positive");
  const double v = tau / u;
  return u * (p.a1 - p.b1 * u) - p.c1 * tau -
         p.gamma * v * (p.a2 - p.b2 * u - p.c2 * v);
}

double h_du(double u, double tau, const ModelParams& p) {
  if (!(u > 0.0)) throw DomainError("h_u: u must be positive");
  const double v = tau / u;
  return p.a1 - 2.0 * p.b1 * u + p.gamma * p.a2 * v / u -
         2.0 * p.gamma * p.c2 * v * v / u;
}

std::array<double, 5> h_quartic(double tau, const ModelParams& p) {
  return {-p.b1, p.a1, tau * (p.gamma * p.b2 - p.c1), -p.gamma * p.a2 * tau,
          p.gamma * p.c2 * tau * tau};
}

namespace {

// Newton on h from a positive seed; returns NaN when it leaves u > 0 for good.
double polish_zero(double seed, double tau, const ModelParams& p) {
  double u = seed;
  for (int it = 0; it < 200; ++it) {
    const double hv = h_value(u, tau, p);
    const double slope = h_du(u, tau, p);
    if (hv == 0.0) return u;
    if (slope == 0.0 || !std::isfinite(slope)) break;
    double next = u - hv / slope;
    if (!(next > 0.0)) next = 0.5 * u;
    const double step = std::abs(next - u);
    u = next;
    if (step <= 4.0 * std::numeric_limits<double>::epsilon() * u) break;
  }
  return u;
}

// Sign changes of h on a geometric grid between the Cauchy bounds of the
// quartic, refined by toms748. Used when the companion eigenvalues miss a
// zero: at small tau the zeros sit at scales tau, sqrt(tau) and 1, and the
// two small ones are ill-conditioned in the unbalanced companion matrix.
std::vector<double> scan_zeros(double tau, const ModelParams& p) {
  const auto q = h_quartic(tau, p);
  double hi_bound = 0.0;
  double lo_bound = 0.0;
  for (int k = 1; k < 5; ++k) hi_bound = std::max(hi_bound, std::abs(q[k] / q[0]));
  for (int k = 0; k < 4; ++k) lo_bound = std::max(lo_bound, std::abs(q[k] / q[4]));
  const double lo = 0.5 / (1.0 + lo_bound);
  const double hi = 2.0 * (1.0 + hi_bound);
  const int n = static_cast<int>(std::ceil(64.0 * std::log10(hi / lo)));
  const double ratio = std::pow(hi / lo, 1.0 / n);
  auto hv = [&](double u) { return h_value(u, tau, p); };
  std::vector<double> out;
  double a = lo;
  double fa = hv(a);
  for (int k = 1; k <= n; ++k) {
    const double b = k == n ? hi : a * ratio;
    const double fb = hv(b);
    if (fa == 0.0) {
      out.push_back(a);
    } else if (fa * fb < 0.0) {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(
          hv, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
      out.push_back(0.5 * (r.first + r.second));
    }
    a = b;
    fa = fb;
  }
  return out;
}

}  // namespace

ZeroTriple zeros_of_h(double tau, const ModelParams& p) {
  if (!(tau > 0.0)) throw DomainError("zeros_of_h: tau must be positive");

  const auto q = h_quartic(tau, p);
  Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) companion(0, k) = -q[k + 1] / q[0];
  for (int k = 1; k < 4; ++k) companion(k, k - 1) = 1.0;
  const Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
  const auto eig = solver.eigenvalues();

  std::vector<double> seeds;
  for (int k = 0; k < 4; ++k) {
    const std::complex<double> lam = eig[k];
    if (lam.real() <= 0.0) continue;
    const double im = std::abs(lam.imag());
    if (im == 0.0) {
      seeds.push_back(lam.real());
    } else if (im <= 1e-6 * std::abs(lam)) {
      // A nearly real pair may be two close real zeros split by rounding.
      seeds.push_back(lam.real() - im);
      seeds.push_back(lam.real() + im);
    }
  }

  std::vector<double> roots;
  for (double seed : seeds) {
    if (!(seed > 0.0)) continue;
    const double z = polish_zero(seed, tau, p);
    if (!(z > 0.0) || !std::isfinite(z)) continue;
    if (std::abs(h_value(z, tau, p)) > kRootAtol) {
      std::ostringstream os;
      os << "zeros_of_h: Newton polish stalled at u=" << z << " (|h|="
         << std::abs(h_value(z, tau, p)) << ") for tau=" << tau;
      throw RootFindingFailure(os.str());
    }
    roots.push_back(z);
  }
  auto merged = [](std::vector<double> r) {
    std::sort(r.begin(), r.end());
    std::vector<double> m;
    for (double z : r) {
      if (!m.empty() && std::abs(z - m.back()) <= kRootMergeRel * std::max(z, m.back())) continue;
      m.push_back(z);
    }
    return m;
  };

  ZeroTriple out;
  out.tau = tau;
  out.zeros = merged(roots);
  if (out.zeros.size() < 3) {
    for (double z : scan_zeros(tau, p)) roots.push_back(polish_zero(z, tau, p));
    out.zeros = merged(roots);
  }
  out.complete = out.zeros.size() == 3;
  return out;
}

double tau_bar(const ModelParams& p) {
  return std::min(p.a1 * p.a1 / (4.0 * p.b1 * p.c1),
                  p.a2 * p.a2 / (4.0 * p.b2 * p.c2));
}

namespace {

bool has_three_zeros(double tau, const ModelParams& p) {
  try {
    return zeros_of_h(tau, p).complete;
  } catch (const RootFindingFailure&) {
    return false;
  }
}

}  // namespace

bool in_admissible_set(double tau, const ModelParams& p) {
  return tau > 0.0 && tau <= tau_bar(p) && has_three_zeros(tau, p);
}

double tau_tilde(const ModelParams& p, double resolution) {
  const double top = tau_bar(p);
  constexpr int kGrid = 4000;
  double lo = 0.0;
  double hi = top;
  bool found = false;
  for (int k = 1; k <= kGrid; ++k) {
    const double t = top * k / kGrid;
    if (!has_three_zeros(t, p)) {
      hi = t;
      found = true;
      break;
    }
    lo = t;
  }
  if (!found) return top;
  if (lo == 0.0) {
    // First grid point already fails; walk down until three zeros appear.
    lo = hi;
    while (!has_three_zeros(lo, p)) {
      hi = lo;
      lo *= 0.1;
      if (lo < 1e-300) return 0.0;
    }
  }
  while (hi - lo > resolution) {
    const double mid = 0.5 * (lo + hi);
    (has_three_zeros(mid, p) ? lo : hi) = mid;
  }
  return lo;
}

double discriminant_D(const ModelParams& p) {
  const double A = p.A();
  const double B = p.B();
  const double C = p.C();
  return p.gamma * p.b2 * (A - B) * (B + C - 2.0 * A) +
         p.c2 * (C - A) * (A * (B + C) - 2.0 * B * C);
}

ConstantState constant_state(const ModelParams& p) {
  const Regime regime = classify_regime(p);
  if (!regime.nondegenerate()) {
    throw RegimeError("no positive constant state: " + regime.detail);
  }
  const double den = p.b1 * p.c2 - p.b2 * p.c1;
  if (den == 0.0) throw RegimeError("no positive constant state: b1 c2 == b2 c1");
  ConstantState s;
  s.u_star = (p.a1 * p.c2 - p.a2 * p.c1) / den;
  s.v_star = (p.b1 * p.a2 - p.b2 * p.a1) / den;
  if (!(s.u_star > 0.0) || !(s.v_star > 0.0)) {
    throw RegimeError("constant state is not positive");
  }
  s.w_star = p.delta * s.u_star - p.gamma * s.v_star;
  s.tau_star = s.u_star * s.v_star;
  return s;
}

FgLandmarks fg_zero_landmarks(double tau, const ModelParams& p) {
  const double disc_f = p.a1 * p.a1 - 4.0 * p.b1 * p.c1 * tau;
  const double disc_g = p.a2 * p.a2 - 4.0 * p.b2 * p.c2 * tau;
  if (disc_f < 0.0 || disc_g < 0.0) {
    throw DomainError("fg_zero_landmarks: tau exceeds a discriminant bound");
  }
  const double sf = p.a1 + std::sqrt(disc_f);
  const double sg = p.a2 + std::sqrt(disc_g);
  return {2.0 * p.c1 * tau / sf, sf / (2.0 * p.b1), 2.0 * p.c2 * tau / sg,
          sg / (2.0 * p.b2)};
}

Potential::Potential(const ModelParams& p, double tau, double base)
    : p_(p), tau_(tau), base_(base) {
  if (!(tau > 0.0)) throw DomainError("Potential: tau must be positive");
  if (!(base > 0.0)) throw DomainError("Potential: base point must be positive");
  const double g = p.gamma;
  const double dl = p.delta;
  const double k = g * p.b2 - p.c1;
  const double t = tau;
  coef_ = {-dl * p.b1,
           dl * p.a1,
           dl * k * t - g * t * p.b1,
           g * t * p.a1 - dl * g * p.a2 * t,
           dl * g * p.c2 * t * t + g * k * t * t,
           -g * g * p.a2 * t * t,
           g * g * p.c2 * t * t * t};
}

double Potential::difference(double a, double b) const {
  return difference_from(a, b - a);
}

double Potential::difference_from(double a, double offset) const {
  const double b = a + offset;
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("H: u must be positive");
  if (offset == 0.0) return 0.0;
  // b^q - a^q = offset * S_q for q = 1, 2, 3 and the reciprocal powers via
  // 1/b^q - 1/a^q = -offset * S_q / (a b)^q, so no term loses the offset.
  const double s2 = a + b;
  const double s3 = a * a + a * b + b * b;
  const double ab = a * b;
  const double iab = 1.0 / ab;
  const double iab2 = iab * iab;
  return offset * (coef_[0] * s3 / 3.0 + coef_[1] * s2 / 2.0 + coef_[2] +
                   coef_[4] * iab + coef_[5] * s2 * iab2 / 2.0 +
                   coef_[6] * s3 * iab2 * iab / 3.0) +
         coef_[3] * std::log1p(offset / a);
}

double Potential::density(double u) const {
  return h_value(u, tau_, p_) * weight(u);
}

double Potential::weight(double u) const {
  return p_.delta + p_.gamma * tau_ / (u * u);
}

double potential_H(double u, double tau, const ModelParams& p) {
  if (!(u > 0.0)) throw DomainError("potential_H: u must be positive");
  const ZeroTriple zt = zeros_of_h(tau, p);
  if (!zt.complete) {
    throw StateError("potential_H: h(., tau) does not have three zeros");
  }
  return Potential(p, tau, zt.z2())(u);
}

}  // namespace sktlimit
