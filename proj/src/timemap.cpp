#include "sktlimit/timemap.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "sktlimit/errors.hpp"

namespace sktlimit {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();
// Below this fraction of the orbit length potential gaps are integrated from
// the factored h instead of taken from the closed-form potential.
constexpr double kLocalGap = 0.05;
// Orbits shorter than this fraction of m take every gap from the factored h.
constexpr double kSmallOrbit = 0.3;
// Panel length in log u for the local area integrals.
constexpr double kAreaPanel = 0.35;
constexpr int kAreaOrder = 8;
// Deepest heteroclinic offset the amplitude scan looks at, relative to the
// offset span. Keeps every potential gap well inside the double range.
constexpr double kDeepestOffset = 1e-140;
// Points per panel of the extra end panels; 1/sqrt(phi^2 + phi_c^2) on
// ratio-4 panels needs about this many for full double accuracy.
constexpr int kDeepOrder = 16;

ZeroTriple complete_zeros(double tau, const ModelParams& p) {
  ZeroTriple zt = zeros_of_h(tau, p);
  if (!zt.complete) {
    std::ostringstream os;
    os << "h(., tau) has " << zt.zeros.size() << " positive zeros at tau=" << tau
       << ", three are required";
    throw StateError(os.str());
  }
  return zt;
}

// H(z3) - H(z1) in quad precision. The two barriers are nearly equal along
// the interesting part of a branch and their difference decides which saddle
// the orbits approach, so double rounding of either would be amplified.
double level_gap_quad(const ModelParams& p, double tau, double z1, double z3) {
  using Q = boost::multiprecision::cpp_bin_float_quad;
  const Q a1 = p.a1, a2 = p.a2, b1 = p.b1, b2 = p.b2, c1 = p.c1, c2 = p.c2;
  const Q g = p.gamma, dl = p.delta, t = tau;
  auto h = [&](const Q& u) {
    return u * (a1 - b1 * u) - c1 * t - g * (t / u) * (a2 - b2 * u - c2 * t / u);
  };
  auto hu = [&](const Q& u) {
    return a1 - 2 * b1 * u + g * a2 * t / (u * u) - 2 * g * c2 * t * t / (u * u * u);
  };
  auto polish = [&](Q u) {
    for (int it = 0; it < 6; ++it) u -= h(u) / hu(u);
    return u;
  };
  const Q q1 = polish(Q(z1));
  const Q q3 = polish(Q(z3));
  const Q k = g * b2 - c1;
  const std::array<Q, 7> coef{-dl * b1,
                              dl * a1,
                              dl * k * t - g * t * b1,
                              g * t * a1 - dl * g * a2 * t,
                              dl * g * c2 * t * t + g * k * t * t,
                              -g * g * a2 * t * t,
                              g * g * c2 * t * t * t};
  Q acc = 0;
  for (int i = 0; i < 7; ++i) {
    const int n = 2 - i;
    if (n == -1) {
      acc += coef[i] * log(q3 / q1);
    } else {
      acc += coef[i] * (pow(q3, n + 1) - pow(q1, n + 1)) / (n + 1);
    }
  }
  return static_cast<double>(acc);
}

// Solves F(x) = target for x in (0, hi) with F increasing, F(0) = 0 and
// F(x) ~ kappa x^2 / 2 near 0. Newton kept inside a shrinking bracket.
template <class F, class DF>
double solve_increasing(F f, DF df, double target, double hi, double kappa) {
  double lo = 0.0;
  double x = kappa > 0.0 ? std::sqrt(2.0 * target / kappa) : 0.5 * hi;
  if (!(x > 0.0) || !(x < hi)) x = 0.5 * hi;
  for (int it = 0; it < 300; ++it) {
    const double r = f(x) - target;
    if (r == 0.0) return x;
    (r < 0.0 ? lo : hi) = x;
    const double slope = df(x);
    double next = slope > 0.0 ? x - r / slope : -1.0;
    if (!(next > lo && next < hi)) next = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * x) return next;
    x = next;
  }
  return x;
}

}  // namespace

std::string_view to_string(CaseTag tag) {
  return tag == CaseTag::CaseI ? "I" : "II";
}

OrbitFamily::OrbitFamily(const ModelParams& p, double tau, QuadratureOptions quad)
    : p_(p),
      tau_(tau),
      quad_(quad),
      zeros_(complete_zeros(tau, p)),
      pot_(p, tau, zeros_.z2()),
      hu_z2_(h_du(zeros_.z2(), tau, p)) {
  const double z1 = zeros_.z1();
  const double z2 = zeros_.z2();
  const double z3 = zeros_.z3();
  r4_ = -p.gamma * p.c2 * tau * tau / (p.b1 * z1 * z2 * z3);
  T1_ = z2 - z1;
  T3_ = z3 - z2;
  H1_ = area(point_from_zero(1, 0.0), T1_);
  H3_ = area(point_from_zero(3, 0.0), -T3_);
  gap31_ = level_gap_quad(p, tau, z1, z3);
  if (std::abs(gap31_) <= 1e-24 * std::max(H1_, H3_)) gap31_ = 0.0;

  if (gap31_ >= 0.0) {
    case_ = {CaseTag::CaseI, z1};
    t_lower_ = 0.0;
    return;
  }
  // CaseII: the orbit through m_lower reaches z3, so A1(t) = H1 - H3.
  const Point base = point_from_zero(1, 0.0);
  const double kappa = neg_hw(point_from_zero(1, 1e-8 * T1_)) / (1e-8 * T1_);
  t_lower_ = solve_increasing([&](double t) { return area(base, t); },
                              [&](double t) { return neg_hw(point_from_zero(1, t)); },
                              -gap31_, T1_, kappa);
  case_ = {CaseTag::CaseII, z1 + t_lower_};
}

OrbitFamily::Point OrbitFamily::point_from_zero(int k, double offset) const {
  const double zk = zeros_.zeros.at(k - 1);
  Point x;
  x.u = zk + offset;
  x.d1 = k == 1 ? offset : (zk - zeros_.z1()) + offset;
  x.d2 = k == 2 ? offset : (zk - zeros_.z2()) + offset;
  x.d3 = k == 3 ? offset : (zk - zeros_.z3()) + offset;
  return x;
}

OrbitFamily::Point OrbitFamily::left_point(const OrbitEnds& e, double offset) const {
  Point x;
  x.u = e.m + offset;
  x.d1 = e.t_m + offset;
  x.d2 = offset - e.a_m;
  x.d3 = x.d2 - T3_;
  return x;
}

OrbitFamily::Point OrbitFamily::right_point(const OrbitEnds& e, double offset) const {
  Point x;
  x.u = e.M - offset;
  x.d3 = -(e.s_M + offset);
  x.d2 = e.b_M - offset;
  x.d1 = x.d2 + T1_;
  return x;
}

double OrbitFamily::neg_hw(const Point& x) const {
  const double u = x.u;
  return p_.b1 * x.d1 * x.d2 * x.d3 * (u - r4_) * pot_.weight(u) / (u * u);
}

double OrbitFamily::area(const Point& x, double len) const {
  if (len == 0.0) return 0.0;
  // Integrate in y = log(s / x.u) so that the pole of h w at s = 0 is far
  // from every panel; offsets of the nodes come from expm1 and stay exact.
  const double Y = std::log1p(len / x.u);
  const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(Y) / kAreaPanel)));
  // In y the integrand is a short sum of exponentials, so GL converges like
  // Y^(2n) / (2n)! and short panels need few nodes.
  static const GaussRule& g3 = gauss_legendre(3);
  static const GaussRule& g5 = gauss_legendre(5);
  static const GaussRule& g8 = gauss_legendre(kAreaOrder);
  const double ay = std::abs(Y) / panels;
  const GaussRule& g = ay <= 1e-3 ? g3 : (ay <= 0.05 ? g5 : g8);
  const double hw = 0.5 * Y / panels;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double mid = Y * (k + 0.5) / panels;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double y = mid + hw * g.nodes[i];
      const double step = x.u * std::expm1(y);
      const Point s{x.u + step, x.d1 + step, x.d2 + step, x.d3 + step};
      acc += g.weights[i] * neg_hw(s) * s.u;
    }
  }
  return acc * hw;
}

OrbitEnds OrbitFamily::complete_ends(OrbitEnds e, bool left_known) const {
  const double kappa2 = std::max(0.0, hu_z2_ * pot_.weight(z2()));
  if (left_known) {
    e.m = e.t_m < e.a_m ? zeros_.z1() + e.t_m : z2() - e.a_m;
    const double E = area(left_point(e, 0.0), e.a_m);
    if (E <= 0.5 * H3_) {
      const Point base = point_from_zero(2, 0.0);
      e.b_M = solve_increasing([&](double b) { return -area(base, b); },
                               [&](double b) { return -neg_hw(point_from_zero(2, b)); }, E,
                               T3_, kappa2);
      e.s_M = T3_ - e.b_M;
    } else {
      const double target = gap31_ + area(point_from_zero(1, 0.0), e.t_m);
      const Point base = point_from_zero(3, 0.0);
      const double kappa3 = -neg_hw(point_from_zero(3, -1e-8 * T3_)) / (1e-8 * T3_);
      e.s_M = solve_increasing([&](double s) { return area(base, -s); },
                               [&](double s) { return -neg_hw(point_from_zero(3, -s)); },
                               std::max(target, 0.0), T3_, kappa3);
      e.b_M = T3_ - e.s_M;
    }
  } else {
    e.M = e.s_M < e.b_M ? zeros_.z3() - e.s_M : z2() + e.b_M;
    const double E = area(right_point(e, 0.0), -e.b_M);
    if (E <= 0.5 * H1_) {
      const Point base = point_from_zero(2, 0.0);
      e.a_m = solve_increasing([&](double a) { return -area(base, -a); },
                               [&](double a) { return neg_hw(point_from_zero(2, -a)); }, E,
                               T1_, kappa2);
      e.t_m = T1_ - e.a_m;
    } else {
      const double target = area(point_from_zero(3, 0.0), -e.s_M) - gap31_;
      const Point base = point_from_zero(1, 0.0);
      const double kappa1 = neg_hw(point_from_zero(1, 1e-8 * T1_)) / (1e-8 * T1_);
      e.t_m = solve_increasing([&](double t) { return area(base, t); },
                               [&](double t) { return neg_hw(point_from_zero(1, t)); },
                               std::max(target, 0.0), T1_, kappa1);
      e.a_m = T1_ - e.t_m;
    }
  }
  e.m = e.t_m < e.a_m ? zeros_.z1() + e.t_m : z2() - e.a_m;
  e.M = e.s_M < e.b_M ? zeros_.z3() - e.s_M : z2() + e.b_M;
  return e;
}

void OrbitFamily::require_amplitude(double m) const {
  if (!(m > m_lower()) || !(m < z2())) {
    std::ostringstream os;
    os << "amplitude m=" << m << " outside (" << m_lower() << ", " << z2()
       << ") at tau=" << tau_;
    throw DomainError(os.str());
  }
}

OrbitEnds OrbitFamily::ends_from_m(double m) const {
  require_amplitude(m);
  OrbitEnds e;
  e.m = m;
  e.t_m = m - zeros_.z1();
  e.a_m = z2() - m;
  return complete_ends(e, true);
}

double OrbitFamily::offset_span() const {
  return case_.tag == CaseTag::CaseI ? T1_ : T3_;
}

OrbitEnds OrbitFamily::ends_from_offset(double q) const {
  const double span = offset_span();
  if (!(q > 0.0) || !(q < span)) {
    std::ostringstream os;
    os << "orbit offset q=" << q << " outside (0, " << span << ") at tau=" << tau_;
    throw DomainError(os.str());
  }
  OrbitEnds e;
  if (case_.tag == CaseTag::CaseI) {
    e.t_m = q;
    e.a_m = T1_ - q;
    return complete_ends(e, true);
  }
  e.s_M = q;
  e.b_M = T3_ - q;
  return complete_ends(e, false);
}

double OrbitFamily::offset_of(const OrbitEnds& e) const {
  return case_.tag == CaseTag::CaseI ? e.t_m : e.s_M;
}

double OrbitFamily::conjugate(double m) const { return ends_from_m(m).M; }

bool OrbitFamily::local_gap(const OrbitEnds& e, double offset) const {
  // Small orbits lose everything to cancellation in the closed form.
  return offset <= kLocalGap * e.length() || e.length() <= kSmallOrbit * e.m;
}

double OrbitFamily::gap_left(const OrbitEnds& e, double offset) const {
  if (local_gap(e, offset)) return area(left_point(e, 0.0), offset);
  return -pot_.difference_from(e.m, offset);
}

double OrbitFamily::gap_right(const OrbitEnds& e, double offset) const {
  if (local_gap(e, offset)) return area(right_point(e, 0.0), -offset);
  return -pot_.difference_from(e.m, e.length() - offset);
}

OrbitFamily::PhiSample OrbitFamily::phi_sample(const OrbitEnds& e, double s, double c) const {
  const double L = e.length();
  PhiSample out;
  double D;
  if (s <= c) {
    const double off = L * s * s;
    out.u = left_point(e, off).u;
    D = gap_left(e, off);
  } else {
    const double off = L * c * c;
    out.u = right_point(e, off).u;
    D = gap_right(e, off);
  }
  out.factor = L * s * c / std::sqrt(D);
  return out;
}

template <class Fn>
double OrbitFamily::integrate_orbit(const OrbitEnds& e, Fn&& fn) const {
  const double L = e.length();
  auto integrand = [&](double s, double c) {
    const PhiSample ps = phi_sample(e, s, c);
    return fn(ps.u) * ps.factor;
  };
  if (quad_.scheme == QuadratureScheme::TanhSinh) {
    return integrate_phi(
        [&](double phi) { return integrand(std::sin(0.5 * phi), std::cos(0.5 * phi)); },
        quad_);
  }

  auto fail = [&](double phi) {
    std::ostringstream os;
    os << "non-finite orbit integrand at phi=" << phi << " (m=" << e.m
       << ", tau=" << tau_ << ")";
    throw QuadratureError(os.str());
  };

  // Near a saddle the integrand is ~ 1/sqrt(phi^2 + phi_c^2) with
  // phi_c = 2 sqrt(offset / L); the graded rule is deepened to reach it.
  const bool graded = quad_.scheme == QuadratureScheme::GradedGaussLegendre;
  const double w_end = graded_end_width();
  const double lo_left = 0.05 * 2.0 * std::sqrt(e.t_m / L);
  const double lo_right = 0.05 * 2.0 * std::sqrt(e.s_M / L);
  const bool deep_left = graded && lo_left < w_end;
  const bool deep_right = graded && lo_right < w_end;

  double acc = 0.0;
  for (const PhiNode& node : phi_rule(quad_)) {
    if ((deep_left && node.phi < w_end) || (deep_right && node.phi > kPi - w_end)) {
      continue;
    }
    const double v = integrand(node.sin_half, node.cos_half);
    if (!std::isfinite(v)) fail(node.phi);
    acc += node.weight * v;
  }
  if (deep_left) {
    for (const PhiNode& node : graded_end_nodes(lo_left, w_end, kDeepOrder)) {
      const double v = integrand(node.sin_half, node.cos_half);
      if (!std::isfinite(v)) fail(node.phi);
      acc += node.weight * v;
    }
  }
  if (deep_right) {
    for (const PhiNode& node : graded_end_nodes(lo_right, w_end, kDeepOrder)) {
      const double v = integrand(node.cos_half, node.sin_half);
      if (!std::isfinite(v)) fail(kPi - node.phi);
      acc += node.weight * v;
    }
  }
  return acc;
}

double OrbitFamily::orbit_integral(const OrbitEnds& e,
                                   const std::function<double(double)>& fn) const {
  return integrate_orbit(e, fn);
}

double OrbitFamily::orbit_integral_between(const OrbitEnds& e, double phi_a, double phi_b,
                                           const std::function<double(double)>& fn) const {
  if (!(0.0 <= phi_a && phi_a <= phi_b && phi_b <= kPi)) {
    throw DomainError("orbit_integral_between: need 0 <= phi_a <= phi_b <= pi");
  }
  if (phi_a == phi_b) return 0.0;
  const double L = e.length();
  const double width = phi_b - phi_a;
  double acc = 0.0;
  auto add = [&](double s, double c, double weight) {
    const PhiSample ps = phi_sample(e, s, c);
    const double v = weight * fn(ps.u) * ps.factor;
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite orbit integrand at u=" << ps.u << " (m=" << e.m << ", tau=" << tau_
         << ")";
      throw QuadratureError(os.str());
    }
    acc += v;
  };
  // Pieces touching an end are graded down to the saddle scale.
  if (phi_a == 0.0) {
    const double lo = std::min(0.1 * std::sqrt(e.t_m / L), 0.25 * width);
    for (const PhiNode& node : graded_end_nodes(lo, width, kDeepOrder)) {
      add(node.sin_half, node.cos_half, node.weight);
    }
    return acc;
  }
  if (phi_b == kPi) {
    const double lo = std::min(0.1 * std::sqrt(e.s_M / L), 0.25 * width);
    for (const PhiNode& node : graded_end_nodes(lo, width, kDeepOrder)) {
      add(node.cos_half, node.sin_half, node.weight);
    }
    return acc;
  }
  static const GaussRule& g = gauss_legendre(16);
  const double mid = 0.5 * (phi_a + phi_b);
  const double hw = 0.5 * width;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double phi = mid + hw * g.nodes[i];
    const double psi = kPi - phi;
    if (phi <= psi) {
      add(std::sin(0.5 * phi), std::cos(0.5 * phi), hw * g.weights[i]);
    } else {
      add(std::cos(0.5 * psi), std::sin(0.5 * psi), hw * g.weights[i]);
    }
  }
  return acc;
}

OrbitIntegrals OrbitFamily::integrals(double m) const {
  const OrbitEnds e = ends_from_m(m);
  OrbitIntegrals out;
  out.M = e.M;
  out.I = integrate_orbit(e, [](double) { return 1.0; });
  out.J = integrate_orbit(e, [](double u) { return 1.0 / (u * u); });
  return out;
}

double OrbitFamily::time_map(double m, double d) const {
  if (!(d > 0.0)) throw DomainError("time map: d must be positive");
  require_amplitude(m);
  if (z2() - m < guard()) return time_map_limit(d);
  return time_map(ends_from_m(m), d);
}

double OrbitFamily::time_map(const OrbitEnds& e, double d) const {
  if (!(d > 0.0)) throw DomainError("time map: d must be positive");
  if (e.a_m < guard()) return time_map_limit(d);
  const double K = integrate_orbit(e, [this](double u) { return pot_.weight(u); });
  return std::sqrt(0.5 * d) * K;
}

double OrbitFamily::time_map_limit(double d) const {
  if (!(hu_z2_ > 0.0)) {
    throw StateError("h_u(z2) <= 0: the time map diverges at z2");
  }
  return kPi * std::sqrt(d * pot_.weight(z2()) / hu_z2_);
}

double OrbitFamily::mode_threshold(int j) const {
  if (j < 1) throw DomainError("mode index must be >= 1");
  if (!(hu_z2_ > 0.0)) {
    throw StateError("h_u(z2) <= 0: no small-amplitude orbits at this tau");
  }
  const double k = j * kPi;
  return hu_z2_ / (pot_.weight(z2()) * k * k);
}

std::vector<double> OrbitFamily::solve_offsets(int j, double d, int scan_points) const {
  const double threshold = mode_threshold(j);
  if (!(d > 0.0)) throw DomainError("solve_amplitude: d must be positive");
  if (scan_points < 4) throw DomainError("solve_amplitude: scan needs >= 4 points");
  const double target = 1.0 / j;
  const double span = offset_span();

  // Geometric toward both ends: deep toward the heteroclinic, down to the
  // guard toward z2.
  const int half = scan_points / 2;
  const double deep_ratio = std::pow(0.5 / kDeepestOffset, 1.0 / (half - 1));
  const double top_ratio = std::pow(0.5 / 1e-9, 1.0 / (half - 1));
  std::vector<double> grid;
  grid.reserve(2 * half);
  double lo_off = kDeepestOffset * span;
  double hi_off = 1e-9 * span;
  for (int k = 0; k < half; ++k, lo_off *= deep_ratio, hi_off *= top_ratio) {
    grid.push_back(std::min(lo_off, 0.5 * span));
    grid.push_back(span - std::min(hi_off, 0.5 * span));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  auto g = [&](double q) { return time_map(ends_from_offset(q), d) - target; };
  // Sign changes inside the rounding noise of X are not roots; they show up
  // when d sits on a mode threshold and X is flat at 1/j near z2.
  const double noise = 1e-13 * target;
  std::vector<double> roots;
  double q0 = grid.front();
  double g0 = g(q0);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double q1 = grid[k];
    const double g1 = g(q1);
    const bool resolved = std::max(std::abs(g0), std::abs(g1)) >= noise;
    if (resolved && g0 == 0.0) {
      roots.push_back(q0);
    } else if (resolved && (g0 < 0.0) != (g1 < 0.0) && g1 != 0.0) {
      std::uintmax_t iters = 100;
      const auto r = boost::math::tools::toms748_solve(
          g, q0, q1, g0, g1, boost::math::tools::eps_tolerance<double>(50), iters);
      roots.push_back(0.5 * (r.first + r.second));
    }
    q0 = q1;
    g0 = g1;
  }

  if (roots.empty() && d < threshold * (1.0 - 1e-9)) {
    std::ostringstream os;
    os << "X(m)=1/" << j << " has no sign change on the scan grid at tau=" << tau_
       << ", d=" << d << " (threshold " << threshold << ")";
    throw NoRootError(os.str());
  }
  return roots;
}

std::vector<double> OrbitFamily::solve_amplitude(int j, double d, int scan_points) const {
  std::vector<double> out;
  for (double q : solve_offsets(j, d, scan_points)) out.push_back(ends_from_offset(q).m);
  return out;
}

std::optional<double> OrbitFamily::solve_offset_near(int j, double d, double q_guess) const {
  const double target = 1.0 / j;
  const double span = offset_span();
  // Work in v = log(q / (span - q)), which resolves both ends alike.
  auto to_q = [&](double v) {
    return v < 0.0 ? span * std::exp(v) / (1.0 + std::exp(v)) : span / (1.0 + std::exp(-v));
  };
  const double v_lo = std::log(kDeepestOffset);
  const double v_hi = std::log(1.0 / 1e-9);
  const double qg = std::clamp(q_guess, kDeepestOffset * span, span * (1.0 - 1e-9));
  const double centre = std::clamp(std::log(qg) - std::log(span - qg), v_lo, v_hi);
  auto g = [&](double v) { return time_map(ends_from_offset(to_q(v)), d) - target; };

  const double gc = g(centre);
  if (gc == 0.0) return to_q(centre);
  double step = 1e-3;
  double left = centre;
  double right = centre;
  double gl = gc;
  double gr = gc;
  while (left > v_lo || right < v_hi) {
    const double nl = std::max(v_lo, centre - step);
    const double nr = std::min(v_hi, centre + step);
    const double gnl = nl < left ? g(nl) : gl;
    const double gnr = nr > right ? g(nr) : gr;
    const bool lchange = (gnl < 0.0) != (gl < 0.0);
    const bool rchange = (gnr < 0.0) != (gr < 0.0);
    if (lchange || rchange) {
      // Take the side whose new end is closer to the guess; left on ties.
      double a = nl, b = left, ga = gnl, gb = gl;
      if (!lchange || (rchange && nr - centre < centre - nl)) {
        a = right, b = nr, ga = gr, gb = gnr;
      }
      if (ga == 0.0) return to_q(a);
      if (gb == 0.0) return to_q(b);
      std::uintmax_t iters = 100;
      const auto r = boost::math::tools::toms748_solve(
          g, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(50), iters);
      return to_q(0.5 * (r.first + r.second));
    }
    left = nl;
    right = nr;
    gl = gnl;
    gr = gnr;
    step *= 2.0;
  }
  return std::nullopt;
}

double conjugate_M(double m, double tau, const ModelParams& p) {
  return OrbitFamily(p, tau).conjugate(m);
}

double time_map_X(double m, double tau, double d, const ModelParams& p,
                  const QuadratureOptions& quad) {
  return OrbitFamily(p, tau, quad).time_map(m, d);
}

std::vector<double> solve_amplitude(int j, double tau, double d, const ModelParams& p,
                                    const QuadratureOptions& quad) {
  return OrbitFamily(p, tau, quad).solve_amplitude(j, d);
}

}  // namespace sktlimit
