#include "sktlimit/bvp.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sktlimit/errors.hpp"

namespace sktlimit {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

constexpr int kStencil = 6;

// Derivative at t[0] of the polynomial through kStencil points.
double one_sided_derivative(const double* t, const double* y) {
  double acc = 0.0;
  for (int i = 0; i < kStencil; ++i) {
    // d/dt of the Lagrange basis l_i at t[0].
    double li = 0.0;
    if (i == 0) {
      for (int k = 1; k < kStencil; ++k) li += 1.0 / (t[0] - t[k]);
    } else {
      double num = 1.0;
      double den = 1.0;
      for (int k = 0; k < kStencil; ++k) {
        if (k == i) continue;
        if (k != 0) num *= t[0] - t[k];
        den *= t[i] - t[k];
      }
      li = num / den;
    }
    acc += li * y[i];
  }
  return acc;
}

}  // namespace

std::string_view to_string(Orientation o) { return o == Orientation::Plus ? "+" : "-"; }

Orientation orientation_from_string(std::string_view s) {
  if (s == "+" || s == "plus") return Orientation::Plus;
  if (s == "-" || s == "minus") return Orientation::Minus;
  throw DomainError("orientation must be + or -, got '" + std::string(s) + "'");
}

Profile reconstruct_profile(const OrbitFamily& fam, const OrbitEnds& e, int j, Orientation o,
                            double d, int n_nodes) {
  if (j < 1) throw DomainError("reconstruct_profile: j must be >= 1");
  if (n_nodes < 5) throw DomainError("reconstruct_profile: need at least 5 nodes");
  const double target = 1.0 / j;
  const double X = fam.time_map(e, d);
  if (std::abs(X - target) > 1e-8 * target) {
    std::ostringstream os;
    os << "reconstruct_profile: X=" << X << " is not 1/" << j << " (m=" << e.m
       << ", tau=" << fam.tau() << ", d=" << d << ")";
    throw DomainError(os.str());
  }
  const ModelParams& p = fam.params();
  const double tau = fam.tau();
  const double L = e.length();
  const double scale = std::sqrt(0.5 * d);
  auto weight = [&](double u) { return fam.potential().weight(u); };

  // One monotone piece, m -> M.
  std::vector<double> xs(n_nodes);
  std::vector<double> us(n_nodes);
  double prev = 0.0;
  double x = 0.0;
  for (int k = 0; k < n_nodes; ++k) {
    const double phi = k == n_nodes - 1 ? kPi : kPi * k / (n_nodes - 1);
    const double psi = kPi - phi;
    if (phi <= psi) {
      const double s = std::sin(0.5 * phi);
      us[k] = fam.left_point(e, L * s * s).u;
    } else {
      const double c = std::sin(0.5 * psi);
      us[k] = fam.right_point(e, L * c * c).u;
    }
    if (k > 0) x += scale * fam.orbit_integral_between(e, prev, phi, weight);
    xs[k] = x;
    prev = phi;
  }
  us.front() = e.m;
  us.back() = e.M;
  if (std::abs(xs.back() - target) > 1e-7) {
    std::ostringstream os;
    os << "profile piece ends at x=" << xs.back() << ", expected " << target;
    throw AssemblyError(os.str());
  }
  xs.back() = target;

  Profile out;
  out.j = j;
  out.orientation = o;
  out.tau = tau;
  out.d = d;
  out.m = e.m;
  out.M = e.M;
  out.ends = e;
  const std::size_t total = static_cast<std::size_t>(j) * (n_nodes - 1) + 1;
  out.x.reserve(total);
  out.u.reserve(total);
  for (int piece = 0; piece < j; ++piece) {
    // Plus starts increasing; Minus starts decreasing.
    const bool increasing = (piece % 2 == 0) == (o == Orientation::Plus);
    for (int k = piece == 0 ? 0 : 1; k < n_nodes; ++k) {
      const int idx = increasing ? k : n_nodes - 1 - k;
      const double local = increasing ? xs[k] : target - xs[idx];
      out.x.push_back(k == n_nodes - 1 ? (piece + 1.0) / j : piece * target + local);
      out.u.push_back(us[idx]);
    }
  }
  out.x.back() = 1.0;
  out.w.resize(out.u.size());
  for (std::size_t k = 0; k < out.u.size(); ++k) out.w[k] = w_of_u(out.u[k], tau, p);

  const ConstraintIntegrals ci = constraint_integrals(fam, e, j, d);
  out.int_f = ci.int_f;
  out.int_g = ci.int_g;
  return out;
}

Profile reconstruct_profile(int j, Orientation o, double m, double tau, double d,
                            const ModelParams& p, int n_nodes, const QuadratureOptions& quad) {
  const OrbitFamily fam(p, tau, quad);
  return reconstruct_profile(fam, fam.ends_from_m(m), j, o, d, n_nodes);
}

Profile constant_profile(const ModelParams& p, int n_nodes) {
  if (n_nodes < 2) throw DomainError("constant_profile: need at least 2 nodes");
  const ConstantState cs = constant_state(p);
  Profile out;
  out.tau = cs.tau_star;
  out.m = out.M = cs.u_star;
  out.ends.m = out.ends.M = cs.u_star;
  for (int k = 0; k < n_nodes; ++k) {
    out.x.push_back(k == n_nodes - 1 ? 1.0 : static_cast<double>(k) / (n_nodes - 1));
    out.u.push_back(cs.u_star);
    out.w.push_back(cs.w_star);
  }
  out.int_f = reaction_f(cs.u_star, cs.v_star, p);
  out.int_g = reaction_g(cs.u_star, cs.v_star, p);
  return out;
}

Profile shifted(const Profile& profile) {
  Profile out = profile;
  out.orientation =
      profile.orientation == Orientation::Plus ? Orientation::Minus : Orientation::Plus;
  if (profile.j == 0) return out;
  // u(x + 1/j), continued past x = 1 by the even reflection u(2 - x).
  const std::size_t n = profile.size();
  const std::size_t per = (n - 1) / profile.j;
  const double step = 1.0 / profile.j;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t src = k + per;
    bool wrapped = false;
    if (src > n - 1) {
      src = 2 * (n - 1) - src;
      wrapped = true;
    }
    out.u[k] = profile.u[src];
    out.w[k] = profile.w[src];
    out.x[k] = wrapped ? 2.0 - profile.x[src] - step : profile.x[src] - step;
  }
  out.x.front() = 0.0;
  out.x.back() = 1.0;
  return out;
}

ResidualReport residual_check(const Profile& profile, const ModelParams& p) {
  ResidualReport r;
  const std::size_t n = profile.size();
  for (std::size_t k = 0; k < n; ++k) {
    r.h_scale = std::max(r.h_scale, std::abs(h_value(profile.u[k], profile.tau, p)));
  }
  const auto& x = profile.x;
  const auto& w = profile.w;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h1 = x[k] - x[k - 1];
    const double h2 = x[k + 1] - x[k];
    const double wxx = 2.0 * ((w[k + 1] - w[k]) / h2 - (w[k] - w[k - 1]) / h1) / (h1 + h2);
    const double res = profile.d * wxx + h_value(profile.u[k], profile.tau, p);
    r.ode_residual_max = std::max(r.ode_residual_max, std::abs(res));
  }
  if (n >= kStencil) {
    const double left = one_sided_derivative(&x[0], &w[0]);
    double tr[kStencil];
    double wr[kStencil];
    for (int i = 0; i < kStencil; ++i) {
      tr[i] = x[n - 1 - i];
      wr[i] = w[n - 1 - i];
    }
    const double right = one_sided_derivative(tr, wr);
    r.bc_residual = std::max(std::abs(left), std::abs(right));
  }
  return r;
}

ConstraintIntegrals constraint_integrals(const OrbitFamily& fam, const OrbitEnds& e, int j,
                                         double d) {
  const ModelParams& p = fam.params();
  const double tau = fam.tau();
  const double scale = j * std::sqrt(0.5 * d);
  const Potential& pot = fam.potential();
  ConstraintIntegrals out;
  out.int_f = scale * fam.orbit_integral(
                          e, [&](double u) { return reaction_f(u, tau / u, p) * pot.weight(u); });
  out.int_g = scale * fam.orbit_integral(
                          e, [&](double u) { return reaction_g(u, tau / u, p) * pot.weight(u); });
  return out;
}

ConstraintIntegrals constraint_integrals(const Profile& profile, const ModelParams& p,
                                         const QuadratureOptions& quad) {
  if (profile.j == 0 || profile.ends.length() == 0.0) {
    // Constant profile: the integrand is the constant value itself.
    const double u = profile.u.front();
    return {reaction_f(u, profile.tau / u, p), reaction_g(u, profile.tau / u, p)};
  }
  const OrbitFamily fam(p, profile.tau, quad);
  return constraint_integrals(fam, profile.ends, profile.j, profile.d);
}

void write_profile_csv(std::ostream& os, const Profile& profile) {
  const auto old = os.precision(17);
  os << "x,u,w,v\n";
  for (std::size_t k = 0; k < profile.size(); ++k) {
    os << profile.x[k] << ',' << profile.u[k] << ',' << profile.w[k] << ',' << profile.v(k)
       << '\n';
  }
  os.precision(old);
}

}  // namespace sktlimit
