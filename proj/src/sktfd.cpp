#include "sktlimit/sktfd.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sktlimit/branch.hpp"
#include "sktlimit/errors.hpp"
#include "sktlimit/timemap.hpp"

namespace sktlimit {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

struct Jac2 {
  double a, b, c, d;  // row major
  Jac2 inverse() const {
    const double det = a * d - b * c;
    return {d / det, -b / det, -c / det, a / det};
  }
  Jac2 operator*(const Jac2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
};

Jac2 reaction_jacobian(double u, double v, const ModelParams& p) {
  return {p.a1 - 2.0 * p.b1 * u - p.c1 * v, -p.c1 * u, -p.b2 * v,
          p.a2 - p.b2 * u - 2.0 * p.c2 * v};
}

// d(U, V) / d(u, v).
Jac2 transform_jacobian(double u, double v, const SktParams& sp) {
  return {sp.d1 + sp.alpha * v, sp.alpha * u, sp.beta * v, sp.d2 + sp.beta * u};
}

// Transformed unknowns are stored as offsets from (alpha c, beta c): the
// second differences then act on O(1) numbers and beta U - alpha V needs
// no cancellation.
struct Shifted {
  const SktParams& sp;
  double c;

  DensityPair to_uv(double Ut, double Vt) const {
    const double V = sp.beta * c + Vt;
    const double bq = sp.d1 * sp.d2 + sp.beta * Ut - sp.alpha * Vt;
    const double aq = sp.alpha * sp.d2;
    const double cq = sp.d1 * V;
    const double disc = std::sqrt(bq * bq + 4.0 * aq * cq);
    const double v = bq >= 0.0 ? 2.0 * cq / (bq + disc) : (disc - bq) / (2.0 * aq);
    const double u = (sp.alpha * c + Ut) / (sp.d1 + sp.alpha * v);
    return {u, v};
  }
  double Ut(double u, double v) const { return sp.d1 * u + sp.alpha * (u * v - c); }
  double Vt(double u, double v) const { return sp.d2 * v + sp.beta * (u * v - c); }
};

double residual_scale(const std::vector<double>& u, const std::vector<double>& v,
                      const ModelParams& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    s = std::max(s, u[k] * (p.a1 + p.b1 * u[k] + p.c1 * v[k]));
    s = std::max(s, v[k] * (p.a2 + p.b2 * u[k] + p.c2 * v[k]));
  }
  return s;
}

double second_difference(const std::vector<double>& y, std::size_t k, double inv_h2) {
  const std::size_t n = y.size() - 1;
  if (k == 0) return 2.0 * (y[1] - y[0]) * inv_h2;
  if (k == n) return 2.0 * (y[n - 1] - y[n]) * inv_h2;
  return (y[k - 1] - 2.0 * y[k] + y[k + 1]) * inv_h2;
}

std::vector<double> residual_from(const std::vector<double>& U, const std::vector<double>& V,
                                  const std::vector<double>& u, const std::vector<double>& v,
                                  const SktParams& sp) {
  const double inv_h2 = static_cast<double>(sp.N) * sp.N;
  std::vector<double> r(2 * u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    r[2 * k] = second_difference(U, k, inv_h2) + reaction_f(u[k], v[k], sp.model);
    r[2 * k + 1] = second_difference(V, k, inv_h2) + reaction_g(u[k], v[k], sp.model);
  }
  return r;
}

double max_abs(const std::vector<double>& r) {
  double m = 0.0;
  for (double x : r) m = std::max(m, std::abs(x));
  return m;
}

double sum_sq(const std::vector<double>& r) {
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

// Sparse Jacobian: Laplacian stencil times `lap_block` at each node plus a
// diagonal `local` block.
Eigen::SparseMatrix<double> assemble(const std::vector<Jac2>& lap_block,
                                     const std::vector<Jac2>& local, const SktParams& sp) {
  const int n = sp.N;
  const double inv_h2 = static_cast<double>(n) * n;
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(4 * 3 * (n + 1)));
  auto put = [&](int row, int col, const Jac2& J, double s) {
    trip.emplace_back(2 * row, 2 * col, s * J.a);
    trip.emplace_back(2 * row, 2 * col + 1, s * J.b);
    trip.emplace_back(2 * row + 1, 2 * col, s * J.c);
    trip.emplace_back(2 * row + 1, 2 * col + 1, s * J.d);
  };
  for (int k = 0; k <= n; ++k) {
    put(k, k, lap_block[k], -2.0 * inv_h2);
    put(k, k, local[k], 1.0);
    if (k == 0) {
      put(k, 1, lap_block[1], 2.0 * inv_h2);
    } else if (k == n) {
      put(k, n - 1, lap_block[n - 1], 2.0 * inv_h2);
    } else {
      put(k, k - 1, lap_block[k - 1], inv_h2);
      put(k, k + 1, lap_block[k + 1], inv_h2);
    }
  }
  Eigen::SparseMatrix<double> J(2 * (n + 1), 2 * (n + 1));
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

std::vector<double> uniform_grid(int N) {
  std::vector<double> x(N + 1);
  for (int k = 0; k <= N; ++k) x[k] = static_cast<double>(k) / N;
  x.back() = 1.0;
  return x;
}

}  // namespace

void SktParams::validate() const {
  model.validate();
  for (double x : {d1, d2, alpha, beta}) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("SktParams: d1, d2, alpha, beta must be positive");
    }
  }
  if (N < 4) throw DomainError("SktParams: N must be at least 4");
  if (!close_rel(d1 / d2, model.delta, 1e-12)) {
    throw DomainError("SktParams: d1/d2 does not match delta");
  }
  if (!close_rel(alpha / beta, model.gamma, 1e-12)) {
    throw DomainError("SktParams: alpha/beta does not match gamma");
  }
}

SktParams SktParams::from_limit(const ModelParams& p, double d, double alpha, int N) {
  SktParams sp;
  sp.model = p;
  sp.d2 = d;
  sp.d1 = p.delta * d;
  sp.alpha = alpha;
  sp.beta = alpha / p.gamma;
  sp.N = N;
  sp.validate();
  return sp;
}

std::string_view to_string(SktUnknowns k) {
  return k == SktUnknowns::Transformed ? "transformed" : "direct";
}

SktUnknowns skt_unknowns_from_string(std::string_view s) {
  if (s == "transformed") return SktUnknowns::Transformed;
  if (s == "direct") return SktUnknowns::Direct;
  throw DomainError("unknowns must be 'transformed' or 'direct', got '" + std::string(s) + "'");
}

DensityPair uv_from_transformed(double U, double V, const SktParams& sp) {
  if (!(U > 0.0) || !(V > 0.0)) throw DomainError("uv_from_transformed: U, V must be positive");
  return Shifted{sp, 0.0}.to_uv(U, V);
}

std::vector<double> skt_residual(const SktParams& sp, const std::vector<double>& u,
                                 const std::vector<double>& v) {
  const std::size_t n = static_cast<std::size_t>(sp.N) + 1;
  if (u.size() != n || v.size() != n) throw DomainError("skt_residual: need N + 1 values");
  std::vector<double> U(n);
  std::vector<double> V(n);
  for (std::size_t k = 0; k < n; ++k) {
    U[k] = (sp.d1 + sp.alpha * v[k]) * u[k];
    V[k] = (sp.d2 + sp.beta * u[k]) * v[k];
  }
  return residual_from(U, V, u, v, sp);
}

SktSolution solve_skt(const SktParams& sp, const SktSolution& guess, const NewtonOptions& opt) {
  sp.validate();
  const std::size_t n = static_cast<std::size_t>(sp.N) + 1;
  if (guess.u.size() != n || guess.v.size() != n) {
    throw DomainError("solve_skt: guess must have N + 1 nodes");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(guess.u[k] > 0.0) || !(guess.v[k] > 0.0)) {
      throw NegativeDensity("solve_skt: initial guess is not positive");
    }
  }
  const bool transformed = opt.unknowns == SktUnknowns::Transformed;
  double c = 0.0;
  for (std::size_t k = 0; k < n; ++k) c += guess.u[k] * guess.v[k];
  c /= static_cast<double>(n);
  const Shifted sh{sp, transformed ? c : 0.0};

  // State: (U~, V~) when transformed, (u, v) otherwise.
  std::vector<double> s1(n);
  std::vector<double> s2(n);
  std::vector<double> u = guess.u;
  std::vector<double> v = guess.v;
  std::vector<double> Ut(n);
  std::vector<double> Vt(n);
  auto refresh = [&]() {
    for (std::size_t k = 0; k < n; ++k) {
      if (transformed) {
        const DensityPair q = sh.to_uv(s1[k], s2[k]);
        u[k] = q.u;
        v[k] = q.v;
        Ut[k] = s1[k];
        Vt[k] = s2[k];
      } else {
        u[k] = s1[k];
        v[k] = s2[k];
        Ut[k] = sh.Ut(u[k], v[k]);
        Vt[k] = sh.Vt(u[k], v[k]);
      }
    }
  };
  for (std::size_t k = 0; k < n; ++k) {
    s1[k] = transformed ? sh.Ut(u[k], v[k]) : u[k];
    s2[k] = transformed ? sh.Vt(u[k], v[k]) : v[k];
  }
  refresh();
  std::vector<double> r = residual_from(Ut, Vt, u, v, sp);

  SktSolution out;
  out.x = uniform_grid(sp.N);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  std::vector<Jac2> lap(n);
  std::vector<Jac2> loc(n);
  for (int it = 0;; ++it) {
    const double scale = residual_scale(u, v, sp.model);
    const double norm = max_abs(r);
    if (norm <= opt.rel_tolerance * scale) {
      out.iterations = it;
      out.residual_norm = norm;
      out.residual_scale = scale;
      break;
    }
    if (it >= opt.max_iterations) {
      std::ostringstream os;
      os << "solve_skt: no convergence after " << it << " iterations, residual " << norm
         << " (scale " << scale << ")";
      throw NewtonDivergence(os.str());
    }
    for (std::size_t k = 0; k < n; ++k) {
      const Jac2 T = transform_jacobian(u[k], v[k], sp);
      const Jac2 R = reaction_jacobian(u[k], v[k], sp.model);
      if (transformed) {
        lap[k] = {1.0, 0.0, 0.0, 1.0};
        loc[k] = R * T.inverse();
      } else {
        lap[k] = T;
        loc[k] = R;
      }
    }
    lu.compute(assemble(lap, loc, sp));
    if (lu.info() != Eigen::Success) {
      throw NewtonDivergence("solve_skt: singular Jacobian at iteration " + std::to_string(it));
    }
    Eigen::VectorXd rhs(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) rhs[i] = -r[i];
    const Eigen::VectorXd step = lu.solve(rhs);

    // Largest step keeping U, V (or u, v) above (1 - clip) of their values.
    double lambda = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double base1 = transformed ? sp.alpha * c + s1[k] : s1[k];
      const double base2 = transformed ? sp.beta * c + s2[k] : s2[k];
      if (step[2 * k] < 0.0) lambda = std::min(lambda, opt.clip * base1 / -step[2 * k]);
      if (step[2 * k + 1] < 0.0) lambda = std::min(lambda, opt.clip * base2 / -step[2 * k + 1]);
    }
    const double phi0 = sum_sq(r);
    const std::vector<double> s1_old = s1;
    const std::vector<double> s2_old = s2;
    for (;;) {
      for (std::size_t k = 0; k < n; ++k) {
        s1[k] = s1_old[k] + lambda * step[2 * k];
        s2[k] = s2_old[k] + lambda * step[2 * k + 1];
      }
      refresh();
      r = residual_from(Ut, Vt, u, v, sp);
      if (sum_sq(r) <= (1.0 - 2.0 * opt.armijo * lambda) * phi0) break;
      lambda *= 0.5;
      if (lambda < opt.min_step) {
        std::ostringstream os;
        os << "solve_skt: line search failed at iteration " << it << ", residual " << norm
           << "; step lengths";
        for (double dmp : out.damping) os << ' ' << dmp;
        throw NewtonDivergence(os.str());
      }
    }
    out.damping.push_back(lambda);
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(u[k] > 0.0) || !(v[k] > 0.0)) throw NegativeDensity("solve_skt: nonpositive density");
  }
  out.u = std::move(u);
  out.v = std::move(v);
  return out;
}

SktSolution constant_guess(const SktParams& sp) {
  const ConstantState cs = constant_state(sp.model);
  SktSolution g;
  g.x = uniform_grid(sp.N);
  g.u.assign(g.x.size(), cs.u_star);
  g.v.assign(g.x.size(), cs.v_star);
  return g;
}

SktSolution mode_guess(const SktParams& sp, int j, double eps) {
  SktSolution g = constant_guess(sp);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double c = std::cos(j * kPi * g.x[k]);
    g.u[k] *= 1.0 - eps * c;
    g.v[k] *= 1.0 + eps * c;
  }
  return g;
}

double profile_u_at(const Profile& profile, double x) {
  const auto& xs = profile.x;
  if (x <= xs.front()) return profile.u.front();
  if (x >= xs.back()) return profile.u.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return profile.u[k - 1] + t * (profile.u[k] - profile.u[k - 1]);
}

SktSolution guess_from_profile(const SktParams& sp, const Profile& profile) {
  SktSolution g;
  g.x = uniform_grid(sp.N);
  for (double x : g.x) {
    const double u = profile_u_at(profile, x);
    g.u.push_back(u);
    g.v.push_back(profile.tau / u);
  }
  return g;
}

double discrete_mean_f(const SktSolution& sol, const SktParams& sp) {
  const std::size_t n = sol.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double wt = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
    s += wt * reaction_f(sol.u[k], sol.v[k], sp.model);
  }
  return s / static_cast<double>(n - 1);
}

LimitComparison compare_with_limit(const SktSolution& sol, const SktParams& sp,
                                   const Profile& limit) {
  const ModelParams& p = sp.model;
  LimitComparison c;
  c.tau = limit.tau;
  for (std::size_t k = 0; k < sol.size(); ++k) {
    const double ul = profile_u_at(limit, sol.x[k]);
    c.sup_uv_minus_tau = std::max(c.sup_uv_minus_tau, std::abs(sol.uv(k) - limit.tau));
    c.sup_u_distance = std::max(c.sup_u_distance, std::abs(sol.u[k] - ul));
    const double w = w_of_u(sol.u[k], limit.tau, p);
    c.sup_w_distance = std::max(c.sup_w_distance, std::abs(w - w_of_u(ul, limit.tau, p)));
  }
  return c;
}

LimitComparison compare_with_limit(const SktSolution& sol, const SktParams& sp,
                                   const BranchPoint& bp, int profile_nodes) {
  if (bp.profile) return compare_with_limit(sol, sp, *bp.profile);
  const OrbitFamily fam(sp.model, bp.tau);
  const Profile prof = reconstruct_profile(fam, bp.ends, bp.j, bp.orientation, bp.d, profile_nodes);
  return compare_with_limit(sol, sp, prof);
}

void write_skt_csv(std::ostream& os, const SktSolution& sol, const SktParams& sp) {
  const auto old = os.precision(17);
  os << "x,u,v,uv,w\n";
  for (std::size_t k = 0; k < sol.size(); ++k) {
    os << sol.x[k] << ',' << sol.u[k] << ',' << sol.v[k] << ',' << sol.uv(k) << ','
       << sp.model.delta * sol.u[k] - sp.model.gamma * sol.v[k] << '\n';
  }
  os.precision(old);
}

nlohmann::json skt_sidecar(const SktSolution& sol, const SktParams& sp) {
  const ModelParams& p = sp.model;
  nlohmann::json j;
  j["model"] = {{"a1", p.a1}, {"a2", p.a2}, {"b1", p.b1},       {"b2", p.b2},
                {"c1", p.c1}, {"c2", p.c2}, {"gamma", p.gamma}, {"delta", p.delta}};
  j["skt"] = {{"d1", sp.d1}, {"d2", sp.d2}, {"alpha", sp.alpha}, {"beta", sp.beta}, {"N", sp.N}};
  j["newton"] = {{"iterations", sol.iterations},
                 {"residual_norm", sol.residual_norm},
                 {"residual_scale", sol.residual_scale},
                 {"damping", sol.damping}};
  return j;
}

}  // namespace sktlimit
