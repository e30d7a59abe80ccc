#pragma once

// Steady states of the full SKT system on (0, 1) with Neumann conditions,
//   ((d1 + alpha v) u)'' + f(u, v) = 0,   ((d2 + beta u) v)'' + g(u, v) = 0,
// by Newton's method on a uniform grid. Used to check that solutions at large
// alpha, beta approach the limiting profiles (u, tau / u).

#include <iosfwd>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sktlimit/bvp.hpp"
#include "sktlimit/model.hpp"

namespace sktlimit {

struct BranchPoint;

struct SktParams {
  ModelParams model;  // gamma and delta must match alpha / beta and d1 / d2
  double d1 = 1.0;
  double d2 = 1.0;
  double alpha = 100.0;
  double beta = 100.0;
  int N = 400;  // grid intervals

  /// Throws DomainError on nonpositive entries, N < 4, or ratios that do
  /// not match the model within 1e-12 relative.
  void validate() const;

  /// d2 = d and d1 = delta d, beta = alpha / gamma, so that the limiting
  /// problem has diffusion d.
  static SktParams from_limit(const ModelParams& p, double d, double alpha, int N = 400);
};

struct SktSolution {
  std::vector<double> x;  // N + 1 uniform nodes
  std::vector<double> u;
  std::vector<double> v;
  double residual_norm = 0.0;  // max norm of the discrete equations
  double residual_scale = 0.0;
  int iterations = 0;
  std::vector<double> damping;  // accepted step length per iteration

  std::size_t size() const { return x.size(); }
  double uv(std::size_t k) const { return u[k] * v[k]; }
};

enum class SktUnknowns {
  /// U = (d1 + alpha v) u, V = (d2 + beta u) v: the second differences are
  /// linear and (u, v) is recovered pointwise.
  Transformed,
  /// Newton directly in (u, v), for cross-checking.
  Direct,
};

std::string_view to_string(SktUnknowns k);
SktUnknowns skt_unknowns_from_string(std::string_view s);

struct NewtonOptions {
  SktUnknowns unknowns = SktUnknowns::Transformed;
  double rel_tolerance = 1e-10;  // on the residual, relative to its scale
  int max_iterations = 100;
  double armijo = 1e-4;
  double min_step = 1.0 / 1024.0 / 1024.0;
  double clip = 0.9;  // fraction of the distance to the positive-cone boundary
};

/// (u, v) from (U, V) > 0. The positive root of a quadratic in v.
DensityPair uv_from_transformed(double U, double V, const SktParams& sp);

/// Discrete residuals at the nodes, (U, V)-equations interleaved.
std::vector<double> skt_residual(const SktParams& sp, const std::vector<double>& u,
                                 const std::vector<double>& v);

/// Throws NegativeDensity if the guess is not positive or an iterate cannot
/// be kept positive, NewtonDivergence if the iteration fails to converge.
SktSolution solve_skt(const SktParams& sp, const SktSolution& guess,
                      const NewtonOptions& opt = {});

/// u = u*, v = v* on the grid.
SktSolution constant_guess(const SktParams& sp);
/// (u*, v*) times 1 +- eps cos(j pi x).
SktSolution mode_guess(const SktParams& sp, int j, double eps);
/// (u, tau / u) resampled from a limiting profile.
SktSolution guess_from_profile(const SktParams& sp, const Profile& profile);

/// Trapezoidal mean of f over the grid. The Neumann stencil sums to zero
/// under these weights, so this vanishes up to the solver tolerance.
double discrete_mean_f(const SktSolution& sol, const SktParams& sp);

struct LimitComparison {
  double tau = 0.0;
  double sup_uv_minus_tau = 0.0;
  double sup_u_distance = 0.0;
  double sup_w_distance = 0.0;  // delta u - gamma tau / u against the limit w
};

/// Limit profile values at x by linear interpolation between samples.
double profile_u_at(const Profile& profile, double x);

LimitComparison compare_with_limit(const SktSolution& sol, const SktParams& sp,
                                   const Profile& limit);
/// Uses the stored profile if present, otherwise reconstructs one with
/// `profile_nodes` samples per monotone piece.
LimitComparison compare_with_limit(const SktSolution& sol, const SktParams& sp,
                                   const BranchPoint& bp, int profile_nodes = 2049);

/// CSV `x,u,v,uv,w` with w = delta u - gamma v.
void write_skt_csv(std::ostream& os, const SktSolution& sol, const SktParams& sp);
/// Parameter and convergence echo for the sidecar file.
nlohmann::json skt_sidecar(const SktSolution& sol, const SktParams& sp);

}  // namespace sktlimit
