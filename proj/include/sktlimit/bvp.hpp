#pragma once

// Neumann profiles of d w'' + h(u, tau) = 0 on [0, 1] assembled from one
// monotone orbit piece, plus the checks run on them.

#include <iosfwd>
#include <string_view>
#include <vector>

#include "sktlimit/model.hpp"
#include "sktlimit/timemap.hpp"

namespace sktlimit {

/// Plus: u(0) = m, increasing on (0, 1/j). Minus: the Plus profile shifted
/// by 1/j, so u(0) = M.
enum class Orientation { Plus, Minus };

std::string_view to_string(Orientation o);
Orientation orientation_from_string(std::string_view s);

struct Profile {
  int j = 0;  // 0 for the constant solution
  Orientation orientation = Orientation::Plus;
  double tau = 0.0;
  double d = 0.0;
  double m = 0.0;
  double M = 0.0;
  OrbitEnds ends;
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> w;
  double int_f = 0.0;
  double int_g = 0.0;

  std::size_t size() const { return x.size(); }
  double v(std::size_t k) const { return tau / u[k]; }
};

inline constexpr int kDefaultProfileNodes = 257;

/// Profile through the orbit `e` of `fam`, which must satisfy X = 1/j to
/// 1e-8 relative. The monotone piece is sampled at the n_nodes points
/// u = m + (M - m) sin^2(phi / 2) with phi uniform on [0, pi].
/// Throws DomainError if X is off target and AssemblyError if the piece
/// does not close at x = 1/j.
Profile reconstruct_profile(const OrbitFamily& fam, const OrbitEnds& e, int j,
                            Orientation o, double d, int n_nodes = kDefaultProfileNodes);
Profile reconstruct_profile(int j, Orientation o, double m, double tau, double d,
                            const ModelParams& p, int n_nodes = kDefaultProfileNodes,
                            const QuadratureOptions& quad = {});

/// u = u* on a uniform grid.
Profile constant_profile(const ModelParams& p, int n_nodes = kDefaultProfileNodes);

/// The same profile with the other orientation.
Profile shifted(const Profile& profile);

struct ResidualReport {
  double ode_residual_max = 0.0;  // max |d w'' + h| over interior samples
  double bc_residual = 0.0;       // max |w'| at x = 0 and x = 1
  double h_scale = 0.0;           // max |h| over the samples
};

/// Second differences on the sample grid; w' at the ends from a one-sided
/// six-point stencil.
ResidualReport residual_check(const Profile& profile, const ModelParams& p);

struct ConstraintIntegrals {
  double int_f = 0.0;
  double int_g = 0.0;
};

/// int_0^1 f and int_0^1 g along the profile, computed in u over one orbit
/// piece and multiplied by j.
ConstraintIntegrals constraint_integrals(const Profile& profile, const ModelParams& p,
                                         const QuadratureOptions& quad = {});
ConstraintIntegrals constraint_integrals(const OrbitFamily& fam, const OrbitEnds& e, int j,
                                         double d);

/// CSV `x,u,w,v` with 17 significant digits.
void write_profile_csv(std::ostream& os, const Profile& profile);

}  // namespace sktlimit
