#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace sktlimit {

/// Nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule, cached per n. Thread safe.
const GaussRule& gauss_legendre(int n);

/// How integrals with inverse-square-root endpoint singularities are
/// evaluated. All schemes first substitute theta = (1 - cos phi) / 2,
/// phi in [0, pi], which removes the singularities.
enum class QuadratureScheme {
  /// Single Gauss-Legendre rule in phi.
  GaussLegendre,
  /// Composite Gauss-Legendre in phi on panels graded geometrically toward
  /// both ends, which also resolves near-heteroclinic orbits.
  GradedGaussLegendre,
  /// Adaptive tanh-sinh in phi (cross-check only, noticeably slower).
  TanhSinh,
};

std::string_view to_string(QuadratureScheme scheme);
QuadratureScheme quadrature_scheme_from_string(std::string_view name);

struct QuadratureOptions {
  QuadratureScheme scheme = QuadratureScheme::GradedGaussLegendre;
  /// Total node count for the Gauss-Legendre schemes.
  int order = 256;
};

/// A node in the phi variable with its weight on [0, pi].
struct PhiNode {
  double phi;
  double weight;
  double sin_half;  // sin(phi / 2)
  double cos_half;  // cos(phi / 2)
};

/// Fixed rule on [0, pi] for the Gauss-Legendre schemes. Cached.
std::span<const PhiNode> phi_rule(const QuadratureOptions& options);

/// Width of the outermost panel of the graded rule, [0, w] and [pi - w, pi].
double graded_end_width();

/// Nodes on [0, hi] from panels [0, lo], [lo, 4 lo], ... up to hi, with
/// `per_panel` Gauss-Legendre points each. Used to deepen the graded rule at
/// an end where the orbit lingers near a saddle.
std::vector<PhiNode> graded_end_nodes(double lo, double hi, int per_panel);

/// int_0^pi integrand(phi) dphi with the scheme from `options`.
double integrate_phi(const std::function<double(double)>& integrand,
                     const QuadratureOptions& options);

}  // namespace sktlimit
