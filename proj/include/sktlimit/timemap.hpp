#pragma once

// Orbits of d w'' + h(u, tau) = 0 with w'(0) = 0 and their half-periods.
//
// An orbit starting at its minimum u = m in (m_lower, z2) turns around at
// the conjugate amplitude M in (z2, z3) with H(M) = H(m). Its half-period is
//   X(m) = sqrt(d/2) int_m^M (delta + gamma tau / u^2) / sqrt(H(m) - H(u)) du
// and a j-mode Neumann solution exists exactly when X(m) = 1/j.
//
// For small d the orbits hug a saddle (z1, or z3 in CaseII) and the turning
// points sit exponentially close to it. Orbits are therefore described by
// the offsets of their turning points from the zeros of h, and potential
// differences near a turning point are integrated from the factored form
//   h(u) = -b1 (u - z1)(u - z2)(u - z3)(u - r4) / u^2,   r4 < 0,
// which keeps full relative accuracy however close the orbit gets.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "sktlimit/model.hpp"
#include "sktlimit/quadrature.hpp"

namespace sktlimit {

enum class CaseTag { CaseI, CaseII };

std::string_view to_string(CaseTag tag);

struct TimeMapCase {
  CaseTag tag = CaseTag::CaseI;
  /// z1 in CaseI; in CaseII the point of (z1, z2) with H(m_lower) = H(z3).
  double m_lower = 0.0;
};

/// Turning points of one orbit together with their offsets from the zeros.
/// The offsets are the authoritative description; m and M are rounded.
struct OrbitEnds {
  double m = 0.0;
  double M = 0.0;
  double t_m = 0.0;  // m - z1
  double a_m = 0.0;  // z2 - m
  double b_M = 0.0;  // M - z2
  double s_M = 0.0;  // z3 - M

  double length() const { return a_m + b_M; }
};

struct OrbitIntegrals {
  double I = 0.0;  // int du / sqrt(H(m) - H(u))
  double J = 0.0;  // int du / (u^2 sqrt(H(m) - H(u)))
  double M = 0.0;
};

/// Everything that depends on tau alone, computed once: zeros, potential,
/// case and lower end of the admissible amplitude interval.
class OrbitFamily {
 public:
  /// Throws StateError if h(., tau) lacks three zeros.
  OrbitFamily(const ModelParams& p, double tau, QuadratureOptions quad = {});

  const ModelParams& params() const { return p_; }
  double tau() const { return tau_; }
  const ZeroTriple& zeros() const { return zeros_; }
  const Potential& potential() const { return pot_; }
  const TimeMapCase& time_map_case() const { return case_; }
  const QuadratureOptions& quadrature() const { return quad_; }
  double m_lower() const { return case_.m_lower; }
  double z2() const { return zeros_.z2(); }
  /// Guard at the z2 end: closer than this the analytic limit is used.
  double guard() const { return 1e-9 * (z2() - m_lower()); }

  /// H(z3) - H(z1), evaluated in extended precision. Values below 1e-24 of
  /// the barrier heights are reported as exactly zero (balanced levels).
  double level_gap() const { return gap31_; }
  /// H(z1) and H(z3), i.e. the barrier heights over H(z2) = 0.
  double barrier_left() const { return H1_; }
  double barrier_right() const { return H3_; }

  /// Orbit through a given minimum m in (m_lower, z2).
  OrbitEnds ends_from_m(double m) const;
  /// Orbits are parameterized by q in (0, offset_span()): the offset t_m of
  /// m above z1 in CaseI and the offset s_M of M below z3 in CaseII. Small q
  /// means close to the heteroclinic, q near offset_span() close to z2.
  OrbitEnds ends_from_offset(double q) const;
  double offset_of(const OrbitEnds& e) const;
  double offset_span() const;

  /// M(m) in (z2, z3].
  double conjugate(double m) const;

  OrbitIntegrals integrals(double m) const;

  /// int_m^M fn(u) / sqrt(H(m) - H(u)) du along the orbit.
  double orbit_integral(const OrbitEnds& e, const std::function<double(double)>& fn) const;

  /// The same integral restricted to phi in [phi_a, phi_b], where
  /// u = m + (M - m) sin^2(phi / 2).
  double orbit_integral_between(const OrbitEnds& e, double phi_a, double phi_b,
                                const std::function<double(double)>& fn) const;

  double time_map(double m, double d) const;
  double time_map(const OrbitEnds& e, double d) const;
  /// Limit of time_map as m tends to z2.
  double time_map_limit(double d) const;
  /// h_u(z2) / ((delta + gamma tau / z2^2) (j pi)^2): below it X = 1/j has
  /// a root. Throws StateError when h_u(z2) <= 0.
  double mode_threshold(int j) const;

  /// All roots of X = 1/j as offsets q, sorted by m. Empty when none is
  /// found above the mode threshold; NoRootError when none is found below.
  std::vector<double> solve_offsets(int j, double d, int scan_points = 512) const;
  /// Same roots as amplitudes m.
  std::vector<double> solve_amplitude(int j, double d, int scan_points = 512) const;
  /// The root offset nearest to q_guess (compared on a log scale), found by
  /// widening a bracket around it.
  std::optional<double> solve_offset_near(int j, double d, double q_guess) const;

  /// Pointwise pieces, exposed for the profile reconstruction.
  /// -h(u) w(u) at a point given through its offsets from z1, z2, z3.
  struct Point {
    double u;
    double d1;  // u - z1
    double d2;  // u - z2
    double d3;  // u - z3
  };
  Point point_from_zero(int k, double offset) const;
  Point left_point(const OrbitEnds& e, double offset) const;   // m + offset
  Point right_point(const OrbitEnds& e, double offset) const;  // M - offset
  double neg_hw(const Point& x) const;
  /// int_x^{x + len} (-h w) ds, accurate relative to its own size.
  double area(const Point& x, double len) const;
  /// H(m) - H(u) at u = m + offset (left end) or u = M - offset (right end).
  double gap_left(const OrbitEnds& e, double offset) const;
  double gap_right(const OrbitEnds& e, double offset) const;
  /// u and L s c / sqrt(H(m) - H(u)) at the node with half angles s, c.
  struct PhiSample {
    double u;
    double factor;
  };
  PhiSample phi_sample(const OrbitEnds& e, double s, double c) const;

 private:
  void require_amplitude(double m) const;
  bool local_gap(const OrbitEnds& e, double offset) const;
  OrbitEnds complete_ends(OrbitEnds e, bool left_known) const;
  template <class Fn>
  double integrate_orbit(const OrbitEnds& e, Fn&& fn) const;

  ModelParams p_;
  double tau_;
  QuadratureOptions quad_;
  ZeroTriple zeros_;
  Potential pot_;
  TimeMapCase case_;
  double hu_z2_;
  double r4_;
  double T1_;  // z2 - z1
  double T3_;  // z3 - z2
  double H1_ = 0.0;
  double H3_ = 0.0;
  double gap31_ = 0.0;
  double t_lower_ = 0.0;  // m_lower - z1
};

double conjugate_M(double m, double tau, const ModelParams& p);
double time_map_X(double m, double tau, double d, const ModelParams& p,
                  const QuadratureOptions& quad = {});
std::vector<double> solve_amplitude(int j, double tau, double d, const ModelParams& p,
                                    const QuadratureOptions& quad = {});

}  // namespace sktlimit
