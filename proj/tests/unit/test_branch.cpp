#include <cmath>
#include <sstream>

#include "../support.hpp"
#include "doctest.h"
#include "sktlimit/branch.hpp"
#include "sktlimit/errors.hpp"
#include "sktlimit/spectral.hpp"

using namespace sktlimit;
using testing::strong_set;
using testing::weak_set;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("selected points near onset") {
  const ModelParams p = strong_set();
  const double d1 = bifurcation_point(p, 1);
  const BranchPoint bp = solve_branch_point(1, Orientation::Plus, p, 0.99 * d1);
  CHECK(std::abs(bp.int_f) < 1e-8);
  CHECK(std::abs(bp.int_g) < 1e-8);
  CHECK_FALSE(bp.tau_resolution_limited);
  CHECK(rel(bp.tau, 1.0 / 9) < 0.05);
  // Pitchfork: amplitude grows like sqrt(d^(1) - d).
  const BranchPoint closer = solve_branch_point(1, Orientation::Plus, p, 0.999 * d1);
  CHECK(bp.amplitude / closer.amplitude == doctest::Approx(std::sqrt(10.0)).epsilon(0.05));
  CHECK(rel(closer.tau, 1.0 / 9) < 1e-2);
  CHECK(bp.tau <= tau_bar(p));

  // int f changes sign across the selected tau.
  const double e = 1e-6 * bp.tau;
  const auto lo = sample_tau(bp.d, 1, p, bp.tau - e, nullptr);
  const auto hi = sample_tau(bp.d, 1, p, bp.tau + e, nullptr);
  REQUIRE(lo.has_value());
  REQUIRE(hi.has_value());
  CHECK(lo->int_f * hi->int_f < 0.0);
  CHECK_THROWS_AS(solve_branch_point(1, Orientation::Plus, p, 1.1 * d1), DomainError);
}

TEST_CASE("orientation duality") {
  const ModelParams p = strong_set();
  const auto grid = default_d_grid(p, 2, 0.3);
  const Branch plus = trace_branch(2, Orientation::Plus, p, grid);
  const Branch minus = trace_branch(2, Orientation::Minus, p, grid);
  REQUIRE(plus.points.size() == grid.size());
  REQUIRE(minus.points.size() == plus.points.size());
  for (std::size_t k = 0; k < plus.points.size(); ++k) {
    const BranchPoint& a = plus.points[k];
    const BranchPoint& b = minus.points[k];
    CHECK(b.orientation == Orientation::Minus);
    CHECK(a.d == b.d);
    CHECK(std::abs(a.tau - b.tau) <= 1e-9 * a.tau);
    CHECK(std::abs(a.m - b.m) <= 1e-9 * a.m);
    CHECK(std::abs(a.amplitude - b.amplitude) <= 1e-9 * a.amplitude);
  }
}

TEST_CASE("modes share tau at equal fractions of their bifurcation points") {
  const ModelParams p = weak_set();
  const BranchPoint one = solve_branch_point(1, Orientation::Plus, p, 0.2 * bifurcation_point(p, 1));
  const BranchPoint two = solve_branch_point(2, Orientation::Plus, p, 0.2 * bifurcation_point(p, 2));
  CHECK(std::abs(one.tau - two.tau) < 1e-9);
  CHECK(std::abs(one.m - two.m) < 1e-9);
}

TEST_CASE("onset fit") {
  std::vector<BranchPoint> pts;
  for (int k = 1; k <= 8; ++k) {
    BranchPoint bp;
    bp.d = 0.2 - 0.001 * k;
    bp.amplitude = std::sqrt(3.0 * (0.2 - bp.d));
    pts.push_back(bp);
  }
  CHECK(fit_onset(pts) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("singular limit classification") {
  SUBCASE("strong set at small tau") {
    // The strong set is symmetric under u <-> v, which swaps z1 and z3
    // through u -> tau / u, so the barriers are level for every tau.
    const ModelParams p = strong_set();
    const double tau = 0.01;
    const SingularLimit s = classify_singular_limit(tau, p);
    const ZeroTriple z = zeros_of_h(tau, p);
    CHECK(s.H1 == doctest::Approx(potential_H(z.z1(), tau, p)).epsilon(1e-12));
    CHECK(s.H3 == doctest::Approx(potential_H(z.z3(), tau, p)).epsilon(1e-12));
    CHECK(s.kind == SingularKind::Balanced);
    REQUIRE(s.eta.has_value());
    REQUIRE(s.zeta.has_value());
    CHECK(*s.eta == doctest::Approx(z.z3()).epsilon(1e-6));
    CHECK(*s.zeta == doctest::Approx(z.z1()).epsilon(1e-6));
    // Both f values are negative, so no interface balance exists.
    CHECK_THROWS_AS(solve_ell(tau, p), SignError);
  }
  SUBCASE("weak set on either side of the balance level") {
    const ModelParams p = weak_set();
    for (double tau : {0.53, 0.56}) {
      const SingularLimit s = classify_singular_limit(tau, p);
      const ZeroTriple z = zeros_of_h(tau, p);
      if (s.H1 < s.H3) {
        CHECK(s.kind == SingularKind::LeftStep);
        REQUIRE(s.eta.has_value());
        CHECK(*s.eta > z.z2());
        CHECK(*s.eta < z.z3());
        CHECK(potential_H(*s.eta, tau, p) == doctest::Approx(s.H1).epsilon(1e-10));
      } else {
        CHECK(s.kind == SingularKind::RightStep);
        REQUIRE(s.zeta.has_value());
        CHECK(*s.zeta > z.z1());
        CHECK(*s.zeta < z.z2());
        CHECK(potential_H(*s.zeta, tau, p) == doctest::Approx(s.H3).epsilon(1e-10));
      }
    }
    CHECK(classify_singular_limit(0.53, p).kind != classify_singular_limit(0.56, p).kind);
  }
  SUBCASE("weak set at the balance level") {
    const ModelParams p = weak_set();
    const double tau0 = solve_balance(p);
    CHECK(tau0 > tau_tilde(p));
    CHECK(tau0 < tau_bar(p));
    CHECK(tau0 == doctest::Approx(0.5481961766).epsilon(1e-9));
    const SingularLimit s = classify_singular_limit(tau0, p);
    CHECK(s.kind == SingularKind::Balanced);
    CHECK(s.eta.has_value());
    CHECK(s.zeta.has_value());
    const double ell = solve_ell(tau0, p);
    CHECK(ell > 0.0);
    CHECK(ell < 1.0);
    CHECK(std::abs(interface_balance_check(tau0, ell, p)) < 1e-12);
    const ZeroTriple z = zeros_of_h(tau0, p);
    const double f1 = reaction_f(z.z1(), tau0 / z.z1(), p);
    const double f3 = reaction_f(z.z3(), tau0 / z.z3(), p);
    CHECK(ell == doctest::Approx(f3 / (f3 - f1)).epsilon(1e-14));
    CHECK(interface_balance_check(tau0, 0.5, p) == doctest::Approx(0.5 * (f1 + f3)).epsilon(1e-14));
  }
}

TEST_CASE("weak branch approaches a two-level step") {
  // Resampled on a uniform x grid, the share of [0, 1] where u is more than
  // 1e-2 away from both z1 and z3 is the width of the transition layer,
  // which scales like sqrt(d). For this set the constant is about 1.9, so the
  // share drops below 5% only near d = 7e-4 d^(1).
  const ModelParams p = weak_set();
  const double d1 = bifurcation_point(p, 1);
  const Branch b = trace_branch(1, Orientation::Plus, p, default_d_grid(p, 1, 2e-3));
  REQUIRE_FALSE(b.truncated);
  std::vector<double> ratio;
  double prev = 1.0;
  for (const BranchPoint& bp : b.points) {
    if (bp.d > 1e-2 * d1) continue;
    const OrbitFamily fam(p, bp.tau);
    const Profile pr = reconstruct_profile(fam, bp.ends, 1, Orientation::Plus, bp.d, 2049);
    const ZeroTriple& z = fam.zeros();
    const int n = 20001;
    int away = 0;
    std::size_t k = 1;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / (n - 1);
      while (k + 1 < pr.size() && pr.x[k] < x) ++k;
      const double t = (x - pr.x[k - 1]) / (pr.x[k] - pr.x[k - 1]);
      const double u = (1.0 - t) * pr.u[k - 1] + t * pr.u[k];
      if (std::abs(u - z.z1()) >= 1e-2 && std::abs(u - z.z3()) >= 1e-2) ++away;
    }
    const double share = static_cast<double>(away) / n;
    CHECK(share < prev);
    prev = share;
    ratio.push_back(share / std::sqrt(bp.d / d1));
  }
  REQUIRE(ratio.size() >= 6);
  for (double r : ratio) CHECK(r == doctest::Approx(ratio.back()).epsilon(0.01));
  CHECK(prev < 0.09);
  const double d95 = std::pow(0.05 / ratio.back(), 2);
  CHECK(d95 == doctest::Approx(6.9e-4).epsilon(0.03));
}

TEST_CASE("branch csv") {
  Branch b;
  b.j = 2;
  BranchPoint bp;
  bp.j = 2;
  bp.d = 0.01;
  bp.tau = 0.1;
  b.points.push_back(bp);
  std::ostringstream os;
  write_branch_csv(os, b);
  CHECK(os.str().rfind("j,orientation,d,tau,m,amplitude,int_f,int_g\n", 0) == 0);
  const auto entry = branch_manifest_entry(b);
  CHECK(entry.contains("endpoint"));
}
