#include <algorithm>
#include <cmath>
#include <sstream>

#include "../support.hpp"
#include "doctest.h"
#include "sktlimit/branch.hpp"
#include "sktlimit/errors.hpp"
#include "sktlimit/sktfd.hpp"
#include "sktlimit/spectral.hpp"

using namespace sktlimit;
using testing::weak_set;

namespace {

double sup_diff_on_coarse(const SktSolution& coarse, const SktSolution& fine) {
  // fine has twice the intervals: coarse node k is fine node 2k.
  double s = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    s = std::max(s, std::abs(coarse.u[k] - fine.u[2 * k]));
    s = std::max(s, std::abs(coarse.v[k] - fine.v[2 * k]));
  }
  return s;
}

// Mid-branch limiting profile on the weak set, shared by several cases.
const Profile& limit_profile() {
  static const Profile pr = [] {
    const ModelParams p = weak_set();
    const double d = 0.3 * bifurcation_point(p, 1);
    const BranchPoint bp = solve_branch_point(1, Orientation::Plus, p, d);
    return reconstruct_profile(OrbitFamily(p, bp.tau), bp.ends, 1, Orientation::Plus, d, 2049);
  }();
  return pr;
}

}  // namespace

TEST_CASE("parameters") {
  const SktParams sp = SktParams::from_limit(weak_set(), 0.01, 100.0);
  CHECK(sp.d2 == 0.01);
  CHECK(sp.d1 == 0.01);
  CHECK(sp.beta == 100.0);
  SktParams bad = sp;
  bad.d1 = 0.02;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  CHECK(skt_unknowns_from_string("direct") == SktUnknowns::Direct);
  CHECK_THROWS(skt_unknowns_from_string("other"));
}

TEST_CASE("constant solution") {
  const ModelParams p = weak_set();
  const SktParams sp = SktParams::from_limit(p, 2.0 * bifurcation_point(p, 1), 100.0, 100);
  const SktSolution sol = solve_skt(sp, constant_guess(sp));
  const ConstantState s = constant_state(p);
  for (std::size_t k = 0; k < sol.size(); ++k) {
    CHECK(sol.u[k] == doctest::Approx(s.u_star).epsilon(1e-12));
    CHECK(sol.v[k] == doctest::Approx(s.v_star).epsilon(1e-12));
  }
  const LimitComparison c = compare_with_limit(sol, sp, constant_profile(p));
  CHECK(c.sup_uv_minus_tau < 1e-12);
  CHECK(c.sup_u_distance < 1e-12);
  CHECK(c.sup_w_distance < 1e-12);
}

TEST_CASE("nonconstant solution from a mode-1 perturbation") {
  // alpha = beta = 100, d1 = d2 = d below the first bifurcation point.
  const ModelParams p = weak_set();
  const SktParams sp = SktParams::from_limit(p, 0.3 * bifurcation_point(p, 1), 100.0, 200);
  const SktSolution sol = solve_skt(sp, mode_guess(sp, 1, 0.6));
  const auto [lo, hi] = std::minmax_element(sol.u.begin(), sol.u.end());
  CHECK(*hi - *lo > 0.1 * constant_state(p).u_star);
  CHECK(sol.residual_norm <= 1e-10 * sol.residual_scale);
  CHECK(std::abs(discrete_mean_f(sol, sp)) < 1e-9 * sol.residual_scale);
}

TEST_CASE("second-order grid convergence") {
  const ModelParams p = weak_set();
  const double d = 0.3 * bifurcation_point(p, 1);
  std::vector<SktSolution> sols;
  for (int N : {200, 400, 800}) {
    const SktParams sp = SktParams::from_limit(p, d, 100.0, N);
    sols.push_back(solve_skt(sp, guess_from_profile(sp, limit_profile())));
  }
  const double e1 = sup_diff_on_coarse(sols[0], sols[1]);
  const double e2 = sup_diff_on_coarse(sols[1], sols[2]);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("direct and transformed unknowns agree") {
  const ModelParams p = weak_set();
  const SktParams sp = SktParams::from_limit(p, 0.3 * bifurcation_point(p, 1), 100.0, 200);
  const SktSolution guess = guess_from_profile(sp, limit_profile());
  NewtonOptions direct;
  direct.unknowns = SktUnknowns::Direct;
  direct.rel_tolerance = 1e-9;
  const SktSolution a = solve_skt(sp, guess);
  const SktSolution b = solve_skt(sp, guess, direct);
  double diff = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    diff = std::max({diff, std::abs(a.u[k] - b.u[k]), std::abs(a.v[k] - b.v[k])});
  }
  CHECK(diff < 1e-8);
}

TEST_CASE("alpha sweep and a-priori bound") {
  const ModelParams p = weak_set();
  const double d = 0.3 * bifurcation_point(p, 1);
  double prev = 1e300;
  double umax = 0.0;
  double vmax = 0.0;
  for (double alpha : {100.0, 400.0, 1600.0}) {
    const SktParams sp = SktParams::from_limit(p, d, alpha, 200);
    const SktSolution sol = solve_skt(sp, guess_from_profile(sp, limit_profile()));
    const LimitComparison c = compare_with_limit(sol, sp, limit_profile());
    CHECK(c.sup_uv_minus_tau < prev);
    prev = c.sup_uv_minus_tau;
    umax = std::max(umax, *std::max_element(sol.u.begin(), sol.u.end()));
    vmax = std::max(vmax, *std::max_element(sol.v.begin(), sol.v.end()));
    CHECK(std::abs(discrete_mean_f(sol, sp)) < 1e-8);
  }
  CHECK(prev < 5e-2);
  CHECK(umax < p.a1 / p.b1);
  CHECK(vmax < p.a2 / p.c2 * 2.0);
}

TEST_CASE("non-positive guess is rejected") {
  const SktParams sp = SktParams::from_limit(weak_set(), 0.01, 100.0, 50);
  SktSolution g = constant_guess(sp);
  g.u[10] = -1.0;
  CHECK_THROWS_AS(solve_skt(sp, g), NegativeDensity);
}

TEST_CASE("csv and sidecar") {
  const SktParams sp = SktParams::from_limit(weak_set(), 0.05, 100.0, 20);
  const SktSolution sol = solve_skt(sp, constant_guess(sp));
  std::ostringstream os;
  write_skt_csv(os, sol, sp);
  CHECK(os.str().rfind("x,u,v,uv,w\n", 0) == 0);
  const auto j = skt_sidecar(sol, sp);
  CHECK(j.dump().find("alpha") != std::string::npos);
}
