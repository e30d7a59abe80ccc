#include <algorithm>
#include <cmath>

#include "../support.hpp"
#include "doctest.h"
#include "sktlimit/bvp.hpp"
#include "sktlimit/errors.hpp"
#include "sktlimit/spectral.hpp"
#include "sktlimit/timemap.hpp"

using namespace sktlimit;
using testing::strong_set;
using testing::weak_set;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Case {
  ModelParams p;
  double tau;
  double d;
  double m;
};

// Strong set, mode j at half its bifurcation point.
Case strong_case(int j) {
  Case c{strong_set(), 0.085, 0.5 * bifurcation_point(strong_set(), j), 0.0};
  c.m = solve_amplitude(j, c.tau, c.d, c.p).front();
  return c;
}

double interp(const Profile& pr, double x) {
  const auto it = std::lower_bound(pr.x.begin(), pr.x.end(), x);
  if (it == pr.x.begin()) return pr.u.front();
  if (it == pr.x.end()) return pr.u.back();
  const std::size_t k = static_cast<std::size_t>(it - pr.x.begin());
  const double t = (x - pr.x[k - 1]) / (pr.x[k] - pr.x[k - 1]);
  return (1.0 - t) * pr.u[k - 1] + t * pr.u[k];
}

}  // namespace

TEST_CASE("mode 1 profile shape") {
  const Case c = strong_case(1);
  const Profile pr = reconstruct_profile(1, Orientation::Plus, c.m, c.tau, c.d, c.p);
  REQUIRE(pr.size() >= 64);
  CHECK(pr.x.front() == 0.0);
  CHECK(pr.x.back() == 1.0);
  CHECK(pr.u.front() == doctest::Approx(c.m).epsilon(1e-14));
  CHECK(pr.u.back() == doctest::Approx(conjugate_M(c.m, c.tau, c.p)).epsilon(1e-12));
  for (std::size_t k = 1; k < pr.size(); ++k) {
    CHECK(pr.x[k] > pr.x[k - 1]);
    CHECK(pr.u[k] > pr.u[k - 1]);
  }
  for (std::size_t k = 0; k < pr.size(); ++k) {
    CHECK(pr.u[k] > 0.0);
    CHECK(rel(pr.w[k], c.p.delta * pr.u[k] - c.p.gamma * c.tau / pr.u[k]) < 1e-12);
  }
}

TEST_CASE("sign pattern and period for j = 3") {
  const Case c = strong_case(3);
  for (Orientation o : {Orientation::Plus, Orientation::Minus}) {
    const Profile pr = reconstruct_profile(3, o, c.m, c.tau, c.d, c.p);
    const double s0 = o == Orientation::Plus ? 1.0 : -1.0;
    for (std::size_t k = 1; k < pr.size(); ++k) {
      const double xm = 0.5 * (pr.x[k] + pr.x[k - 1]);
      const int piece = std::min(2, static_cast<int>(xm * 3.0));
      const double sign = s0 * (piece % 2 == 0 ? 1.0 : -1.0);
      CHECK(sign * (pr.u[k] - pr.u[k - 1]) > 0.0);
    }
    // Critical points at multiples of 1/3.
    for (int i = 1; i < 3; ++i) {
      const auto it = std::find_if(pr.x.begin(), pr.x.end(),
                                   [&](double x) { return std::abs(x - i / 3.0) < 1e-8; });
      CHECK(it != pr.x.end());
    }
  }
}

TEST_CASE("orientations differ by a shift of 1/j") {
  const Case c = strong_case(2);
  const Profile plus = reconstruct_profile(2, Orientation::Plus, c.m, c.tau, c.d, c.p);
  const Profile minus = reconstruct_profile(2, Orientation::Minus, c.m, c.tau, c.d, c.p);
  CHECK(minus.u.front() == doctest::Approx(interp(plus, 0.5)).epsilon(1e-12));
  const Profile sh = shifted(plus);
  REQUIRE(sh.size() == minus.size());
  for (std::size_t k = 0; k < sh.size(); ++k) {
    CHECK(std::abs(sh.x[k] - minus.x[k]) < 1e-14);
    CHECK(std::abs(sh.u[k] - minus.u[k]) < 1e-14);
  }
}

TEST_CASE("mode 2 at d is mode 1 at 4d on each half") {
  // X scales as sqrt(d), so halving the period length is the same as
  // quadrupling d.
  const ModelParams p = strong_set();
  const double tau = 0.085;
  const double d = 0.25 * bifurcation_point(p, 2);
  const double m = solve_amplitude(2, tau, d, p).front();
  const auto m1 = solve_amplitude(1, tau, 4.0 * d, p);
  REQUIRE_FALSE(m1.empty());
  CHECK(rel(m1.front(), m) < 1e-9);
  const Profile two = reconstruct_profile(2, Orientation::Plus, m, tau, d, p);
  const Profile one = reconstruct_profile(1, Orientation::Plus, m, tau, 4.0 * d, p);
  const std::size_t n = one.size();
  REQUIRE(two.size() == 2 * n - 1);
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    worst = std::max(worst, std::abs(2.0 * two.x[k] - one.x[k]));
    worst = std::max(worst, std::abs(two.u[k] - one.u[k]));
    // Second half: reflection about x = 1/2.
    worst = std::max(worst, std::abs(2.0 * (1.0 - two.x[2 * n - 2 - k]) - one.x[k]));
    worst = std::max(worst, std::abs(two.u[2 * n - 2 - k] - one.u[k]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("residual check") {
  const ModelParams p = strong_set();
  SUBCASE("constant solution") {
    const ResidualReport r = residual_check(constant_profile(p), p);
    CHECK(r.ode_residual_max < 1e-15);
    CHECK(r.bc_residual < 1e-15);
  }
  SUBCASE("second-order decay") {
    const Case c = strong_case(1);
    std::vector<double> res;
    double bc = 0.0;
    for (int n : {129, 257, 513, 1025}) {
      const Profile pr = reconstruct_profile(1, Orientation::Plus, c.m, c.tau, c.d, c.p, n);
      const ResidualReport r = residual_check(pr, p);
      res.push_back(r.ode_residual_max / r.h_scale);
      bc = r.bc_residual;
    }
    CHECK(bc < 1e-8);
    for (std::size_t k = 1; k < res.size(); ++k) {
      CHECK(std::log2(res[k - 1] / res[k]) > 1.9);
    }
    CHECK(res.back() < 1e-5);
  }
  SUBCASE("a perturbed sample is detected") {
    const Case c = strong_case(1);
    Profile pr = reconstruct_profile(1, Orientation::Plus, c.m, c.tau, c.d, c.p);
    const double base = residual_check(pr, p).ode_residual_max;
    const std::size_t k = pr.size() / 2;
    pr.u[k] *= 1.0 + 1e-3;
    pr.w[k] = p.delta * pr.u[k] - p.gamma * pr.tau / pr.u[k];
    CHECK(residual_check(pr, p).ode_residual_max > 10.0 * base);
  }
}

TEST_CASE("constraint integrals") {
  const ModelParams p = weak_set();
  const ConstraintIntegrals ci = constraint_integrals(constant_profile(p), p);
  CHECK(std::abs(ci.int_f) < 1e-15);
  CHECK(std::abs(ci.int_g) < 1e-15);

  // The trapezoid rule in x on a fine profile as the oracle.
  const Case c = strong_case(1);
  const Profile pr = reconstruct_profile(1, Orientation::Plus, c.m, c.tau, c.d, c.p, 4097);
  const ConstraintIntegrals in_u = constraint_integrals(pr, c.p);
  double sf = 0.0;
  double sg = 0.0;
  for (std::size_t k = 1; k < pr.size(); ++k) {
    const double dx = pr.x[k] - pr.x[k - 1];
    sf += 0.5 * dx * (reaction_f(pr.u[k], pr.v(k), c.p) + reaction_f(pr.u[k - 1], pr.v(k - 1), c.p));
    sg += 0.5 * dx * (reaction_g(pr.u[k], pr.v(k), c.p) + reaction_g(pr.u[k - 1], pr.v(k - 1), c.p));
  }
  const double scale = std::abs(reaction_f(pr.u.back(), pr.v(pr.size() - 1), c.p)) +
                       std::abs(reaction_f(pr.u.front(), pr.v(0), c.p));
  CHECK(std::abs(in_u.int_f - sf) < 1e-5 * scale);
  CHECK(std::abs(in_u.int_g - sg) < 1e-5 * scale);
  // int h = -d int w'' = 0 under Neumann conditions, and h = f - gamma g.
  CHECK(std::abs(in_u.int_f - c.p.gamma * in_u.int_g) < 1e-10 * scale);
}
