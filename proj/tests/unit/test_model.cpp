#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/rational.hpp>

#include <cmath>
#include <random>

#include "../support.hpp"
#include "doctest.h"
#include "sktlimit/errors.hpp"
#include "sktlimit/model.hpp"

using namespace sktlimit;
using testing::strong_set;
using testing::weak_set;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

ModelParams coeffs(double a1, double a2, double b1, double b2, double c1, double c2) {
  return ModelParams{a1, a2, b1, b2, c1, c2, 1.0, 1.0};
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(coeffs(15.0 / 2, 16.0 / 7, 4, 1, 6, 2)).tag == RegimeTag::WeakCompetition);
  CHECK(classify_regime(strong_set()).tag == RegimeTag::StrongCompetition);
  const Regime deg = classify_regime(coeffs(1, 1, 1, 1, 1, 1));
  CHECK(deg.tag == RegimeTag::Degenerate);
  CHECK_FALSE(deg.nondegenerate());
}

TEST_CASE("reaction terms vanish at the equilibria") {
  const ModelParams w = weak_set();
  CHECK(reaction_f(9.0 / 14, 23.0 / 28, w) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(reaction_g(9.0 / 14, 23.0 / 28, w) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(reaction_f(w.a1 / w.b1, 0.0, w) == 0.0);
  // (1/3)(1 - 2/3 - 1/3) on the strong set
  CHECK(std::abs(reaction_g(1.0 / 3, 1.0 / 3, strong_set())) < 1e-16);
}

TEST_CASE("w, tau transform") {
  const ModelParams p = strong_set();
  SUBCASE("hand-solved quadratic") {
    const DensityPair uv = uv_from_w(3.0, 1.0, p);
    CHECK(rel(uv.u, (std::sqrt(13.0) + 3.0) / 2.0) < 1e-15);
    CHECK(rel(uv.v, (std::sqrt(13.0) - 3.0) / 2.0) < 1e-14);
  }
  SUBCASE("w = 0 is the symmetric point") {
    ModelParams q = p;
    q.gamma = 1.7;
    q.delta = 0.6;
    const double tau = 0.3;
    const DensityPair uv = uv_from_w(0.0, tau, q);
    CHECK(rel(uv.u, std::sqrt(q.gamma * tau / q.delta)) < 1e-15);
    CHECK(rel(q.delta * uv.u, q.gamma * uv.v) < 1e-15);
  }
  SUBCASE("constant state of the strong set") {
    const LimitPair wt = w_from_uv(1.0 / 3, 1.0 / 3, p);
    CHECK(std::abs(wt.w) < 1e-16);
    CHECK(rel(wt.tau, 1.0 / 9) < 1e-15);
  }
  SUBCASE("round trip on random inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> W(-10.0, 10.0);
    std::uniform_real_distribution<double> T(1e-6, 1.0);
    const double tb = tau_bar(p);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double w = W(rng);
      const double tau = T(rng) * tb;
      const DensityPair uv = uv_from_w(w, tau, p);
      const LimitPair back = w_from_uv(uv.u, uv.v, p);
      worst = std::max({worst, std::abs(back.w - w) / std::max(1.0, std::abs(w)),
                        rel(back.tau, tau), rel(uv.u * uv.v, tau)});
    }
    CHECK(worst < 1e-12);
  }
  CHECK_THROWS_AS(uv_from_w(1.0, 0.0, p), DomainError);
}

TEST_CASE("h and its derivative") {
  const ModelParams p = strong_set();
  CHECK(std::abs(h_value(1.0 / 3, 1.0 / 9, p)) < 1e-16);
  CHECK(std::abs(h_value(9.0 / 14, 207.0 / 392, weak_set())) < 1e-14);
  CHECK(h_value(1e-6, 1e-2, p) > 1e6);
  CHECK_THROWS_AS(h_value(0.0, 0.1, p), DomainError);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.05, 3.0);
  double worst_identity = 0.0;
  double worst_fd = 0.0;
  for (int k = 0; k < 2000; ++k) {
    const ModelParams q = testing::random_params(rng);
    const double u = U(rng);
    const double tau = 0.5 * U(rng);
    const double v = tau / u;
    const double f = reaction_f(u, v, q);
    const double g = reaction_g(u, v, q);
    const double scale = std::abs(f) + q.gamma * std::abs(g);
    worst_identity = std::max(worst_identity, std::abs(h_value(u, tau, q) - (f - q.gamma * g)) / scale);
    const double e = 1e-5 * u;
    const double fd = (h_value(u + e, tau, q) - h_value(u - e, tau, q)) / (2.0 * e);
    const double an = h_du(u, tau, q);
    worst_fd = std::max(worst_fd, std::abs(fd - an) / std::max(1.0, std::abs(an)));
  }
  CHECK(worst_identity < 1e-12);
  CHECK(worst_fd < 1e-6);
}

TEST_CASE("zeros of h") {
  SUBCASE("constant level of the strong set") {
    const ZeroTriple z = zeros_of_h(1.0 / 9, strong_set());
    REQUIRE(z.complete);
    CHECK(std::abs(z.z2() - 1.0 / 3) < 1e-14);
  }
  SUBCASE("weak set above the admissible component") {
    CHECK_FALSE(zeros_of_h(1.0, weak_set()).complete);
  }
  SUBCASE("small tau asymptotics") {
    std::mt19937_64 rng(3);
    std::vector<ModelParams> sets{strong_set(), weak_set()};
    for (int k = 0; k < 20; ++k) sets.push_back(testing::random_params(rng));
    for (const ModelParams& p : sets) {
      double prev = 1e300;
      for (double tau : {1e-4, 1e-6, 1e-8}) {
        const ZeroTriple z = zeros_of_h(tau, p);
        REQUIRE(z.complete);
        const double dev = std::max({rel(z.z1() / tau, p.c2 / p.a2),
                                     rel(z.z2() / std::sqrt(tau), std::sqrt(p.gamma * p.a2 / p.a1)),
                                     rel(z.z3(), p.a1 / p.b1)});
        // Corrections are O(sqrt(tau)).
        CHECK(dev < 50.0 * std::sqrt(tau));
        CHECK(dev < prev);
        prev = dev;
      }
      CHECK(prev < 1e-3);
    }
  }
  CHECK_THROWS_AS(zeros_of_h(-1.0, strong_set()), DomainError);
}

TEST_CASE("a-priori bound tau_bar") {
  CHECK(tau_bar(strong_set()) == doctest::Approx(1.0 / 8).epsilon(1e-15));
  // (15/2)^2/96 = 75/128 and (16/7)^2/8 = 32/49.
  CHECK(tau_bar(weak_set()) == doctest::Approx(75.0 / 128).epsilon(1e-15));
  CHECK(tau_bar(coeffs(2, 2, 1, 1, 1, 1)) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("discriminant D") {
  using R = boost::rational<long long>;
  auto exact = [](R a1, R a2, R b1, R b2, R c1, R c2) {
    const R A = a1 / a2, B = b1 / b2, C = c1 / c2;
    return b2 * (A - B) * (B + C - 2 * A) + c2 * (C - A) * (A * (B + C) - 2 * B * C);
  };
  const R dw = exact(R(15, 2), R(16, 7), 4, 1, 6, 2);
  CHECK(dw == R(17, 64));
  CHECK(discriminant_D(weak_set()) == doctest::Approx(17.0 / 64).epsilon(1e-15));
  CHECK(exact(1, 1, 1, 2, 2, 1) == R(1));
  CHECK(discriminant_D(strong_set()) == doctest::Approx(1.0).epsilon(1e-15));
  // A = B kills the first term.
  const ModelParams ab = coeffs(1, 1, 1, 1, 2, 1);
  CHECK(discriminant_D(ab) == doctest::Approx(1.0 * (2.0 - 1.0) * (1.0 * 3.0 - 4.0)));
}

TEST_CASE("constant state") {
  const ConstantState s = constant_state(strong_set());
  CHECK(s.u_star == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(s.v_star == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(std::abs(s.tau_star - 1.0 / 9) < 1e-15);
  CHECK(std::abs(constant_state(weak_set()).tau_star - 207.0 / 392) < 1e-15);
  const ConstantState sym = constant_state(coeffs(1, 1, 2, 1, 1, 2));
  CHECK(sym.u_star == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(sym.v_star == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK_THROWS_AS(constant_state(coeffs(1, 1, 1, 1, 1, 1)), RegimeError);
}

TEST_CASE("constant state and the middle zero") {
  std::mt19937_64 rng(17);
  for (int k = 0; k < 200; ++k) {
    const ModelParams p = testing::random_params(rng);
    const ConstantState s = constant_state(p);
    const ZeroTriple z = zeros_of_h(s.tau_star, p);
    REQUIRE(z.complete);
    CHECK(std::abs(s.u_star - z.z2()) < 1e-9);
    CHECK(h_du(z.z2(), s.tau_star, p) > 0.0);
  }
  // The converse: D < 0 gives h_u(u*, tau*) < 0.
  int negatives = 0;
  std::uniform_real_distribution<double> lg(std::log(0.3), std::log(5.0));
  for (int k = 0; negatives < 50 && k < 100000; ++k) {
    ModelParams p{std::exp(lg(rng)), std::exp(lg(rng)), std::exp(lg(rng)),
                  std::exp(lg(rng)), std::exp(lg(rng)), std::exp(lg(rng)), 1.0, 1.0};
    if (!classify_regime(p).nondegenerate() || discriminant_D(p) > -1e-6) continue;
    const ConstantState s = constant_state(p);
    CHECK(h_du(s.u_star, s.tau_star, p) < 0.0);
    ++negatives;
  }
  CHECK(negatives == 50);
}

TEST_CASE("zeros of f and g along uv = tau") {
  const ModelParams p = strong_set();
  const FgLandmarks l = fg_zero_landmarks(0.01, p);
  CHECK(l.z1g < l.z1f);
  CHECK(l.z1f < l.z2g);
  CHECK(l.z2g < l.z2f);
  const double tau = 1e-9;
  const FgLandmarks s = fg_zero_landmarks(tau, p);
  CHECK(rel(s.z1f / tau, p.c1 / p.a1) < 1e-6);
  CHECK(rel(s.z2f, p.a1 / p.b1) < 1e-6);
  // Double root at the bound, here a1^2 / (4 b1 c1) = 1/8.
  const FgLandmarks b = fg_zero_landmarks(1.0 / 8, p);
  CHECK(b.z1f == doctest::Approx(p.a1 / (2.0 * p.b1)).epsilon(1e-7));
  CHECK(b.z2f == doctest::Approx(p.a1 / (2.0 * p.b1)).epsilon(1e-7));
  CHECK_THROWS_AS(fg_zero_landmarks(0.2, p), DomainError);
}

TEST_CASE("sign of f at the zeros of h") {
  const double tau = 1e-3;
  for (const ModelParams& p : {strong_set(), weak_set()}) {
    const bool weak = classify_regime(p).tag == RegimeTag::WeakCompetition;
    const ZeroTriple z = zeros_of_h(tau, p);
    REQUIRE(z.complete);
    const double f1 = reaction_f(z.z1(), tau / z.z1(), p);
    const double f2 = reaction_f(z.z2(), tau / z.z2(), p);
    const double f3 = reaction_f(z.z3(), tau / z.z3(), p);
    if (weak) {
      CHECK(f1 > 0.0);
      CHECK(f2 > 0.0);
      CHECK(f3 > 0.0);
    } else {
      CHECK(f1 < 0.0);
      CHECK(f2 > 0.0);
      CHECK(f3 < 0.0);
    }
  }
}

TEST_CASE("closed-form potential against quadrature") {
  auto integrand = [](const ModelParams& p, double tau) {
    return [&p, tau](double s) { return h_value(s, tau, p) * (p.delta + p.gamma * tau / (s * s)); };
  };
  using boost::math::quadrature::gauss_kronrod;
  {
    const ModelParams p = strong_set();
    const double tau = 1.0 / 9;
    const double z2 = zeros_of_h(tau, p).z2();
    const double ref = gauss_kronrod<double, 61>::integrate(integrand(p, tau), z2, 0.5, 15, 1e-14);
    CHECK(rel(potential_H(0.5, tau, p), ref) < 1e-10);
    CHECK(std::abs(potential_H(z2, tau, p)) < 1e-16);
  }
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int checked = 0;
  while (checked < 100) {
    const ModelParams p = testing::random_params(rng);
    const double tau = constant_state(p).tau_star * (0.5 + U(rng));
    const ZeroTriple z = zeros_of_h(tau, p);
    if (!z.complete) continue;
    const double u = z.z1() * 0.5 + U(rng) * (1.5 * z.z3() - 0.5 * z.z1());
    const double ref =
        gauss_kronrod<double, 61>::integrate(integrand(p, tau), z.z2(), u, 20, 1e-15);
    const double H = potential_H(u, tau, p);
    CHECK(std::abs(H - ref) <= 1e-10 * std::max(std::abs(ref), 1e-3 * std::abs(potential_H(z.z1(), tau, p))));
    ++checked;
  }
}

TEST_CASE("potential has maxima at z1, z3 and a minimum at z2") {
  for (const ModelParams& p : {strong_set(), weak_set()}) {
    // The weak set has three zeros only on (0, tau_tilde) and near tau*.
    const double tau = p.a1 == 1.0 ? 0.8 * constant_state(p).tau_star : 0.52;
    const ZeroTriple z = zeros_of_h(tau, p);
    REQUIRE(z.complete);
    for (int k = 0; k < 3; ++k) {
      const double e = 1e-4 * z.zeros[k];
      const double left = potential_H(z.zeros[k] - e, tau, p);
      const double mid = potential_H(z.zeros[k], tau, p);
      const double right = potential_H(z.zeros[k] + e, tau, p);
      if (k == 1) {
        CHECK(mid < left);
        CHECK(mid < right);
      } else {
        CHECK(mid > left);
        CHECK(mid > right);
      }
    }
  }
}
