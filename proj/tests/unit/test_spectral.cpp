#include <cmath>
#include <complex>
#include <random>

#include <boost/math/constants/constants.hpp>

#include "../support.hpp"
#include "doctest.h"
#include "sktlimit/errors.hpp"
#include "sktlimit/spectral.hpp"

using namespace sktlimit;
using testing::strong_set;
using testing::weak_set;

namespace {
constexpr double pi = boost::math::constants::pi<double>();
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST_CASE("Neumann eigenvalues") {
  CHECK(lambda_j(0) == 0.0);
  CHECK(rel(lambda_j(1), pi * pi) < 1e-15);
  CHECK(rel(lambda_j(3), 9.0 * pi * pi) < 1e-15);
}

TEST_CASE("bifurcation points") {
  const ModelParams p = strong_set();
  // Both closed forms by hand: numerator 1/9 - 1/9 - 2/9 ... gives 1/(3 pi^2).
  const BifurcationForms f = bifurcation_forms(p, 1);
  CHECK(rel(f.from_numerator, 1.0 / (3.0 * pi * pi)) < 1e-14);
  CHECK(rel(f.from_discriminant, 1.0 / (3.0 * pi * pi)) < 1e-14);
  CHECK(rel(bifurcation_point(p, 1), 0.033773727880779265) < 1e-14);

  for (const ModelParams& q : {strong_set(), weak_set()}) {
    const double base = bifurcation_point(q, 1) * lambda_j(1);
    for (int j = 1; j < 10; ++j) {
      CHECK(bifurcation_point(q, j + 1) < bifurcation_point(q, j));
      CHECK(rel(bifurcation_point(q, j) * lambda_j(j), base) < 1e-13);
    }
  }
  CHECK_THROWS_AS(bifurcation_point(ModelParams{1, 1, 1, 1, 1, 1, 1, 1}, 1), RegimeError);
}

TEST_CASE("eigenvalue identities") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    const ModelParams p = testing::random_params(rng);
    const ConstantState s = constant_state(p);
    const double d = 0.7 * bifurcation_point(p, 1);
    const SpectralReport r = spectral_report(p, d);
    const std::complex<double> prod = r.mu0[0] * r.mu0[1];
    // Expanding the 2x2 determinant leaves one power of (delta u* + gamma v*)
    // in the denominator.
    const double expect = p.gamma * s.u_star * s.v_star * (p.b1 * p.c2 - p.b2 * p.c1) /
                          (p.c1 * (p.delta * s.u_star + p.gamma * s.v_star) * d);
    const bool weak = classify_regime(p).tag == RegimeTag::WeakCompetition;
    CHECK((prod.real() > 0.0) == weak);
    CHECK(std::abs(prod.imag()) <= 1e-10 * std::abs(expect));
    CHECK(rel(prod.real(), expect) < 1e-10);
    for (int j = 1; j <= 4; ++j) {
      const double dj = bifurcation_point(p, j);
      const double scale = std::abs(mu_j(p, 2.0 * dj, j));
      CHECK(std::abs(mu_j(p, dj, j)) < 1e-10 * scale);
      double prev = -1e300;
      for (int s2 = 0; s2 < 20; ++s2) {
        const double mu = mu_j(p, dj * std::pow(10.0, -1.0 + 0.1 * s2), j);
        CHECK(mu > prev);
        prev = mu;
      }
    }
  }
}

TEST_CASE("index above the first bifurcation point") {
  CHECK(spectral_report(weak_set(), 2.0 * bifurcation_point(weak_set(), 1)).index == 1);
  CHECK(spectral_report(strong_set(), 2.0 * bifurcation_point(strong_set(), 1)).index == -1);
  // Strong set, (d^(2), d^(1)): one more negative eigenvalue flips it.
  const ModelParams p = strong_set();
  const double mid = std::sqrt(bifurcation_point(p, 1) * bifurcation_point(p, 2));
  const SpectralReport r = spectral_report(p, mid);
  CHECK(r.index == 1);
  CHECK(r.mu_seq.at(0) < 0.0);
  CHECK(r.mu_seq.at(1) > 0.0);
}
