#pragma once

// Helpers shared by the unit tests and the acceptance run: parameter sets,
// a random generator for admissible parameters and independent oracles.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <random>

#include "sktlimit/config.hpp"
#include "sktlimit/model.hpp"

namespace sktlimit::testing {

inline ModelParams strong_set() { return preset_model("fig2"); }
inline ModelParams weak_set() { return preset_model("fig3"); }

/// Weak or strong parameters with D > 0, coefficients log-uniform in
/// [0.3, 5] and gamma, delta in [0.5, 2].
inline ModelParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lg(std::log(0.3), std::log(5.0));
  std::uniform_real_distribution<double> lr(std::log(0.5), std::log(2.0));
  for (;;) {
    ModelParams p{std::exp(lg(rng)), std::exp(lg(rng)), std::exp(lg(rng)), std::exp(lg(rng)),
                  std::exp(lg(rng)), std::exp(lg(rng)), std::exp(lr(rng)), std::exp(lr(rng))};
    if (!classify_regime(p).nondegenerate()) continue;
    if (std::abs(p.b1 * p.c2 - p.b2 * p.c1) < 1e-3) continue;
    if (discriminant_D(p) > 1e-6) return p;
  }
}

/// Half-period of d w'' + h(u(w), tau) = 0 from w(0) = w(m), w'(0) = 0, by
/// adaptive Dormand-Prince integration up to the next zero of w'.
inline double ivp_half_period(double m, double tau, double d, const ModelParams& p) {
  using State = std::array<double, 2>;  // w, w'
  auto rhs = [&](const State& s, State& ds, double) {
    const double u = uv_from_w(s[0], tau, p).u;
    ds[0] = s[1];
    ds[1] = -h_value(u, tau, p) / d;
  };
  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  State s{w_of_u(m, tau, p), 0.0};
  const double dt0 = 1e-4 * std::sqrt(d);
  stepper.initialize(s, 0.0, dt0);
  for (int it = 0; it < 2000000; ++it) {
    const auto [t0, t1] = stepper.do_step(rhs);
    const State cur = stepper.current_state();
    if (cur[1] < 0.0 && t1 > 0.0) {
      // w' went from positive to negative within [t0, t1]; bisect on the
      // dense output.
      double lo = t0, hi = t1;
      State mid;
      for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
        const double c = 0.5 * (lo + hi);
        stepper.calc_state(c, mid);
        (mid[1] > 0.0 ? lo : hi) = c;
      }
      return 0.5 * (lo + hi);
    }
  }
  return std::nan("");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace sktlimit::testing
