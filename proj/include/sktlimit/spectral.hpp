#pragma once

// Linearization of the limiting system at the constant solution: the
// pitchfork values d^(j), the eigenvalues mu_0^{+-}(d), mu_j(d) and the index
// parity they determine.

#include <array>
#include <complex>
#include <vector>

#include "sktlimit/model.hpp"

namespace sktlimit {

/// Neumann eigenvalue (j pi)^2 of -d^2/dx^2 on (0, 1).
double lambda_j(int j);

/// (gamma b2 + c1) tau* - b1 u*^2 - gamma c2 v*^2, the numerator of d^(j).
double bifurcation_numerator(const ModelParams& p);

/// The two closed forms of d^(j): numerator / ((delta u* + gamma v*) lambda_j)
/// and the one through the discriminant D.
struct BifurcationForms {
  double from_numerator = 0.0;
  double from_discriminant = 0.0;
};
/// Throws RegimeError without a positive constant state and
/// DiscriminantError when D <= 0.
BifurcationForms bifurcation_forms(const ModelParams& p, int j);

/// d^(j). Both closed forms are evaluated and must agree to 1e-10 relative.
/// Throws RegimeError without a positive constant state and
/// DiscriminantError when D <= 0.
double bifurcation_point(const ModelParams& p, int j);

/// The 2x2 matrix acting on (mean of phi, xi), row major.
std::array<double, 4> constant_mode_matrix(const ModelParams& p, double d);

/// mu_j(d) for j >= 1.
double mu_j(const ModelParams& p, double d, int j);

struct SpectralReport {
  double d = 0.0;
  /// Ordered by real part, then imaginary part.
  std::array<std::complex<double>, 2> mu0{};
  std::vector<double> mu_seq;  // mu_1 .. mu_{J_max}
  int sigma = 0;
  int index = 1;
};

inline constexpr double kImagTolerance = 1e-12;

SpectralReport spectral_report(const ModelParams& p, double d, int j_max = 16);

/// The index the pitchfork structure predicts for d in (d^(j+1), d^(j)),
/// with j = 0 meaning d > d^(1).
int expected_index(const ModelParams& p, double d);

}  // namespace sktlimit
