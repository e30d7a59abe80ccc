#pragma once

// Solutions of the limiting system: the constraint int f = 0 picks tau, the
// branches Gamma_j^{+-} are continued in d, and their d -> 0 ends are
// classified.

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sktlimit/bvp.hpp"
#include "sktlimit/model.hpp"
#include "sktlimit/timemap.hpp"

namespace sktlimit {

struct BranchPoint {
  double d = 0.0;
  double tau = 0.0;
  double m = 0.0;
  double M = 0.0;
  int j = 1;
  Orientation orientation = Orientation::Plus;
  double amplitude = 0.0;  // M - m
  double int_f = 0.0;
  double int_g = 0.0;
  CaseTag case_tag = CaseTag::CaseI;
  double offset = 0.0;  // orbit offset q, see OrbitFamily::ends_from_offset
  OrbitEnds ends;
  /// int f missed the tolerance although tau is pinned to adjacent doubles.
  bool tau_resolution_limited = false;
  std::shared_ptr<const Profile> profile;  // only when requested
};

/// Where the amplitude search should look: the root nearest to a previous
/// solution.
struct AmplitudeHint {
  CaseTag case_tag = CaseTag::CaseI;
  double offset = 0.0;
  double m = 0.0;
};

struct BranchOptions {
  QuadratureOptions quad;
  int scan_points = 512;          // amplitude scan when no hint applies
  double int_f_tolerance = 1e-8;  // absolute, on the selected point
  int tau_scan_points = 240;      // global tau scan
  bool keep_profiles = false;
  int profile_nodes = kDefaultProfileNodes;
};

/// int f along the amplitude root at tau, or nothing when X = 1/j has no
/// root there (tau outside the admissible set, or d above the threshold).
struct TauSample {
  double tau = 0.0;
  double int_f = 0.0;
  double int_g = 0.0;
  OrbitEnds ends;
  CaseTag case_tag = CaseTag::CaseI;
  double offset = 0.0;
};
std::optional<TauSample> sample_tau(double d, int j, const ModelParams& p, double tau,
                                    const AmplitudeHint* hint, const BranchOptions& opt = {});

/// Solves int f = 0 for tau inside [tau_lo, tau_hi]. Throws BracketError
/// without a sign change at the ends, NoRootError when the amplitude
/// equation fails inside, RootFindingFailure when int f stays above the
/// tolerance before tau reaches double resolution. Points limited by that
/// resolution are returned flagged if |int f| is below sqrt(tolerance).
BranchPoint select_tau(double d, int j, const ModelParams& p, double tau_lo, double tau_hi,
                       const AmplitudeHint* hint = nullptr, const BranchOptions& opt = {});

/// Sign changes of int f over a tau grid; returns the bracket nearest to
/// `center`, if any.
std::optional<std::pair<double, double>> scan_tau(double d, int j, const ModelParams& p,
                                                  double lo, double hi, int points,
                                                  double center, const AmplitudeHint* hint,
                                                  const BranchOptions& opt = {});

enum class EndpointKind { WeakPositive, StrongZero, Undetermined };
std::string_view to_string(EndpointKind k);

struct BranchEndpoint {
  double tau0 = 0.0;
  EndpointKind kind = EndpointKind::Undetermined;
};

struct Branch {
  int j = 1;
  Orientation orientation = Orientation::Plus;
  std::vector<BranchPoint> points;  // in the order of the d grid
  double onset_d = 0.0;             // NaN when it cannot be fitted
  BranchEndpoint endpoint;
  bool truncated = false;
  std::string diagnostic;
};

/// d^(j) (1 - eps) for eps from 1e-3 up to 0.5 on a geometric grid, then
/// geometric down to d_min_fraction d^(j).
std::vector<double> default_d_grid(const ModelParams& p, int j, double d_min_fraction = 1e-4,
                                   int onset_points = 12, int per_decade = 8);

/// Continues Gamma_j^{orientation} along a strictly decreasing d grid.
/// Stops with truncated = true after three consecutive failures.
Branch trace_branch(int j, Orientation o, const ModelParams& p, const std::vector<double>& d_grid,
                    const BranchOptions& opt = {});

/// The point of Gamma_j^{orientation} at one d in (0, d^(j)), reached by
/// continuation from the onset. Throws DomainError for d outside that range
/// and ContinuationStall if the continuation does not reach d.
BranchPoint solve_branch_point(int j, Orientation o, const ModelParams& p, double d,
                               const BranchOptions& opt = {});

/// amplitude^2 linear in d over the five smallest-amplitude points.
double fit_onset(const std::vector<BranchPoint>& points);

enum class SingularKind { LeftStep, Balanced, RightStep };
std::string_view to_string(SingularKind k);

struct SingularLimit {
  SingularKind kind = SingularKind::Balanced;
  double H1 = 0.0;  // H(z1)
  double H3 = 0.0;  // H(z3)
  std::optional<double> eta;   // in (z2, z3) with H(eta) = H(z1)
  std::optional<double> zeta;  // in (z1, z2) with H(zeta) = H(z3)
};

/// Throws StateError without three zeros at tau.
SingularLimit classify_singular_limit(double tau, const ModelParams& p);

/// The tau0 in (tau_tilde, tau_bar) with H(z1) = H(z3). BracketError when
/// the difference has no isolated sign change there.
double solve_balance(const ModelParams& p, int scan_points = 200);

/// ell f(z1, tau0/z1) + (1 - ell) f(z3, tau0/z3).
double interface_balance_check(double tau0, double ell, const ModelParams& p);
/// The ell in (0, 1) zeroing the balance. SignError when f(z1) f(z3) > 0.
double solve_ell(double tau0, const ModelParams& p);

/// CSV `j,orientation,d,tau,m,amplitude,int_f,int_g`.
void write_branch_csv(std::ostream& os, const Branch& b);
/// JSON manifest entry for one branch (endpoint, onset, counts).
nlohmann::json branch_manifest_entry(const Branch& b);

}  // namespace sktlimit
