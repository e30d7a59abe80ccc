#include "sktlimit/branch.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "sktlimit/errors.hpp"
#include "sktlimit/spectral.hpp"

namespace sktlimit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

AmplitudeHint hint_from(const TauSample& s) { return {s.case_tag, s.offset, s.ends.m}; }

BranchPoint point_from(const TauSample& s, double d, int j) {
  BranchPoint bp;
  bp.d = d;
  bp.tau = s.tau;
  bp.m = s.ends.m;
  bp.M = s.ends.M;
  bp.j = j;
  bp.amplitude = s.ends.length();
  bp.int_f = s.int_f;
  bp.int_g = s.int_g;
  bp.case_tag = s.case_tag;
  bp.offset = s.offset;
  bp.ends = s.ends;
  return bp;
}

}  // namespace

std::optional<TauSample> sample_tau(double d, int j, const ModelParams& p, double tau,
                                    const AmplitudeHint* hint, const BranchOptions& opt) {
  if (!(tau > 0.0) || tau > tau_bar(p)) return std::nullopt;
  if (!zeros_of_h(tau, p).complete) return std::nullopt;
  try {
    const OrbitFamily fam(p, tau, opt.quad);
    const CaseTag tag = fam.time_map_case().tag;
    std::optional<double> q;
    if (hint != nullptr && hint->case_tag == tag) q = fam.solve_offset_near(j, d, hint->offset);
    if (!q) {
      const std::vector<double> roots = fam.solve_offsets(j, d, opt.scan_points);
      if (roots.empty()) return std::nullopt;
      // Without a hint take the root nearest z2, where branches start.
      q = roots.back();
      if (hint != nullptr) {
        double best = std::numeric_limits<double>::infinity();
        for (double r : roots) {
          const double dist = std::abs(fam.ends_from_offset(r).m - hint->m);
          if (dist < best) {
            best = dist;
            q = r;
          }
        }
      }
    }
    TauSample s;
    s.tau = tau;
    s.case_tag = tag;
    s.offset = *q;
    s.ends = fam.ends_from_offset(*q);
    const ConstraintIntegrals ci = constraint_integrals(fam, s.ends, j, d);
    s.int_f = ci.int_f;
    s.int_g = ci.int_g;
    return s;
  } catch (const StateError&) {
    return std::nullopt;
  } catch (const NoRootError&) {
    return std::nullopt;
  }
}

BranchPoint select_tau(double d, int j, const ModelParams& p, double tau_lo, double tau_hi,
                       const AmplitudeHint* hint, const BranchOptions& opt) {
  if (!(d > 0.0)) throw DomainError("select_tau: d must be positive");
  if (!(tau_lo < tau_hi)) throw DomainError("select_tau: need tau_lo < tau_hi");
  const auto a = sample_tau(d, j, p, tau_lo, hint, opt);
  const auto b = sample_tau(d, j, p, tau_hi, hint, opt);
  if (!a || !b) {
    std::ostringstream os;
    os << "select_tau: no amplitude root at the bracket end " << (!a ? tau_lo : tau_hi)
       << " (d=" << d << ", j=" << j << ")";
    throw BracketError(os.str());
  }
  if ((a->int_f < 0.0) == (b->int_f < 0.0) && a->int_f != 0.0 && b->int_f != 0.0) {
    std::ostringstream os;
    os << "select_tau: int f has the same sign at tau=" << tau_lo << " and " << tau_hi;
    throw BracketError(os.str());
  }
  AmplitudeHint h = hint != nullptr ? *hint : hint_from(*b);
  std::map<double, TauSample> seen{{a->tau, *a}, {b->tau, *b}};
  auto F = [&](double tau) {
    const auto s = sample_tau(d, j, p, tau, &h, opt);
    if (!s) {
      std::ostringstream os;
      os << "select_tau: amplitude equation has no root at tau=" << tau << " (d=" << d << ")";
      throw NoRootError(os.str());
    }
    h = hint_from(*s);
    seen.emplace(tau, *s);
    return s->int_f;
  };
  TauSample best = std::abs(a->int_f) <= std::abs(b->int_f) ? *a : *b;
  bool resolution_limited = false;
  if (best.int_f != 0.0) {
    std::uintmax_t iters = 80;
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto tol = [](double x, double y) { return std::abs(x - y) <= 4.0 * eps * std::abs(x); };
    const auto r =
        boost::math::tools::toms748_solve(F, tau_lo, tau_hi, a->int_f, b->int_f, tol, iters);
    for (const auto& [tau, s] : seen) {
      if (std::abs(s.int_f) < std::abs(best.int_f)) best = s;
    }
    // Deep in the singular limit int f turns so steep in tau that adjacent
    // doubles straddle the root with |int f| above tolerance.
    resolution_limited = std::abs(r.second - r.first) <= 8.0 * eps * std::abs(r.first);
  }
  BranchPoint bp = point_from(best, d, j);
  if (std::abs(best.int_f) < opt.int_f_tolerance) return bp;
  if (resolution_limited && std::abs(best.int_f) < std::sqrt(opt.int_f_tolerance)) {
    bp.tau_resolution_limited = true;
    return bp;
  }
  {
    std::ostringstream os;
    os << "select_tau: |int f| = " << std::abs(best.int_f) << " at tau=" << best.tau
       << " above tolerance " << opt.int_f_tolerance;
    throw RootFindingFailure(os.str());
  }
}

std::optional<std::pair<double, double>> scan_tau(double d, int j, const ModelParams& p,
                                                  double lo, double hi, int points,
                                                  double center, const AmplitudeHint* hint,
                                                  const BranchOptions& opt) {
  if (points < 2) throw DomainError("scan_tau: need at least 2 points");
  lo = std::max(lo, 1e-12 * tau_bar(p));
  hi = std::min(hi, tau_bar(p));
  if (!(lo < hi)) return std::nullopt;
  std::optional<std::pair<double, double>> best;
  double best_dist = std::numeric_limits<double>::infinity();
  std::optional<TauSample> prev;
  for (int k = 0; k < points; ++k) {
    const double tau = k == points - 1 ? hi : lo + (hi - lo) * k / (points - 1);
    const auto s = sample_tau(d, j, p, tau, hint, opt);
    if (s && prev && (s->int_f < 0.0) != (prev->int_f < 0.0)) {
      const double dist = std::abs(0.5 * (prev->tau + s->tau) - center);
      if (dist < best_dist) {
        best_dist = dist;
        best = std::make_pair(prev->tau, s->tau);
      }
    }
    prev = s;
  }
  return best;
}

std::string_view to_string(EndpointKind k) {
  switch (k) {
    case EndpointKind::WeakPositive:
      return "WeakPositive";
    case EndpointKind::StrongZero:
      return "StrongZero";
    case EndpointKind::Undetermined:
      break;
  }
  return "Undetermined";
}

std::vector<double> default_d_grid(const ModelParams& p, int j, double d_min_fraction,
                                   int onset_points, int per_decade) {
  if (!(d_min_fraction > 0.0 && d_min_fraction < 0.5)) {
    throw DomainError("default_d_grid: d_min_fraction must lie in (0, 0.5)");
  }
  const double dj = bifurcation_point(p, j);
  std::vector<double> grid;
  const double e0 = 1e-3;
  const double e1 = 0.5;
  for (int k = 0; k < onset_points; ++k) {
    const double eps = e0 * std::pow(e1 / e0, static_cast<double>(k) / (onset_points - 1));
    grid.push_back(dj * (1.0 - eps));
  }
  const int steps =
      static_cast<int>(std::ceil(per_decade * std::log10(0.5 / d_min_fraction)));
  for (int k = 1; k <= steps; ++k) {
    grid.push_back(dj * 0.5 * std::pow(d_min_fraction / 0.5, static_cast<double>(k) / steps));
  }
  return grid;
}

BranchPoint solve_branch_point(int j, Orientation o, const ModelParams& p, double d,
                               const BranchOptions& opt) {
  const double dj = bifurcation_point(p, j);
  if (!(d > 0.0 && d < dj)) throw DomainError("solve_branch_point: d must lie in (0, d^(j))");
  std::vector<double> grid;
  const double ratio = d / dj;
  if (ratio < 0.5) {
    grid = default_d_grid(p, j, ratio);
  } else {
    const double e0 = std::min(1e-3, 1.0 - ratio);
    const double e1 = 1.0 - ratio;
    constexpr int n = 12;
    for (int k = 0; k < n; ++k) {
      const double eps = e0 * std::pow(e1 / e0, static_cast<double>(k) / (n - 1));
      grid.push_back(k == n - 1 ? d : dj * (1.0 - eps));
      if (e0 == e1) break;
    }
  }
  grid.back() = d;
  const Branch br = trace_branch(j, o, p, grid, opt);
  if (br.points.empty() || br.points.back().d != d) {
    throw ContinuationStall("solve_branch_point: continuation did not reach d=" +
                            std::to_string(d) + (br.diagnostic.empty() ? "" : ": " + br.diagnostic));
  }
  return br.points.back();
}

double fit_onset(const std::vector<BranchPoint>& points) {
  if (points.size() < 2) return kNaN;
  std::vector<const BranchPoint*> order;
  for (const auto& bp : points) order.push_back(&bp);
  std::sort(order.begin(), order.end(),
            [](const BranchPoint* a, const BranchPoint* b) { return a->amplitude < b->amplitude; });
  order.resize(std::min<std::size_t>(5, order.size()));
  // Least squares for amplitude^2 = c0 + c1 d.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(order.size());
  for (const BranchPoint* bp : order) {
    const double y = bp->amplitude * bp->amplitude;
    sx += bp->d;
    sy += y;
    sxx += bp->d * bp->d;
    sxy += bp->d * y;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) return kNaN;
  const double c1 = (n * sxy - sx * sy) / den;
  const double c0 = (sy - c1 * sx) / n;
  if (c1 == 0.0) return kNaN;
  return -c0 / c1;
}

namespace {

// StrongZero: tau keeps falling and has dropped well below its onset value.
// WeakPositive: the tau steps shrink, so tau settles at a positive level.
BranchEndpoint classify_endpoint(const std::vector<BranchPoint>& pts, const ModelParams& p) {
  BranchEndpoint ep;
  if (pts.size() < 3) return ep;
  const RegimeTag regime = classify_regime(p).tag;
  const std::size_t n = pts.size();
  const double t1 = pts[n - 3].tau;
  const double t2 = pts[n - 2].tau;
  const double t3 = pts[n - 1].tau;
  if (t3 < t2 && t2 < t1 && t3 < 0.25 * pts.front().tau) {
    if (regime != RegimeTag::WeakCompetition) ep.kind = EndpointKind::StrongZero;
    return ep;
  }
  if (std::abs(t3 - t2) <= std::abs(t2 - t1) && regime != RegimeTag::StrongCompetition) {
    ep.kind = EndpointKind::WeakPositive;
    ep.tau0 = t3;
    try {
      const double balance = solve_balance(p);
      if (std::abs(balance - t3) < 0.05 * balance) ep.tau0 = balance;
    } catch (const Error&) {
    }
  }
  return ep;
}

}  // namespace

Branch trace_branch(int j, Orientation o, const ModelParams& p, const std::vector<double>& d_grid,
                    const BranchOptions& opt) {
  if (j < 1) throw DomainError("trace_branch: j must be >= 1");
  for (std::size_t k = 1; k < d_grid.size(); ++k) {
    if (!(d_grid[k] < d_grid[k - 1])) {
      throw DomainError("trace_branch: d grid must be strictly decreasing");
    }
  }
  const ConstantState cs = constant_state(p);
  const double tbar = tau_bar(p);
  Branch br;
  br.j = j;
  br.orientation = o;
  int failures = 0;
  for (double d : d_grid) {
    try {
      std::optional<std::pair<double, double>> bracket;
      std::optional<AmplitudeHint> hint;
      double center = cs.tau_star;
      if (br.points.empty()) {
        const double kappa = 0.05 * cs.tau_star;
        bracket = scan_tau(d, j, p, cs.tau_star - kappa, cs.tau_star + kappa, 41, center,
                           nullptr, opt);
      } else {
        const BranchPoint& last = br.points.back();
        hint = AmplitudeHint{last.case_tag, last.offset, last.m};
        center = last.tau;
        double hw = std::max(1e-4 * last.tau, std::abs(last.tau - cs.tau_star));
        if (br.points.size() >= 2) {
          const BranchPoint& prev = br.points[br.points.size() - 2];
          const double slope = (last.tau - prev.tau) / (last.d - prev.d);
          center = last.tau + slope * (d - last.d);
          hw = std::max(std::abs(center - last.tau), 1e-4 * last.tau);
        }
        center = std::clamp(center, 0.5 * last.tau, std::min(tbar, 2.0 * last.tau));
        for (int attempt = 0; attempt < 4 && !bracket; ++attempt, hw *= 4.0) {
          bracket = scan_tau(d, j, p, center - hw, center + hw, 9, center, &*hint, opt);
        }
      }
      if (!bracket) {
        bracket = scan_tau(d, j, p, 0.0, tbar, opt.tau_scan_points, center,
                           hint ? &*hint : nullptr, opt);
      }
      if (!bracket) {
        std::ostringstream os;
        os << "no sign change of int f in tau at d=" << d;
        throw BracketError(os.str());
      }
      BranchPoint bp =
          select_tau(d, j, p, bracket->first, bracket->second, hint ? &*hint : nullptr, opt);
      bp.orientation = o;
      if (opt.keep_profiles) {
        const OrbitFamily fam(p, bp.tau, opt.quad);
        bp.profile = std::make_shared<const Profile>(
            reconstruct_profile(fam, bp.ends, j, o, d, opt.profile_nodes));
      }
      br.points.push_back(std::move(bp));
      failures = 0;
    } catch (const Error& e) {
      if (++failures >= 3) {
        br.truncated = true;
        std::ostringstream os;
        os << "continuation stalled after three failures, last at d=" << d << ": " << e.what();
        br.diagnostic = os.str();
        break;
      }
    }
  }
  br.onset_d = fit_onset(br.points);
  br.endpoint = classify_endpoint(br.points, p);
  return br;
}

std::string_view to_string(SingularKind k) {
  switch (k) {
    case SingularKind::LeftStep:
      return "LeftStep";
    case SingularKind::RightStep:
      return "RightStep";
    case SingularKind::Balanced:
      break;
  }
  return "Balanced";
}

SingularLimit classify_singular_limit(double tau, const ModelParams& p) {
  const OrbitFamily fam(p, tau);
  SingularLimit out;
  out.H1 = fam.barrier_left();
  out.H3 = fam.barrier_right();
  const double gap = fam.level_gap();
  const double tol = 1e-10 * std::max(out.H1, out.H3);
  const double z1 = fam.zeros().z1();
  const double z2 = fam.z2();
  const double z3 = fam.zeros().z3();
  const Potential& H = fam.potential();
  auto solve = [&](double target, double lo, double hi) {
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        [&](double u) { return H(u) - target; }, lo, hi,
        boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
  };
  if (std::abs(gap) <= tol) {
    out.kind = SingularKind::Balanced;
    out.eta = z3;
    out.zeta = z1;
  } else if (gap > 0.0) {
    out.kind = SingularKind::LeftStep;
    out.eta = solve(out.H1, z2, z3);
  } else {
    out.kind = SingularKind::RightStep;
    out.zeta = solve(out.H3, z1, z2);
  }
  return out;
}

double solve_balance(const ModelParams& p, int scan_points) {
  const double lo = tau_tilde(p);
  const double hi = tau_bar(p);
  auto gap = [&](double tau) -> std::optional<double> {
    if (!zeros_of_h(tau, p).complete) return std::nullopt;
    return OrbitFamily(p, tau).level_gap();
  };
  std::optional<double> prev;
  double prev_tau = 0.0;
  bool any_nonzero = false;
  for (int k = 1; k < scan_points; ++k) {
    const double tau = lo + (hi - lo) * k / scan_points;
    const auto g = gap(tau);
    if (g && *g != 0.0) any_nonzero = true;
    if (g && prev && *g != 0.0 && *prev != 0.0 && (*g < 0.0) != (*prev < 0.0)) {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(
          [&](double t) {
            const auto v = gap(t);
            if (!v) throw StateError("solve_balance: left the admissible set");
            return *v;
          },
          prev_tau, tau, *prev, *g, boost::math::tools::eps_tolerance<double>(50), iters);
      return 0.5 * (r.first + r.second);
    }
    if (g) {
      prev = g;
      prev_tau = tau;
    }
  }
  throw BracketError(any_nonzero
                         ? "solve_balance: H(z3) - H(z1) does not change sign on (tau~, tau-)"
                         : "solve_balance: no isolated balance level on (tau~, tau-)");
}

double interface_balance_check(double tau0, double ell, const ModelParams& p) {
  if (!(ell > 0.0 && ell < 1.0)) throw DomainError("interface balance: ell must lie in (0, 1)");
  const ZeroTriple zt = zeros_of_h(tau0, p);
  if (!zt.complete) throw StateError("interface balance: h needs three zeros at tau0");
  const double f1 = reaction_f(zt.z1(), tau0 / zt.z1(), p);
  const double f3 = reaction_f(zt.z3(), tau0 / zt.z3(), p);
  return ell * f1 + (1.0 - ell) * f3;
}

double solve_ell(double tau0, const ModelParams& p) {
  const ZeroTriple zt = zeros_of_h(tau0, p);
  if (!zt.complete) throw StateError("interface balance: h needs three zeros at tau0");
  const double f1 = reaction_f(zt.z1(), tau0 / zt.z1(), p);
  const double f3 = reaction_f(zt.z3(), tau0 / zt.z3(), p);
  if (f1 * f3 > 0.0) {
    std::ostringstream os;
    os << "interface balance: f(z1)=" << f1 << " and f(z3)=" << f3
       << " have the same sign, no ell in (0, 1)";
    throw SignError(os.str());
  }
  if (f1 == f3) throw DomainError("interface balance: f vanishes at both levels");
  return f3 / (f3 - f1);
}

void write_branch_csv(std::ostream& os, const Branch& b) {
  const auto old = os.precision(17);
  os << "j,orientation,d,tau,m,amplitude,int_f,int_g\n";
  for (const BranchPoint& bp : b.points) {
    os << bp.j << ',' << to_string(b.orientation) << ',' << bp.d << ',' << bp.tau << ','
       << bp.m << ',' << bp.amplitude << ',' << bp.int_f << ',' << bp.int_g << '\n';
  }
  os.precision(old);
}

nlohmann::json branch_manifest_entry(const Branch& b) {
  nlohmann::json out;
  out["j"] = b.j;
  out["orientation"] = std::string(to_string(b.orientation));
  out["points"] = b.points.size();
  if (std::isfinite(b.onset_d)) {
    out["onset_d"] = b.onset_d;
  } else {
    out["onset_d"] = nullptr;
  }
  out["endpoint"] = {{"kind", std::string(to_string(b.endpoint.kind))},
                     {"tau0", b.endpoint.tau0}};
  if (!b.points.empty()) {
    out["last"] = {{"d", b.points.back().d}, {"tau", b.points.back().tau}};
  }
  out["truncated"] = b.truncated;
  if (!b.diagnostic.empty()) out["diagnostic"] = b.diagnostic;
  return out;
}

}  // namespace sktlimit
