#include "sktlimit/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "sktlimit/branch.hpp"
#include "sktlimit/bvp.hpp"
#include "sktlimit/errors.hpp"
#include "sktlimit/model.hpp"
#include "sktlimit/sktfd.hpp"
#include "sktlimit/spectral.hpp"
#include "sktlimit/timemap.hpp"

namespace sktlimit {

namespace fs = std::filesystem;

namespace {

constexpr int kReportModes = 4;

void note(const CommandIO& io, const std::string& line) {
  if (io.progress) *io.progress << line << '\n' << std::flush;
}

fs::path prepare_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + cfg.output_dir + "'");
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write '" + path.string() + "'");
  return os;
}

void write_manifest(const fs::path& dir, std::string_view command, const RunConfig& cfg,
                    nlohmann::json body) {
  body["command"] = command;
  body["config"] = config_to_json(cfg);
  auto os = open_out(dir / "manifest.json");
  os << body.dump(2) << '\n';
}

std::string fmt(double x, int digits = 10) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

std::string with_hint(double x) {
  std::string s = fmt(x, 17);
  if (const auto r = rational_hint(x)) s += " (" + *r + ")";
  return s;
}

std::string orientation_tag(Orientation o) { return o == Orientation::Plus ? "plus" : "minus"; }

BranchOptions branch_options(const RunConfig& cfg) {
  BranchOptions opt;
  opt.quad = cfg.quad;
  opt.scan_points = cfg.branch.scan_points;
  opt.int_f_tolerance = cfg.branch.int_f_tolerance;
  return opt;
}

}  // namespace

std::optional<std::string> rational_hint(double x) {
  if (!std::isfinite(x) || x == 0.0) return std::nullopt;
  // Continued fraction convergents.
  double r = std::abs(x);
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 40; ++it) {
    const double a = std::floor(r);
    if (a > 1e9) break;
    const long long ai = static_cast<long long>(a);
    const long long p2 = ai * p1 + p0;
    const long long q2 = ai * q1 + q0;
    if (q2 > 100000) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - std::abs(x)) <= 1e-12 * std::abs(x)) {
      if (q1 == 1) return std::nullopt;
      return std::string(x < 0 ? "-" : "") + std::to_string(p1) + "/" + std::to_string(q1);
    }
    const double frac = r - a;
    if (frac <= 0.0) break;
    r = 1.0 / frac;
  }
  return std::nullopt;
}

bool quiet_from_env() {
  const char* v = std::getenv("SKT_LIMIT_QUIET");
  return v != nullptr && std::string_view(v) != "" && std::string_view(v) != "0";
}

void cmd_regime(const RunConfig& cfg, const CommandIO& io) {
  const ModelParams& p = cfg.model;
  std::ostream& out = *io.out;
  const Regime reg = classify_regime(p);
  out << "regime: " << to_string(reg.tag) << '\n';
  out << "A = " << with_hint(p.A()) << ", B = " << with_hint(p.B()) << ", C = " << with_hint(p.C())
      << '\n';
  if (!reg.nondegenerate()) throw RegimeError("degenerate parameters: " + reg.detail);
  const ConstantState cs = constant_state(p);
  out << "u* = " << with_hint(cs.u_star) << '\n';
  out << "v* = " << with_hint(cs.v_star) << '\n';
  out << "w* = " << with_hint(cs.w_star) << '\n';
  out << "tau* = " << with_hint(cs.tau_star) << '\n';
  const double D = discriminant_D(p);
  out << "D = " << with_hint(D) << '\n';
  out << "tau_bar = " << with_hint(tau_bar(p)) << '\n';
  out << "tau_tilde = " << fmt(tau_tilde(p), 12) << '\n';
  if (D > 0.0) {
    for (int j = 1; j <= kReportModes; ++j) {
      out << "d^(" << j << ") = " << fmt(bifurcation_point(p, j), 17) << '\n';
    }
  } else {
    out << "no pitchfork points: D <= 0\n";
  }
}

void cmd_hprofile(const RunConfig& cfg, const CommandIO& io) {
  const ModelParams& p = cfg.model;
  std::vector<double> taus = cfg.hprofile.taus;
  if (taus.empty()) taus.push_back(constant_state(p).tau_star);
  const fs::path dir = prepare_dir(cfg);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    const ZeroTriple zt = zeros_of_h(tau, p);
    double lo = cfg.hprofile.u_min;
    double hi = cfg.hprofile.u_max;
    const double top = std::max(p.a1 / p.b1, zt.zeros.empty() ? 0.0 : zt.zeros.back());
    if (lo == 0.0) lo = 0.2 * (zt.zeros.empty() ? 1e-3 * top : zt.zeros.front());
    if (hi == 0.0) hi = 1.5 * top;
    if (!(lo < hi)) throw ConfigError("hprofile: empty u range");
    const std::string name = "hprofile_" + std::to_string(i) + ".csv";
    auto os = open_out(dir / name);
    os << std::setprecision(17) << "u,h\n";
    const int n = cfg.hprofile.points;
    for (int k = 0; k < n; ++k) {
      const double u = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
      os << u << ',' << h_value(u, tau, p) << '\n';
    }
    for (double z : zt.zeros) os << z << ',' << h_value(z, tau, p) << '\n';
    files.push_back({{"file", name},
                     {"tau", tau},
                     {"complete", zt.complete},
                     {"zeros", zt.zeros},
                     {"grid_rows", n},
                     {"zero_rows", zt.zeros.size()}});
    *io.out << "tau = " << fmt(tau, 17) << ": " << zt.zeros.size() << " zero(s)"
            << (zt.complete ? " (complete)" : "") << " -> " << name << '\n';
  }
  write_manifest(dir, "hprofile", cfg, {{"profiles", files}});
}

void cmd_timemap(const RunConfig& cfg, const CommandIO& io) {
  const ModelParams& p = cfg.model;
  const double tau = cfg.timemap.tau > 0.0 ? cfg.timemap.tau : constant_state(p).tau_star;
  const double d = cfg.timemap.d > 0.0 ? cfg.timemap.d : 0.5 * bifurcation_point(p, 1);
  const OrbitFamily fam(p, tau, cfg.quad);
  const double lo = fam.m_lower();
  const double z2 = fam.z2();
  const double span = z2 - lo;
  // Offsets from both ends of (m_lower, z2), log spaced toward each end.
  const int n = cfg.timemap.points;
  const int half = n / 2;
  std::vector<double> ms;
  for (int k = 0; k < half; ++k) {
    ms.push_back(lo + span * 1e-12 * std::pow(0.5e12, static_cast<double>(k) / half));
  }
  for (int k = n - half - 1; k >= 0; --k) {
    ms.push_back(z2 - span * 1e-8 * std::pow(0.5e8, static_cast<double>(k) / (n - half - 1)));
  }
  const fs::path dir = prepare_dir(cfg);
  auto os = open_out(dir / "timemap.csv");
  os << std::setprecision(17) << "m,X\n";
  int failures = 0;
  for (double m : ms) {
    if (!(m > lo && m < z2)) continue;
    try {
      os << m << ',' << fam.time_map(m, d) << '\n';
    } catch (const NumericalError& e) {
      ++failures;
      note(io, std::string("timemap: skipped m=") + fmt(m, 17) + ": " + e.what());
    }
  }
  const double limit = fam.time_map_limit(d);
  os << z2 << ',' << limit << '\n';
  *io.out << "tau = " << fmt(tau, 17) << ", d = " << fmt(d, 17) << ", case "
          << to_string(fam.time_map_case().tag) << "\n";
  *io.out << "m range (" << fmt(lo, 17) << ", " << fmt(z2, 17) << "), X limit at z2 = "
          << fmt(limit, 17) << " -> timemap.csv\n";
  write_manifest(dir, "timemap", cfg,
                 {{"file", "timemap.csv"},
                  {"tau", tau},
                  {"d", d},
                  {"case", to_string(fam.time_map_case().tag)},
                  {"m_lower", lo},
                  {"z2", z2},
                  {"limit", limit},
                  {"skipped", failures}});
}

void cmd_solve(const RunConfig& cfg, const CommandIO& io) {
  const ModelParams& p = cfg.model;
  const int j = cfg.solve.j;
  const double dj = bifurcation_point(p, j);
  const double d = cfg.solve.d > 0.0 ? cfg.solve.d : 0.5 * dj;
  BranchOptions opt = branch_options(cfg);
  opt.tau_scan_points = cfg.solve.tau_scan_points;
  note(io, "solve: continuing from d^(" + std::to_string(j) + ") = " + fmt(dj, 12) + " to d = " +
               fmt(d, 12));
  const BranchPoint bp = solve_branch_point(j, Orientation::Plus, p, d, opt);
  const OrbitFamily fam(p, bp.tau, cfg.quad);
  const Profile plus = reconstruct_profile(fam, bp.ends, j, Orientation::Plus, d, cfg.solve.nodes);
  std::vector<Profile> profiles;
  if (cfg.solve.orientation != "-") profiles.push_back(plus);
  if (cfg.solve.orientation != "+") profiles.push_back(shifted(plus));

  const fs::path dir = prepare_dir(cfg);
  nlohmann::json files = nlohmann::json::array();
  std::ostream& out = *io.out;
  out << "j = " << j << ", d = " << fmt(d, 17) << " (" << fmt(d / dj, 6) << " d^(" << j
      << "))\n";
  out << "tau = " << fmt(bp.tau, 17) << ", m = " << fmt(bp.m, 17) << ", M = " << fmt(bp.M, 17)
      << '\n';
  out << "int f = " << fmt(bp.int_f, 3) << ", int g = " << fmt(bp.int_g, 3)
      << (bp.tau_resolution_limited ? " (tau at double resolution)" : "") << '\n';
  for (const Profile& prof : profiles) {
    const ResidualReport rr = residual_check(prof, p);
    const std::string name =
        "profile_j" + std::to_string(j) + "_" + orientation_tag(prof.orientation) + ".csv";
    auto os = open_out(dir / name);
    write_profile_csv(os, prof);
    out << to_string(prof.orientation) << ": max|d w'' + h| / max|h| = "
        << fmt(rr.ode_residual_max / rr.h_scale, 3) << ", |w'| at ends = " << fmt(rr.bc_residual, 3)
        << " -> " << name << '\n';
    files.push_back({{"file", name},
                     {"orientation", to_string(prof.orientation)},
                     {"ode_residual_max", rr.ode_residual_max},
                     {"h_scale", rr.h_scale},
                     {"bc_residual", rr.bc_residual},
                     {"samples", prof.size()}});
  }
  write_manifest(dir, "solve", cfg,
                 {{"j", j},
                  {"d", d},
                  {"d_bifurcation", dj},
                  {"tau", bp.tau},
                  {"m", bp.m},
                  {"M", bp.M},
                  {"int_f", bp.int_f},
                  {"int_g", bp.int_g},
                  {"tau_resolution_limited", bp.tau_resolution_limited},
                  {"profiles", files}});
}

void cmd_branch(const RunConfig& cfg, const CommandIO& io) {
  const ModelParams& p = cfg.model;
  struct Task {
    int j;
    Orientation o;
  };
  std::vector<Task> tasks;
  for (int j : cfg.branch.modes) {
    for (const auto& o : cfg.branch.orientations) tasks.push_back({j, orientation_from_string(o)});
  }
  // Fail fast on bad parameters before starting workers.
  for (int j : cfg.branch.modes) bifurcation_point(p, j);
  const BranchOptions opt = branch_options(cfg);
  const fs::path dir = prepare_dir(cfg);

  std::vector<std::optional<Branch>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&]() {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      try {
        const auto grid = default_d_grid(p, t.j, cfg.branch.d_min_fraction,
                                         cfg.branch.onset_points, cfg.branch.per_decade);
        results[i] = trace_branch(t.j, t.o, p, grid, opt);
        const std::lock_guard lock(log_mutex);
        note(io, "branch j=" + std::to_string(t.j) + std::string(to_string(t.o)) + ": " +
                     std::to_string(results[i]->points.size()) + " points");
      } catch (const Error& e) {
        errors[i] = e.what();
      }
    }
  };
  const int jobs = std::min<int>(cfg.branch.jobs, static_cast<int>(tasks.size()));
  std::vector<std::jthread> pool;
  for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  pool.clear();

  nlohmann::json entries = nlohmann::json::array();
  std::ostream& out = *io.out;
  bool any_points = false;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& t = tasks[i];
    const std::string label = "j=" + std::to_string(t.j) + std::string(to_string(t.o));
    if (!results[i]) {
      out << label << ": failed: " << errors[i] << '\n';
      entries.push_back({{"j", t.j}, {"orientation", to_string(t.o)}, {"error", errors[i]}});
      continue;
    }
    const Branch& br = *results[i];
    const std::string name =
        "branch_j" + std::to_string(t.j) + "_" + orientation_tag(t.o) + ".csv";
    auto os = open_out(dir / name);
    write_branch_csv(os, br);
    nlohmann::json e = branch_manifest_entry(br);
    const double dj = bifurcation_point(p, t.j);
    e["file"] = name;
    e["d_bifurcation"] = dj;
    entries.push_back(e);
    any_points = any_points || !br.points.empty();
    out << label << ": " << br.points.size() << " points";
    if (!br.points.empty()) {
      out << ", onset rel. error " << fmt((br.onset_d - dj) / dj, 3) << ", tau at d_min "
          << fmt(br.points.back().tau, 10) << ", endpoint " << to_string(br.endpoint.kind);
      if (br.endpoint.kind == EndpointKind::WeakPositive) out << " tau0 = " << fmt(br.endpoint.tau0, 10);
    }
    if (br.truncated) out << " [truncated: " << br.diagnostic << "]";
    out << " -> " << name << '\n';
  }
  write_manifest(dir, "branch", cfg, {{"branches", entries}});
  if (!any_points) throw ContinuationStall("branch: no branch produced any point");
}

void cmd_validate(const RunConfig& cfg, const CommandIO& io) {
  const ModelParams& p = cfg.model;
  const ValidateConfig& vc = cfg.validate;
  const double dj = bifurcation_point(p, vc.j);
  const double d = vc.d_fraction * dj;
  note(io, "validate: limiting branch point at d = " + fmt(d, 12));
  const BranchPoint bp = solve_branch_point(vc.j, Orientation::Plus, p, d, branch_options(cfg));
  const OrbitFamily fam(p, bp.tau, cfg.quad);
  const Profile limit = reconstruct_profile(fam, bp.ends, vc.j, Orientation::Plus, d, 2049);
  NewtonOptions nopt;
  nopt.unknowns = skt_unknowns_from_string(vc.unknowns);
  nopt.rel_tolerance = vc.rel_tolerance;

  const fs::path dir = prepare_dir(cfg);
  std::ostream& out = *io.out;
  out << "limit: j = " << vc.j << ", d = " << fmt(d, 17) << ", tau = " << fmt(bp.tau, 17)
      << '\n';
  out << "alpha, sup|uv - tau|, sup|u - u_lim|, sup|w - w_lim|, newton iterations\n";
  nlohmann::json rows = nlohmann::json::array();
  std::vector<LimitComparison> cmp;
  for (double alpha : vc.alphas) {
    const SktParams sp = SktParams::from_limit(p, d, alpha, vc.N);
    const SktSolution sol = solve_skt(sp, guess_from_profile(sp, limit), nopt);
    const LimitComparison c = compare_with_limit(sol, sp, limit);
    cmp.push_back(c);
    const std::string stem = "skt_alpha" + fmt(alpha, 10);
    {
      auto os = open_out(dir / (stem + ".csv"));
      write_skt_csv(os, sol, sp);
    }
    {
      auto os = open_out(dir / (stem + ".json"));
      nlohmann::json side = skt_sidecar(sol, sp);
      side["comparison"] = {{"tau", c.tau},
                            {"sup_uv_minus_tau", c.sup_uv_minus_tau},
                            {"sup_u_distance", c.sup_u_distance},
                            {"sup_w_distance", c.sup_w_distance}};
      os << side.dump(2) << '\n';
    }
    out << fmt(alpha, 10) << ", " << fmt(c.sup_uv_minus_tau, 4) << ", " << fmt(c.sup_u_distance, 4)
        << ", " << fmt(c.sup_w_distance, 4) << ", " << sol.iterations << '\n';
    rows.push_back({{"alpha", alpha},
                    {"file", stem + ".csv"},
                    {"sup_uv_minus_tau", c.sup_uv_minus_tau},
                    {"sup_u_distance", c.sup_u_distance},
                    {"sup_w_distance", c.sup_w_distance},
                    {"iterations", sol.iterations},
                    {"residual_norm", sol.residual_norm}});
  }
  bool uv_dec = true;
  bool u_dec = true;
  for (std::size_t k = 1; k < cmp.size(); ++k) {
    uv_dec = uv_dec && cmp[k].sup_uv_minus_tau < cmp[k - 1].sup_uv_minus_tau;
    u_dec = u_dec && cmp[k].sup_u_distance < cmp[k - 1].sup_u_distance;
  }
  out << "sup|uv - tau| decreasing: " << (uv_dec ? "yes" : "no")
      << ", profile distance decreasing: " << (u_dec ? "yes" : "no") << '\n';

  // The constant solution is shared by both problems.
  const SktParams sp0 = SktParams::from_limit(p, d, vc.alphas.front(), vc.N);
  const SktSolution s0 = solve_skt(sp0, constant_guess(sp0), nopt);
  const LimitComparison c0 = compare_with_limit(s0, sp0, constant_profile(p));
  out << "constant solution: sup|uv - tau*| = " << fmt(c0.sup_uv_minus_tau, 3)
      << ", sup|u - u*| = " << fmt(c0.sup_u_distance, 3) << '\n';
  write_manifest(dir, "validate", cfg,
                 {{"d", d},
                  {"tau", bp.tau},
                  {"sweep", rows},
                  {"uv_decreasing", uv_dec},
                  {"profile_distance_decreasing", u_dec},
                  {"constant", {{"sup_uv_minus_tau", c0.sup_uv_minus_tau},
                                {"sup_u_distance", c0.sup_u_distance}}}});
}

int run_command(std::string_view name, const RunConfig& cfg, const CommandIO& io,
                std::ostream& err) {
  try {
    cfg.check();
    if (name == "regime") {
      cmd_regime(cfg, io);
    } else if (name == "hprofile") {
      cmd_hprofile(cfg, io);
    } else if (name == "timemap") {
      cmd_timemap(cfg, io);
    } else if (name == "solve") {
      cmd_solve(cfg, io);
    } else if (name == "branch") {
      cmd_branch(cfg, io);
    } else if (name == "validate") {
      cmd_validate(cfg, io);
    } else {
      err << "unknown command '" << name << "'\n";
      return 2;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

}  // namespace sktlimit
