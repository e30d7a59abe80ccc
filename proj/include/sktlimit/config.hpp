#pragma once

// Run configuration shared by the command-line front end and the Python
// bindings. Files are INI style:
//
//   [model]
//   a1 = 7.5
//   a2 = 2.2857142857142856
//   ...
//   [branch]
//   modes = 1, 2, 3
//
// Every key has a default; unknown sections or keys are rejected.

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sktlimit/model.hpp"
#include "sktlimit/quadrature.hpp"

namespace sktlimit {

struct HprofileConfig {
  std::vector<double> taus;  // empty: tau* only
  int points = 400;
  double u_min = 0.0;  // 0: chosen from the zeros
  double u_max = 0.0;
};

struct TimemapConfig {
  double tau = 0.0;  // 0: tau*
  double d = 0.0;    // 0: half of d^(1)
  int points = 200;
};

struct SolveConfig {
  int j = 1;
  double d = 0.0;  // 0: half of d^(j)
  std::string orientation = "+";  // +, - or both
  int nodes = 1025;
  int tau_scan_points = 240;
};

struct BranchConfig {
  std::vector<int> modes{1};
  std::vector<std::string> orientations{"+"};
  double d_min_fraction = 1e-4;
  int onset_points = 12;
  int per_decade = 8;
  double int_f_tolerance = 1e-8;
  int scan_points = 512;
  int jobs = 1;
};

struct ValidateConfig {
  std::vector<double> alphas{100.0, 400.0, 1600.0};
  double d_fraction = 0.3;  // mid-branch point at d = d_fraction d^(1)
  int j = 1;
  int N = 400;
  std::string unknowns = "transformed";
  double rel_tolerance = 1e-10;
};

struct RunConfig {
  ModelParams model;
  QuadratureOptions quad;
  HprofileConfig hprofile;
  TimemapConfig timemap;
  SolveConfig solve;
  BranchConfig branch;
  ValidateConfig validate;
  std::string output_dir = ".";

  /// Throws ConfigError on nonpositive tolerances, counts or coefficients.
  void check() const;
};

/// Parameter sets of the two figures: "fig2" (strong competition) and
/// "fig3" (weak competition). Throws ConfigError for other names.
ModelParams preset_model(std::string_view name);

/// Throws ConfigError on unreadable files, unknown keys or bad values.
RunConfig load_config(const std::string& path);
RunConfig parse_config(std::istream& in);
/// Sets `section.key` from its text form, as in the file.
void apply_override(RunConfig& cfg, std::string_view dotted_key, std::string_view value);
/// `section.key=value`.
void apply_assignment(RunConfig& cfg, std::string_view assignment);

/// Every key with its effective value.
nlohmann::json config_to_json(const RunConfig& cfg);
std::vector<std::string> config_keys();

}  // namespace sktlimit
