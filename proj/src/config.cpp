#include "sktlimit/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "sktlimit/bvp.hpp"
#include "sktlimit/errors.hpp"

namespace sktlimit {

namespace {

std::string trimmed(std::string_view s) { return boost::algorithm::trim_copy(std::string(s)); }

// Plain decimals, or p/q so that coefficients such as 16/7 can be given exactly.
double parse_double(std::string_view text, std::string_view key) {
  const std::string s = trimmed(text);
  auto one = [&](std::string_view part) {
    double x = 0.0;
    const auto* end = part.data() + part.size();
    const auto [ptr, ec] = std::from_chars(part.data(), end, x);
    if (ec != std::errc() || ptr != end || part.empty()) {
      throw ConfigError("bad number '" + s + "' for " + std::string(key));
    }
    return x;
  };
  const auto slash = s.find('/');
  if (slash == std::string::npos) return one(s);
  return one(std::string_view(s).substr(0, slash)) / one(std::string_view(s).substr(slash + 1));
}

int parse_int(std::string_view text, std::string_view key) {
  const std::string s = trimmed(text);
  int x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("bad integer '" + s + "' for " + std::string(key));
  }
  return x;
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> parts;
  const std::string s = trimmed(text);
  if (s.empty()) return parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  return parts;
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<nlohmann::json(const RunConfig&)> get;

  std::string name() const { return section + "." + key; }
};

template <class T>
Field number(std::string section, std::string key, T RunConfig::*group, double T::*member) {
  const std::string name = section + "." + key;
  return {std::move(section), std::move(key),
          [=](RunConfig& c, std::string_view v) { (c.*group).*member = parse_double(v, name); },
          [=](const RunConfig& c) { return nlohmann::json((c.*group).*member); }};
}

template <class T>
Field integer(std::string section, std::string key, T RunConfig::*group, int T::*member) {
  const std::string name = section + "." + key;
  return {std::move(section), std::move(key),
          [=](RunConfig& c, std::string_view v) { (c.*group).*member = parse_int(v, name); },
          [=](const RunConfig& c) { return nlohmann::json((c.*group).*member); }};
}

template <class T>
Field text(std::string section, std::string key, T RunConfig::*group,
           std::string T::*member) {
  return {std::move(section), std::move(key),
          [=](RunConfig& c, std::string_view v) { (c.*group).*member = trimmed(v); },
          [=](const RunConfig& c) { return nlohmann::json((c.*group).*member); }};
}

template <class T>
Field number_list(std::string section, std::string key, T RunConfig::*group,
                  std::vector<double> T::*member) {
  const std::string name = section + "." + key;
  return {std::move(section), std::move(key),
          [=](RunConfig& c, std::string_view v) {
            std::vector<double> out;
            for (const auto& p : split_list(v)) out.push_back(parse_double(p, name));
            (c.*group).*member = out;
          },
          [=](const RunConfig& c) { return nlohmann::json((c.*group).*member); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    const auto M = &RunConfig::model;
    f.push_back(number("model", "a1", M, &ModelParams::a1));
    f.push_back(number("model", "a2", M, &ModelParams::a2));
    f.push_back(number("model", "b1", M, &ModelParams::b1));
    f.push_back(number("model", "b2", M, &ModelParams::b2));
    f.push_back(number("model", "c1", M, &ModelParams::c1));
    f.push_back(number("model", "c2", M, &ModelParams::c2));
    f.push_back(number("model", "gamma", M, &ModelParams::gamma));
    f.push_back(number("model", "delta", M, &ModelParams::delta));
    f.push_back({"model", "preset",
                 [](RunConfig& c, std::string_view v) { c.model = preset_model(trimmed(v)); },
                 [](const RunConfig&) { return nlohmann::json(nullptr); }});

    f.push_back({"quadrature", "scheme",
                 [](RunConfig& c, std::string_view v) {
                   try {
                     c.quad.scheme = quadrature_scheme_from_string(trimmed(v));
                   } catch (const Error& e) {
                     throw ConfigError(e.what());
                   }
                 },
                 [](const RunConfig& c) { return nlohmann::json(to_string(c.quad.scheme)); }});
    f.push_back(integer("quadrature", "order", &RunConfig::quad, &QuadratureOptions::order));

    const auto H = &RunConfig::hprofile;
    f.push_back(number_list("hprofile", "taus", H, &HprofileConfig::taus));
    f.push_back(integer("hprofile", "points", H, &HprofileConfig::points));
    f.push_back(number("hprofile", "u_min", H, &HprofileConfig::u_min));
    f.push_back(number("hprofile", "u_max", H, &HprofileConfig::u_max));

    const auto T = &RunConfig::timemap;
    f.push_back(number("timemap", "tau", T, &TimemapConfig::tau));
    f.push_back(number("timemap", "d", T, &TimemapConfig::d));
    f.push_back(integer("timemap", "points", T, &TimemapConfig::points));

    const auto S = &RunConfig::solve;
    f.push_back(integer("solve", "j", S, &SolveConfig::j));
    f.push_back(number("solve", "d", S, &SolveConfig::d));
    f.push_back(text("solve", "orientation", S, &SolveConfig::orientation));
    f.push_back(integer("solve", "nodes", S, &SolveConfig::nodes));
    f.push_back(integer("solve", "tau_scan_points", S, &SolveConfig::tau_scan_points));

    const auto B = &RunConfig::branch;
    f.push_back({"branch", "modes",
                 [](RunConfig& c, std::string_view v) {
                   std::vector<int> out;
                   for (const auto& p : split_list(v)) out.push_back(parse_int(p, "branch.modes"));
                   c.branch.modes = out;
                 },
                 [](const RunConfig& c) { return nlohmann::json(c.branch.modes); }});
    f.push_back({"branch", "orientations",
                 [](RunConfig& c, std::string_view v) { c.branch.orientations = split_list(v); },
                 [](const RunConfig& c) { return nlohmann::json(c.branch.orientations); }});
    f.push_back(number("branch", "d_min_fraction", B, &BranchConfig::d_min_fraction));
    f.push_back(integer("branch", "onset_points", B, &BranchConfig::onset_points));
    f.push_back(integer("branch", "per_decade", B, &BranchConfig::per_decade));
    f.push_back(number("branch", "int_f_tolerance", B, &BranchConfig::int_f_tolerance));
    f.push_back(integer("branch", "scan_points", B, &BranchConfig::scan_points));
    f.push_back(integer("branch", "jobs", B, &BranchConfig::jobs));

    const auto V = &RunConfig::validate;
    f.push_back(number_list("validate", "alphas", V, &ValidateConfig::alphas));
    f.push_back(number("validate", "d_fraction", V, &ValidateConfig::d_fraction));
    f.push_back(integer("validate", "j", V, &ValidateConfig::j));
    f.push_back(integer("validate", "N", V, &ValidateConfig::N));
    f.push_back(text("validate", "unknowns", V, &ValidateConfig::unknowns));
    f.push_back(number("validate", "rel_tolerance", V, &ValidateConfig::rel_tolerance));

    f.push_back({"output", "dir",
                 [](RunConfig& c, std::string_view v) { c.output_dir = trimmed(v); },
                 [](const RunConfig& c) { return nlohmann::json(c.output_dir); }});
    return f;
  }();
  return table;
}

const Field& find_field(std::string_view section, std::string_view key) {
  for (const auto& f : fields()) {
    if (f.section == section && f.key == key) return f;
  }
  throw ConfigError("unknown config key '" + std::string(section) + "." + std::string(key) + "'");
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

void RunConfig::check() const {
  try {
    model.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (quad.order < 8) throw ConfigError("quadrature.order must be at least 8");
  if (hprofile.points < 2) throw ConfigError("hprofile.points must be at least 2");
  for (double t : hprofile.taus) require_positive(t, "hprofile.taus entries");
  if (hprofile.u_min < 0.0 || hprofile.u_max < 0.0 ||
      (hprofile.u_max > 0.0 && hprofile.u_max <= hprofile.u_min)) {
    throw ConfigError("hprofile.u_min/u_max must satisfy 0 <= u_min < u_max");
  }
  if (timemap.tau < 0.0 || timemap.d < 0.0) throw ConfigError("timemap.tau and d must be >= 0");
  if (timemap.points < 2) throw ConfigError("timemap.points must be at least 2");
  if (solve.j < 1) throw ConfigError("solve.j must be >= 1");
  if (solve.d < 0.0) throw ConfigError("solve.d must be >= 0");
  if (solve.orientation != "+" && solve.orientation != "-" && solve.orientation != "both") {
    throw ConfigError("solve.orientation must be +, - or both");
  }
  if (solve.nodes < 65) throw ConfigError("solve.nodes must be at least 65");
  if (solve.tau_scan_points < 4) throw ConfigError("solve.tau_scan_points must be at least 4");
  if (branch.modes.empty()) throw ConfigError("branch.modes is empty");
  for (int j : branch.modes) {
    if (j < 1) throw ConfigError("branch.modes entries must be >= 1");
  }
  if (branch.orientations.empty()) throw ConfigError("branch.orientations is empty");
  for (const auto& o : branch.orientations) {
    if (o != "+" && o != "-") throw ConfigError("branch.orientations entries must be + or -");
  }
  if (!(branch.d_min_fraction > 0.0 && branch.d_min_fraction < 0.5)) {
    throw ConfigError("branch.d_min_fraction must lie in (0, 0.5)");
  }
  if (branch.onset_points < 5) throw ConfigError("branch.onset_points must be at least 5");
  if (branch.per_decade < 1) throw ConfigError("branch.per_decade must be >= 1");
  require_positive(branch.int_f_tolerance, "branch.int_f_tolerance");
  if (branch.scan_points < 16) throw ConfigError("branch.scan_points must be at least 16");
  if (branch.jobs < 1) throw ConfigError("branch.jobs must be >= 1");
  if (validate.alphas.empty()) throw ConfigError("validate.alphas is empty");
  for (double a : validate.alphas) require_positive(a, "validate.alphas entries");
  if (!(validate.d_fraction > 0.0 && validate.d_fraction < 0.5)) {
    throw ConfigError("validate.d_fraction must lie in (0, 0.5)");
  }
  if (validate.j < 1) throw ConfigError("validate.j must be >= 1");
  if (validate.N < 4) throw ConfigError("validate.N must be at least 4");
  if (validate.unknowns != "transformed" && validate.unknowns != "direct") {
    throw ConfigError("validate.unknowns must be transformed or direct");
  }
  require_positive(validate.rel_tolerance, "validate.rel_tolerance");
  if (output_dir.empty()) throw ConfigError("output.dir is empty");
}

ModelParams preset_model(std::string_view name) {
  if (name == "fig2") return {1.0, 1.0, 1.0, 2.0, 2.0, 1.0, 1.0, 1.0};
  if (name == "fig3") return {7.5, 16.0 / 7.0, 4.0, 1.0, 6.0, 2.0, 1.0, 1.0};
  throw ConfigError("unknown preset '" + std::string(name) + "' (fig2 or fig3)");
}

RunConfig parse_config(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig cfg;
  // A preset is applied first so that explicit coefficients override it.
  if (const auto model = tree.get_child_optional("model")) {
    if (const auto preset = model->get_optional<std::string>("preset")) {
      cfg.model = preset_model(trimmed(*preset));
    }
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("config key '" + section + "' outside a section");
    }
    for (const auto& [key, value] : body) {
      if (section == "model" && key == "preset") continue;
      find_field(section, key).set(cfg, value.data());
    }
  }
  cfg.check();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(in);
}

void apply_override(RunConfig& cfg, std::string_view dotted_key, std::string_view value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string_view::npos) {
    throw ConfigError("override key '" + std::string(dotted_key) + "' must be section.key");
  }
  find_field(dotted_key.substr(0, dot), dotted_key.substr(dot + 1)).set(cfg, value);
}

void apply_assignment(RunConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) + "' must be section.key=value");
  }
  apply_override(cfg, trimmed(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

nlohmann::json config_to_json(const RunConfig& cfg) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& f : fields()) {
    if (f.section == "model" && f.key == "preset") continue;
    out[f.section][f.key] = f.get(cfg);
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.name());
  return keys;
}

}  // namespace sktlimit
