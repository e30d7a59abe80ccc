// sktlimit: batch front end. See README.md for the commands.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sktlimit/commands.hpp"
#include "sktlimit/config.hpp"
#include "sktlimit/errors.hpp"

namespace {

// Command flags are kept as text and routed through the config parser so
// that `--d 1/64` and `d = 1/64` mean the same thing.
struct Flag {
  std::string name;
  std::string key;
  std::string help;
};

const std::map<std::string, std::vector<Flag>>& command_flags() {
  static const std::map<std::string, std::vector<Flag>> flags = {
      {"regime", {}},
      {"hprofile",
       {{"--tau", "hprofile.taus", "comma separated tau values"},
        {"--points", "hprofile.points", "grid points per profile"}}},
      {"timemap",
       {{"--tau", "timemap.tau", "level tau (default tau*)"},
        {"--d", "timemap.d", "diffusion (default d^(1)/2)"},
        {"--points", "timemap.points", "number of amplitudes"}}},
      {"solve",
       {{"--j", "solve.j", "mode"},
        {"--d", "solve.d", "diffusion (default d^(j)/2)"},
        {"--orientation", "solve.orientation", "+, - or both"},
        {"--nodes", "solve.nodes", "samples per monotone piece"}}},
      {"branch",
       {{"--modes", "branch.modes", "comma separated modes"},
        {"--orientations", "branch.orientations", "comma separated, + and/or -"},
        {"--jobs", "branch.jobs", "worker threads"},
        {"--d-min-fraction", "branch.d_min_fraction", "smallest d as a fraction of d^(j)"}}},
      {"validate",
       {{"--alphas", "validate.alphas", "comma separated alpha values"},
        {"--d-fraction", "validate.d_fraction", "mid-branch d as a fraction of d^(j)"},
        {"--N", "validate.N", "grid intervals"},
        {"--unknowns", "validate.unknowns", "transformed or direct"}}},
  };
  return flags;
}

const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> help = {
      {"regime", "regime, constant state, D, tau bounds and d^(j)"},
      {"hprofile", "h(u, tau) on a log grid, one CSV per tau"},
      {"timemap", "half-period X(m) over the admissible amplitudes"},
      {"solve", "one nonconstant solution of the limiting system"},
      {"branch", "continue the branches Gamma_j in d"},
      {"validate", "compare full SKT solves at growing alpha with the limit"},
  };
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states of the full cross-diffusion limit of the SKT model"};
  app.require_subcommand(1);
  std::string config_path;
  std::string preset;
  std::string out_dir;
  std::vector<std::string> assignments;
  app.add_option("-c,--config", config_path, "INI config file");
  app.add_option("--preset", preset, "parameter preset: fig2 or fig3");
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("--set", assignments, "override any key, section.key=value")->take_all();

  std::map<std::string, std::map<std::string, std::optional<std::string>>> values;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [cmd, flags] : command_flags()) {
    CLI::App* sub = app.add_subcommand(cmd, command_help().at(cmd));
    sub->fallthrough();
    subs[cmd] = sub;
    for (const auto& f : flags) {
      auto& slot = values[cmd][f.key];
      sub->add_option_function<std::string>(
          f.name, [&slot](const std::string& v) { slot = v; }, f.help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  std::string command;
  for (const auto& [cmd, sub] : subs) {
    if (sub->parsed()) command = cmd;
  }

  sktlimit::RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = sktlimit::load_config(config_path);
    if (!preset.empty()) cfg.model = sktlimit::preset_model(preset);
    for (const auto& a : assignments) sktlimit::apply_assignment(cfg, a);
    for (const auto& [key, v] : values[command]) {
      if (v) sktlimit::apply_override(cfg, key, *v);
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
  } catch (const sktlimit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  sktlimit::CommandIO io;
  io.out = &std::cout;
  io.progress = sktlimit::quiet_from_env() ? nullptr : &std::cerr;
  return sktlimit::run_command(command, cfg, io, std::cerr);
}
