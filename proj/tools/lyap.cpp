// lyap: certified lower bounds on Lyapunov exponents, checked against
// Monte Carlo estimates.
//
// Exit codes: 0 pass, 1 unexpected error, 2 hypothesis not met,
// 3 assertion failed, 4 bad configuration.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lyap/cli/commands.hpp"

namespace {

std::string flag_name(std::string key) {
  for (auto& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lyap;
  using namespace lyap::cli;

  CLI::App app{"Certified lower bounds on Lyapunov exponents of matrix cocycles", "lyap"};
  app.set_version_flag("--version", LYAP_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format;
  auto* config_opt = app.add_option("--config", config_path, "JSON run configuration");
  auto* seed_opt = app.add_option("--seed", seed, "run seed (u64)");
  app.add_option("--out", out_path, "output file (default: stdout)");
  auto* format_opt =
      app.add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));

  // Per-command flag storage; std::map keeps element addresses stable.
  std::map<std::string, std::map<std::string, std::string>> raw;
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  for (const auto& cmd : commands()) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    for (const auto& key : cmd.keys) {
      auto& slot = raw[cmd.name][key.key];
      std::string help = key.help;
      if (!key.default_value.is_null()) help += " [" + key.default_value.dump() + "]";
      opts[cmd.name][key.key] = sub->add_option(flag_name(key.key), slot, help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  const auto* chosen = app.get_subcommands().front();
  const auto& cmd = find_command(chosen->get_name());
  try {
    std::optional<Json> document;
    if (*config_opt) document = read_json_file(config_path);
    std::map<std::string, std::string> flags;
    for (const auto& [key, opt] : opts[cmd.name])
      if (*opt) flags[key] = raw[cmd.name][key];
    const auto rc = resolve(cmd.name, cmd.keys, document, flags,
                            *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt,
                            *format_opt ? std::optional<std::string>(format) : std::nullopt);
    bool pass = false;
    const std::string text = run_and_render(rc, pass);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::cerr << "lyap: cannot write '" << out_path << "'\n";
        return 4;
      }
      out << text;
    }
    if (!pass) {
      std::cerr << "lyap: " << cmd.name << ": a gating check failed\n";
      return 3;
    }
    return 0;
  } catch (const Error& e) {
    std::cerr << "lyap: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "lyap: unexpected error: " << e.what() << "\n";
    return 1;
  }
}
