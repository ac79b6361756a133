// Command-line front end: one subcommand per analysis, results written to --out.
#include <CLI11.hpp>

#include <map>

#include "platoon/commands.hpp"

namespace {

struct Shared {
  std::string config;
  std::string out = ".";
  std::vector<std::string> sets;
  std::map<std::string, std::string> named;
};

void add_shared_flags(CLI::App* sub, Shared& s) {
  sub->add_option("--config", s.config, "JSON config file");
  sub->add_option("--out", s.out, "output directory (must exist)");
  sub->add_option("--set", s.sets, "override key=value (repeatable)");
  // Shorthand flags map onto the same keys as --set.
  const std::pair<const char*, const char*> shorthands[] = {
      {"--variant", "variant"}, {"--tau0", "tau0"}, {"--ell", "ell"},
      {"--ka", "ka"},           {"--r", "r"},       {"--eta", "eta"},
      {"--hw", "hw"},           {"--kv", "kv"},     {"--kp", "kp"},
      {"--omega-max", "omega_max"}, {"--grid", "grid"}, {"--step", "step"},
      {"--duration", "duration"}};
  for (const auto& [flag, key] : shorthands) {
    sub->add_option_function<std::string>(
        flag, [&s, key = std::string(key)](const std::string& v) { s.named[key] = v; });
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delayed-CACC platoon design, certification and simulation"};
  app.require_subcommand(1);

  const std::pair<const char*, const char*> commands[] = {
      {"synthesize", "choose headway and gains, certify them, write the feasible region"},
      {"verify", "robust string-stability check of given gains"},
      {"falsify", "instability witness for ka >= 1"},
      {"simulate", "time-domain run of a scenario file or built-in variant"},
      {"sweep", "|H1| curves and verdicts over a list of headways (hw_values)"},
      {"paper-repro", "reference designs and all built-in simulation variants"}};

  Shared shared;
  for (const auto& [name, help] : commands) add_shared_flags(app.add_subcommand(name, help), shared);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : platoon::exit_status(platoon::ErrorKind::Config);
  }

  platoon::RunConfig cfg;
  try {
    cfg.command = platoon::parse_command(app.get_subcommands().front()->get_name());
    for (const auto& item : shared.sets) {
      const auto eq = item.find('=');
      if (eq == std::string::npos || eq == 0)
        throw platoon::ConfigError("--set expects key=value, got '" + item + "'");
      cfg.overrides.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
  } catch (const platoon::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return platoon::exit_status(e.kind());
  }
  for (const auto& kv : shared.named) cfg.overrides.push_back(kv);
  if (!shared.config.empty()) cfg.inputPath = shared.config;
  cfg.outputDir = shared.out;
  return platoon::run_command(cfg);
}
