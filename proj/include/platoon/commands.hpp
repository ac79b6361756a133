#pragma once

/**
 * @file commands.hpp
 * @brief Command implementations behind the platoon_cli front end.
 *
 * Each command resolves its parameters from an optional JSON config file and
 * key=value overrides (later overrides win), checks the output directory
 * before computing anything, and writes its files atomically.
 */

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "platoon/serialization.hpp"

namespace platoon {

enum class Command { Synthesize, Verify, Falsify, Simulate, Sweep, PaperRepro };

Command parse_command(const std::string& name);

struct RunConfig {
  Command command = Command::Synthesize;
  std::optional<std::filesystem::path> inputPath;
  std::filesystem::path outputDir;
  std::vector<std::pair<std::string, std::string>> overrides;
};

/// Config file contents merged with the overrides (override values are kept
/// as strings and parsed on use).
Json resolve_parameters(const RunConfig& cfg);

/// synthesis.json + region.csv
SynthesisResult cmd_synthesize(const RunConfig& cfg);
/// stability_report.json + magnitude.csv
StabilityReport cmd_verify(const RunConfig& cfg);
/// witness.json
InstabilityWitness cmd_falsify(const RunConfig& cfg);
/// trace.csv + metrics.json + platoon_length.csv
SimTrace cmd_simulate(const RunConfig& cfg);
/// sweep.json + sweep.csv (|H1| at tau0 for each hw in "hw_values")
Json cmd_sweep(const RunConfig& cfg);
/// Reference designs and one subdirectory per built-in scenario; returns summary.
Json cmd_paper_repro(const RunConfig& cfg);

/// Dispatches, prints a one-line summary or error, returns the exit status.
int run_command(const RunConfig& cfg);

}  // namespace platoon
