#pragma once

/**
 * @file serialization.hpp
 * @brief JSON reports/configs and CSV time series.
 *
 * Structured files are JSON objects carrying "schema_version". Numbers are
 * written with 12 significant digits; non-finite numbers are written as null
 * and read back as +inf. All writes go through a temporary file and rename.
 */

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "platoon/core_model.hpp"
#include "platoon/frequency_analysis.hpp"
#include "platoon/gain_synthesis.hpp"
#include "platoon/platoon_simulator.hpp"

namespace platoon {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Rounds to `digits` significant decimal digits.
double round_significant(double value, int digits = 12);

/// printf("%.12g"), the CSV number format.
std::string format_number(double value);

void to_json(Json& j, const ControllerGains& g);
void from_json(const Json& j, ControllerGains& g);
void to_json(Json& j, const SpacingPolicy& p);
void from_json(const Json& j, SpacingPolicy& p);
void to_json(Json& j, const PlantParams& p);
void from_json(const Json& j, PlantParams& p);
void to_json(Json& j, const FeasibleRegion& r);
void from_json(const Json& j, FeasibleRegion& r);
void to_json(Json& j, const BranchPeak& b);
void from_json(const Json& j, BranchPeak& b);
void to_json(Json& j, const StabilityReport& r);
void from_json(const Json& j, StabilityReport& r);
void to_json(Json& j, const SynthesisResult& r);
void from_json(const Json& j, SynthesisResult& r);
void to_json(Json& j, const InstabilityWitness& w);
void from_json(const Json& j, InstabilityWitness& w);
void to_json(Json& j, const LeadProfile& p);
void from_json(const Json& j, LeadProfile& p);
void to_json(Json& j, const VehicleConfig& c);
void from_json(const Json& j, VehicleConfig& c);
void to_json(Json& j, const Scenario& s);
void from_json(const Json& j, Scenario& s);
void to_json(Json& j, const VehicleMetrics& m);
void from_json(const Json& j, VehicleMetrics& m);

/// Metrics summary of a trace (per-vehicle metrics, ratios, gaps, lengths).
Json metrics_report(const SimTrace& trace);

/// Wraps `body` as {"schema_version": 1, "kind": kind, ...body}.
Json make_document(const std::string& kind, const Json& body);

/// Checks schema_version (and kind when non-empty); throws ConfigError.
void check_document(const Json& document, const std::string& kind = {});

/// Serialized form used for every structured file.
std::string dump_document(const Json& document);

/// CSV with columns time, then x_i, v_i, a_i, u_i, delta_i for i = 0..N.
std::string trace_csv(const SimTrace& trace);

/// Throws IoError unless `dir` exists, is a directory and is writable.
void require_output_dir(const std::filesystem::path& dir);

/// Writes via `path`.tmp and rename; throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Reads and parses a JSON file; IoError if unreadable, ConfigError if malformed.
Json read_json_file(const std::filesystem::path& path);

}  // namespace platoon
