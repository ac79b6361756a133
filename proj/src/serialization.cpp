#include "platoon/serialization.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace platoon {
namespace {

Json num(double value) {
  if (!std::isfinite(value)) return nullptr;
  return round_significant(value);
}

double get_num(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  if (it->is_null()) return std::numeric_limits<double>::infinity();
  if (!it->is_number()) throw ConfigError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

double get_num_or(const Json& j, const char* key, double fallback) {
  return j.contains(key) ? get_num(j, key) : fallback;
}

int get_int(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(std::string("missing field '") + key + "'");
  if (!it->is_number_integer())
    throw ConfigError(std::string("field '") + key + "' must be an integer");
  return it->get<int>();
}

bool get_bool(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_boolean())
    throw ConfigError(std::string("field '") + key + "' must be a boolean");
  return it->get<bool>();
}

const Json& get_obj(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_object())
    throw ConfigError(std::string("field '") + key + "' must be an object");
  return *it;
}

std::vector<double> get_num_array(const Json& j, const char* key) {
  std::vector<double> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError(std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Json num_array(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(num(v));
  return out;
}

const char* lead_kind_name(LeadProfile::Kind kind) {
  switch (kind) {
    case LeadProfile::Kind::PaperSine: return "paper-sine";
    case LeadProfile::Kind::Zero: return "zero";
    case LeadProfile::Kind::CustomTable: return "custom-table";
  }
  return "zero";
}

}  // namespace

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
  return std::strtod(buffer, nullptr);
}

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

void to_json(Json& j, const ControllerGains& g) {
  j = {{"ka", num(g.ka)}, {"kv", num(g.kv)},   {"kp", num(g.kp)},
       {"hw", num(g.hw)}, {"ell", num(g.ell)}, {"r", g.r}};
}

void from_json(const Json& j, ControllerGains& g) {
  g.ka = get_num(j, "ka");
  g.kv = get_num(j, "kv");
  g.kp = get_num(j, "kp");
  g.hw = get_num(j, "hw");
  g.ell = get_num(j, "ell");
  g.r = j.contains("r") ? get_int(j, "r") : 1;
}

void to_json(Json& j, const SpacingPolicy& p) { j = {{"d", num(p.d)}, {"hw", num(p.hw)}}; }

void from_json(const Json& j, SpacingPolicy& p) {
  p.d = get_num(j, "d");
  p.hw = get_num(j, "hw");
}

void to_json(Json& j, const PlantParams& p) { j = {{"tau", num(p.tau)}, {"tau0", num(p.tau0)}}; }

void from_json(const Json& j, PlantParams& p) {
  p.tau0 = get_num(j, "tau0");
  p.tau = get_num_or(j, "tau", p.tau0);
}

void to_json(Json& j, const FeasibleRegion& r) {
  j = {{"a1", num(r.a1)},
       {"b1", num(r.b1)},
       {"a2", num(r.a2)},
       {"b2", num(r.b2)},
       {"vertexKv", num(r.vertexKv)},
       {"vertexKp", num(r.vertexKp)},
       {"nonEmpty", r.nonEmpty}};
}

void from_json(const Json& j, FeasibleRegion& r) {
  r.a1 = get_num(j, "a1");
  r.b1 = get_num(j, "b1");
  r.a2 = get_num(j, "a2");
  r.b2 = get_num(j, "b2");
  r.vertexKv = get_num(j, "vertexKv");
  r.vertexKp = get_num(j, "vertexKp");
  r.nonEmpty = get_bool(j, "nonEmpty");
}

void to_json(Json& j, const BranchPeak& b) {
  j = {{"q", b.q}, {"peak", num(b.peak)}, {"omega", num(b.omega)}, {"tau", num(b.tau)}};
}

void from_json(const Json& j, BranchPeak& b) {
  b.q = get_int(j, "q");
  b.peak = get_num(j, "peak");
  b.omega = get_num(j, "omega");
  b.tau = get_num(j, "tau");
}

void to_json(Json& j, const StabilityReport& r) {
  j = {{"internallyStable", r.internallyStable},
       {"stringStable", r.stringStable},
       {"peakMagnitude", num(r.peakMagnitude)},
       {"peakOmega", num(r.peakOmega)},
       {"worstTau", num(r.worstTau)},
       {"tolerance", num(r.tolerance)},
       {"perBranchPeaks", r.perBranchPeaks},
       {"sumOfNorms", num(r.sumOfNorms)},
       {"gridPoints", r.gridPoints},
       {"tauGridPoints", r.tauGridPoints},
       {"omegaMax", num(r.omegaMax)}};
}

void from_json(const Json& j, StabilityReport& r) {
  r.internallyStable = get_bool(j, "internallyStable");
  r.stringStable = get_bool(j, "stringStable");
  r.peakMagnitude = get_num(j, "peakMagnitude");
  r.peakOmega = get_num(j, "peakOmega");
  r.worstTau = get_num(j, "worstTau");
  r.tolerance = get_num(j, "tolerance");
  r.perBranchPeaks = j.at("perBranchPeaks").get<std::vector<BranchPeak>>();
  r.sumOfNorms = get_num(j, "sumOfNorms");
  r.gridPoints = get_int(j, "gridPoints");
  r.tauGridPoints = get_int(j, "tauGridPoints");
  r.omegaMax = get_num(j, "omegaMax");
}

void to_json(Json& j, const SynthesisResult& r) {
  j = {{"hwLowerBound", num(r.hwLowerBound)},
       {"hwChosen", num(r.hwChosen)},
       {"gains", r.gains},
       {"region", r.region},
       {"certification", r.certification},
       {"tau0", num(r.tau0)},
       {"eta", num(r.eta)},
       {"delayFloorActive", r.delayFloorActive},
       {"strictnessMargin", num(r.strictnessMargin)}};
}

void from_json(const Json& j, SynthesisResult& r) {
  r.hwLowerBound = get_num(j, "hwLowerBound");
  r.hwChosen = get_num(j, "hwChosen");
  r.gains = j.at("gains").get<ControllerGains>();
  r.region = j.at("region").get<FeasibleRegion>();
  r.certification = j.at("certification").get<StabilityReport>();
  r.tau0 = get_num(j, "tau0");
  r.eta = get_num(j, "eta");
  r.delayFloorActive = get_bool(j, "delayFloorActive");
  r.strictnessMargin = get_num(j, "strictnessMargin");
}

void to_json(Json& j, const InstabilityWitness& w) {
  j = {{"omegaHat", num(w.omegaHat)},
       {"tauWitness", num(w.tauWitness)},
       {"magnitude", num(w.magnitude)},
       {"harmonicIndex", w.harmonicIndex}};
}

void from_json(const Json& j, InstabilityWitness& w) {
  w.omegaHat = get_num(j, "omegaHat");
  w.tauWitness = get_num(j, "tauWitness");
  w.magnitude = get_num(j, "magnitude");
  w.harmonicIndex = j.at("harmonicIndex").get<long>();
}

void to_json(Json& j, const LeadProfile& p) {
  j = {{"kind", lead_kind_name(p.kind)}};
  switch (p.kind) {
    case LeadProfile::Kind::Zero:
      break;
    case LeadProfile::Kind::PaperSine:
      j["amplitude"] = num(p.amplitude);
      j["frequency"] = num(p.frequency);
      j["startTime"] = num(p.startTime);
      j["endTime"] = num(p.endTime);
      break;
    case LeadProfile::Kind::CustomTable:
      j["times"] = num_array(p.times);
      j["accels"] = num_array(p.accels);
      break;
  }
}

void from_json(const Json& j, LeadProfile& p) {
  const std::string kind = j.at("kind").get<std::string>();
  p = LeadProfile{};
  if (kind == "zero") return;
  if (kind == "paper-sine") {
    p = LeadProfile::paper_sine(get_num_or(j, "amplitude", 0.5),
                                get_num_or(j, "frequency", 0.1),
                                get_num_or(j, "startTime", 10.0));
    if (j.contains("endTime")) p.endTime = get_num(j, "endTime");
    return;
  }
  if (kind == "custom-table") {
    p.kind = LeadProfile::Kind::CustomTable;
    p.times = get_num_array(j, "times");
    p.accels = get_num_array(j, "accels");
    return;
  }
  throw ConfigError("unknown lead profile kind '" + kind + "'");
}

void to_json(Json& j, const VehicleConfig& c) {
  j = {{"gains", c.gains}, {"spacing", c.spacing}, {"plant", c.plant}};
}

void from_json(const Json& j, VehicleConfig& c) {
  c.gains = get_obj(j, "gains").get<ControllerGains>();
  if (j.contains("spacing")) {
    c.spacing = j.at("spacing").get<SpacingPolicy>();
  } else {
    c.spacing = {get_num(j, "d"), c.gains.hw};
  }
  c.plant = get_obj(j, "plant").get<PlantParams>();
}

void to_json(Json& j, const Scenario& s) {
  j = {{"nFollowers", s.nFollowers},
       {"cruiseSpeed", num(s.cruiseSpeed)},
       {"vehicles", s.vehicles},
       {"lead", s.lead},
       {"duration", num(s.duration)},
       {"stepSize", num(s.stepSize)},
       {"recordInterval", num(s.recordInterval)},
       {"settleWindow", num(s.settleWindow)}};
}

void from_json(const Json& j, Scenario& s) {
  s = Scenario{};
  s.nFollowers = get_int(j, "nFollowers");
  s.cruiseSpeed = get_num(j, "cruiseSpeed");
  s.vehicles = j.at("vehicles").get<std::vector<VehicleConfig>>();
  s.lead = j.contains("lead") ? j.at("lead").get<LeadProfile>() : LeadProfile::zero();
  s.duration = get_num(j, "duration");
  s.stepSize = get_num(j, "stepSize");
  s.recordInterval = get_num_or(j, "recordInterval", s.stepSize);
  s.settleWindow = get_num_or(j, "settleWindow", 0.0);
}

void to_json(Json& j, const VehicleMetrics& m) {
  j = {{"supAbsDelta", num(m.supAbsDelta)},
       {"baselineDelta", num(m.baselineDelta)},
       {"supAbsDeltaCorrected", num(m.supAbsDeltaCorrected)},
       {"ratio", num(m.ratio)},
       {"ratioCorrected", num(m.ratioCorrected)}};
}

void from_json(const Json& j, VehicleMetrics& m) {
  m.supAbsDelta = get_num(j, "supAbsDelta");
  m.baselineDelta = get_num(j, "baselineDelta");
  m.supAbsDeltaCorrected = get_num(j, "supAbsDeltaCorrected");
  m.ratio = get_num(j, "ratio");
  m.ratioCorrected = get_num(j, "ratioCorrected");
}

Json metrics_report(const SimTrace& trace) {
  Json vehicles = Json::array();
  for (int i = 1; i < trace.vehicle_count(); ++i) {
    Json entry = trace.metrics[i];
    entry["vehicle"] = i;
    vehicles.push_back(entry);
  }
  const Eigen::VectorXd length = platoon_length(trace);
  return {{"vehicles", vehicles},
          {"maxRatio", num(trace.maxRatio)},
          {"maxRatioCorrected", num(trace.maxRatioCorrected)},
          {"stringStableTimeDomain", trace.maxRatio <= 1.0},
          {"minFrontGap", num(trace.minFrontGap)},
          {"maxAbsDelta", num(trace.maxAbsDeltaAllTime)},
          {"samples", trace.times.size()},
          {"platoonLength",
           {{"initial", num(length(0))},
            {"final", num(length(length.size() - 1))},
            {"min", num(length.minCoeff())},
            {"max", num(length.maxCoeff())}}}};
}

Json make_document(const std::string& kind, const Json& body) {
  Json doc = {{"schema_version", kSchemaVersion}, {"kind", kind}};
  for (const auto& [key, value] : body.items()) doc[key] = value;
  return doc;
}

void check_document(const Json& document, const std::string& kind) {
  if (!document.is_object()) throw ConfigError("structured file must hold a JSON object");
  if (!document.contains("schema_version") || document["schema_version"] != kSchemaVersion)
    throw ConfigError("unsupported or missing schema_version (expected " +
                      std::to_string(kSchemaVersion) + ")");
  if (!kind.empty() && document.value("kind", std::string{}) != kind)
    throw ConfigError("expected a '" + kind + "' document");
}

std::string dump_document(const Json& document) { return document.dump(2) + "\n"; }

std::string trace_csv(const SimTrace& trace) {
  std::ostringstream out;
  out << "time";
  for (int i = 0; i < trace.vehicle_count(); ++i)
    for (const char* name : {"x", "v", "a", "u", "delta"}) out << ',' << name << '_' << i;
  out << '\n';
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    out << format_number(trace.times[k]);
    for (int i = 0; i < trace.vehicle_count(); ++i) {
      for (const Eigen::MatrixXd* m : {&trace.x, &trace.v, &trace.a, &trace.u, &trace.delta})
        out << ',' << format_number((*m)(k, i));
    }
    out << '\n';
  }
  return out.str();
}

void require_output_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (dir.empty()) throw IoError("no output directory given");
  if (!std::filesystem::is_directory(dir, ec))
    throw IoError("output directory '" + dir.string() + "' does not exist");
  if (::access(dir.c_str(), W_OK) != 0)
    throw IoError("output directory '" + dir.string() + "' is not writable");
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) throw IoError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

}  // namespace platoon
