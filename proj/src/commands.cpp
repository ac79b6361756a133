#include "platoon/commands.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

namespace platoon {
namespace {

namespace fs = std::filesystem;

std::optional<double> opt_number(const Json& p, const std::string& key) {
  const auto it = p.find(key);
  if (it == p.end() || it->is_null()) return std::nullopt;
  if (it->is_number()) return it->get<double>();
  if (it->is_string()) {
    const std::string text = it->get<std::string>();
    try {
      std::size_t used = 0;
      const double value = std::stod(text, &used);
      if (used == text.size()) return value;
    } catch (const std::exception&) {
    }
    throw ConfigError("parameter '" + key + "' is not a number: '" + text + "'");
  }
  throw ConfigError("parameter '" + key + "' must be a number");
}

double number(const Json& p, const std::string& key, double fallback) {
  return opt_number(p, key).value_or(fallback);
}

double required_number(const Json& p, const std::string& key) {
  const auto value = opt_number(p, key);
  if (!value) throw ConfigError("missing required parameter '" + key + "'");
  return *value;
}

int integer(const Json& p, const std::string& key, int fallback) {
  const auto value = opt_number(p, key);
  if (!value) return fallback;
  if (std::floor(*value) != *value)
    throw ConfigError("parameter '" + key + "' must be an integer");
  return static_cast<int>(*value);
}

std::string text(const Json& p, const std::string& key, const std::string& fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  if (!it->is_string()) throw ConfigError("parameter '" + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<double> number_list(const Json& p, const std::string& key,
                                const std::vector<double>& fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  std::vector<double> out;
  if (it->is_array()) {
    for (const auto& v : *it) out.push_back(v.get<double>());
    return out;
  }
  std::stringstream ss(it->get<std::string>());
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(*opt_number(Json{{key, item}}, key));
  if (out.empty()) throw ConfigError("parameter '" + key + "' is an empty list");
  return out;
}

SweepOptions sweep_options(const Json& p) {
  SweepOptions o;
  o.omegaMax = number(p, "omega_max", o.omegaMax);
  o.gridPoints = integer(p, "grid", o.gridPoints);
  o.tauGridPoints = integer(p, "tau_grid", o.tauGridPoints);
  o.refineTol = number(p, "refine_tol", o.refineTol);
  return o;
}

ControllerGains gains_from(const Json& p, bool requireGains) {
  ControllerGains g;
  if (requireGains) {
    g.ka = required_number(p, "ka");
    g.kv = required_number(p, "kv");
    g.kp = required_number(p, "kp");
    g.hw = required_number(p, "hw");
  } else {
    g.ka = number(p, "ka", 0.5);
    g.kv = number(p, "kv", 0.67);
    g.kp = number(p, "kp", 0.014);
    g.hw = number(p, "hw", 0.75);
  }
  g.ell = number(p, "ell", 0.1);
  g.r = integer(p, "r", 1);
  validate(g);
  return g;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
    out << '\n';
  }
  return out.str();
}

// Per-vehicle headway bound for r predecessors, including the ell / 2 floor.
double per_vehicle_bound(double tau0, double ell, double ka, int r) {
  return 2.0 / (double(r) + 1.0) * hw_lower_bound_cacc(tau0, ell, double(r) * ka);
}

SynthesisRequest synthesis_request(const Json& p) {
  SynthesisRequest req;
  req.tau0 = number(p, "tau0", req.tau0);
  req.ell = number(p, "ell", req.ell);
  req.ka = number(p, "ka", req.ka);
  req.r = integer(p, "r", req.r);
  if (req.r < 1) throw ConfigError("r must be at least 1");
  req.eta = number(p, "eta", req.eta);
  if (const auto hw = opt_number(p, "hw"))
    req.eta = *hw / per_vehicle_bound(req.tau0, req.ell, req.ka, req.r) - 1.0;
  req.kvChoice = opt_number(p, "kv");
  req.kpChoice = opt_number(p, "kp");
  req.sweep = sweep_options(p);
  return req;
}

void write_synthesis(const fs::path& dir, const std::string& stem, const std::string& regionFile,
                     const SynthesisResult& r) {
  write_file_atomic(dir / (stem + ".json"),
                    dump_document(make_document("synthesis_result", Json(r))));
  const double scale = double(r.gains.r);
  std::vector<std::vector<double>> rows;
  for (const auto& c : region_boundary(r.region))
    rows.push_back({c.x(), c.y(), c.x() / scale, c.y() / scale});
  write_file_atomic(dir / regionFile,
                    csv_table({"kv_scaled", "kp_scaled", "kv", "kp"}, rows));
}

Scenario scenario_from(const Json& p) {
  Scenario s;
  if (p.contains("scenario")) {
    s = p.at("scenario").get<Scenario>();
  } else {
    s = build_paper_scenario(parse_paper_variant(text(p, "variant", "cacc-stable")));
  }
  s.stepSize = number(p, "step", s.stepSize);
  s.duration = number(p, "duration", s.duration);
  s.recordInterval = number(p, "record", s.recordInterval);
  s.settleWindow = number(p, "settle", s.settleWindow);
  return s;
}

void write_simulation(const fs::path& dir, const Scenario& s, const SimTrace& trace) {
  write_file_atomic(dir / "trace.csv", trace_csv(trace));
  Json body = metrics_report(trace);
  body["scenario"] = s;
  write_file_atomic(dir / "metrics.json",
                    dump_document(make_document("simulation_metrics", body)));
  const Eigen::VectorXd length = platoon_length(trace);
  std::vector<std::vector<double>> rows;
  for (Eigen::Index k = 0; k < length.size(); ++k) rows.push_back({trace.times[k], length(k)});
  write_file_atomic(dir / "platoon_length.csv", csv_table({"time", "length"}, rows));
}

std::string tau_label(int q, double tau) { return "H" + std::to_string(q) + "_tau" + format_number(tau); }

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "synthesize") return Command::Synthesize;
  if (name == "verify") return Command::Verify;
  if (name == "falsify") return Command::Falsify;
  if (name == "simulate") return Command::Simulate;
  if (name == "sweep") return Command::Sweep;
  if (name == "paper-repro") return Command::PaperRepro;
  throw ConfigError("unknown command '" + name + "'");
}

Json resolve_parameters(const RunConfig& cfg) {
  Json params = Json::object();
  if (cfg.inputPath) {
    params = read_json_file(*cfg.inputPath);
    check_document(params);
  }
  for (const auto& [key, value] : cfg.overrides) params[key] = value;
  return params;
}

SynthesisResult cmd_synthesize(const RunConfig& cfg) {
  require_output_dir(cfg.outputDir);
  const Json p = resolve_parameters(cfg);
  const SynthesisResult result = synthesize(synthesis_request(p));
  write_synthesis(cfg.outputDir, "synthesis", "region.csv", result);
  return result;
}

StabilityReport cmd_verify(const RunConfig& cfg) {
  require_output_dir(cfg.outputDir);
  const Json p = resolve_parameters(cfg);
  const ControllerGains g = gains_from(p, true);
  const double tau0 = number(p, "tau0", 0.5);
  const SweepOptions options = sweep_options(p);
  const StabilityReport report = robust_string_stability(g, tau0, options);

  Json body = report;
  body["gains"] = g;
  body["tau0"] = round_significant(tau0);
  write_file_atomic(cfg.outputDir / "stability_report.json",
                    dump_document(make_document("stability_report", body)));

  const int points = integer(p, "curve_points", 2000);
  const std::vector<double> taus = {tau0 / 1000.0, tau0 / 100.0, tau0 / 10.0, tau0 / 2.0, tau0};
  std::vector<std::string> header = {"omega"};
  std::vector<std::vector<FrequencyResponsePoint>> curves;
  for (int q = 1; q <= (g.r == 1 ? 1 : 2); ++q) {
    for (double tau : taus) {
      header.push_back(tau_label(q, tau));
      curves.push_back(magnitude_curve(g, q, tau, report.omegaMax, points));
    }
  }
  std::vector<std::vector<double>> rows(curves.front().size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].push_back(curves.front()[k].omega);
    for (const auto& c : curves) rows[k].push_back(c[k].magnitude);
  }
  write_file_atomic(cfg.outputDir / "magnitude.csv", csv_table(header, rows));
  return report;
}

InstabilityWitness cmd_falsify(const RunConfig& cfg) {
  require_output_dir(cfg.outputDir);
  const Json p = resolve_parameters(cfg);
  const ControllerGains g = gains_from(p, true);
  const double tau0 = number(p, "tau0", 0.5);
  const long cap = static_cast<long>(number(p, "max_harmonic", 1e6));
  const InstabilityWitness w = falsify_ka_ge_1(g, tau0, cap);

  Json body = w;
  body["gains"] = g;
  body["tau0"] = round_significant(tau0);
  body["reevaluatedMagnitude"] =
      round_significant(eval_H1(g, w.tauWitness, w.omegaHat).magnitude);
  write_file_atomic(cfg.outputDir / "witness.json",
                    dump_document(make_document("instability_witness", body)));
  return w;
}

SimTrace cmd_simulate(const RunConfig& cfg) {
  require_output_dir(cfg.outputDir);
  const Json p = resolve_parameters(cfg);
  const Scenario s = scenario_from(p);
  const SimTrace trace = simulate(s);
  write_simulation(cfg.outputDir, s, trace);
  return trace;
}

Json cmd_sweep(const RunConfig& cfg) {
  require_output_dir(cfg.outputDir);
  const Json p = resolve_parameters(cfg);
  const ControllerGains base = gains_from(p, false);
  const double tau0 = number(p, "tau0", 0.5);
  const SweepOptions options = sweep_options(p);
  const std::vector<double> hws = number_list(p, "hw_values", {0.65, 0.7333, 0.75});
  const int points = integer(p, "curve_points", 2000);

  Json entries = Json::array();
  std::vector<std::string> header = {"omega"};
  std::vector<std::vector<FrequencyResponsePoint>> curves;
  for (double hw : hws) {
    ControllerGains g = base;
    g.hw = hw;
    const StabilityReport report = robust_string_stability(g, tau0, options);
    entries.push_back({{"hw", round_significant(hw)}, {"report", report}});
    header.push_back("hw" + format_number(hw));
    curves.push_back(magnitude_curve(g, 1, tau0, report.omegaMax, points));
  }
  std::vector<std::vector<double>> rows(curves.front().size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].push_back(curves.front()[k].omega);
    for (const auto& c : curves) rows[k].push_back(c[k].magnitude);
  }
  const Json doc = make_document(
      "hw_sweep", {{"gains", base}, {"tau0", round_significant(tau0)}, {"entries", entries}});
  write_file_atomic(cfg.outputDir / "sweep.json", dump_document(doc));
  write_file_atomic(cfg.outputDir / "sweep.csv", csv_table(header, rows));
  return doc;
}

Json cmd_paper_repro(const RunConfig& cfg) {
  require_output_dir(cfg.outputDir);
  const Json p = resolve_parameters(cfg);

  SynthesisRequest cacc;
  cacc.ka = 0.5;
  cacc.kvChoice = 0.67;
  cacc.kpChoice = 0.014;
  cacc.eta = 0.75 / hw_lower_bound_cacc(cacc.tau0, cacc.ell, cacc.ka) - 1.0;
  SynthesisRequest plus;
  plus.ka = 0.2;
  plus.r = 3;
  plus.kvChoice = 0.16;
  plus.kpChoice = 0.02;
  plus.eta = 0.4 / hw_lower_bound_cacc_plus(plus.tau0, plus.ell, plus.ka, plus.r) - 1.0;
  const SynthesisResult caccDesign = synthesize(cacc);
  const SynthesisResult plusDesign = synthesize(plus);
  write_synthesis(cfg.outputDir, "design_cacc", "design_cacc_region.csv", caccDesign);
  write_synthesis(cfg.outputDir, "design_caccplus", "design_caccplus_region.csv", plusDesign);

  std::vector<PaperVariant> variants = {PaperVariant::CaccStable, PaperVariant::CaccUnstable,
                                        PaperVariant::CaccPlus1, PaperVariant::CaccPlus2};
  if (p.contains("variant")) variants = {parse_paper_variant(text(p, "variant", ""))};

  Json runs = Json::object();
  for (PaperVariant variant : variants) {
    const std::string name = to_string(variant);
    const fs::path dir = cfg.outputDir / name;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    Json overrides = p;
    overrides["variant"] = name;
    const Scenario s = scenario_from(overrides);
    const SimTrace trace = simulate(s);
    write_simulation(dir, s, trace);
    const Json metrics = metrics_report(trace);
    runs[name] = {{"maxRatio", metrics["maxRatio"]},
                  {"maxRatioCorrected", metrics["maxRatioCorrected"]},
                  {"stringStableTimeDomain", metrics["stringStableTimeDomain"]},
                  {"minFrontGap", metrics["minFrontGap"]},
                  {"platoonLength", metrics["platoonLength"]}};
  }

  const Json summary = make_document(
      "paper_repro",
      {{"hwBoundCacc", round_significant(caccDesign.hwLowerBound)},
       {"hwBoundCaccPlus", round_significant(plusDesign.hwLowerBound)},
       {"caccCertified", caccDesign.certification.robust()},
       {"caccPlusCertified", plusDesign.certification.robust()},
       {"runs", runs}});
  write_file_atomic(cfg.outputDir / "summary.json", dump_document(summary));
  return summary;
}

int run_command(const RunConfig& cfg) {
  try {
    switch (cfg.command) {
      case Command::Synthesize: {
        const auto r = cmd_synthesize(cfg);
        std::printf("hw bound %.6g s, chosen %.6g s, kv %.6g, kp %.6g, certified peak %.12g\n",
                    r.hwLowerBound, r.hwChosen, r.gains.kv, r.gains.kp,
                    r.certification.peakMagnitude);
        break;
      }
      case Command::Verify: {
        const auto r = cmd_verify(cfg);
        std::printf("internally stable: %s, string stable: %s, peak %.12g at omega %.6g, tau %.6g\n",
                    r.internallyStable ? "yes" : "no", r.stringStable ? "yes" : "no",
                    r.peakMagnitude, r.peakOmega, r.worstTau);
        break;
      }
      case Command::Falsify: {
        const auto w = cmd_falsify(cfg);
        std::printf("witness: omega %.9g rad/s (k = %ld), tau %.9g s, |H1| = %.12g\n",
                    w.omegaHat, w.harmonicIndex, w.tauWitness, w.magnitude);
        break;
      }
      case Command::Simulate: {
        const auto t = cmd_simulate(cfg);
        std::printf("max ratio %.6g (offset-corrected %.6g), min front gap %.6g m\n",
                    t.maxRatio, t.maxRatioCorrected, t.minFrontGap);
        break;
      }
      case Command::Sweep: {
        const auto doc = cmd_sweep(cfg);
        for (const auto& e : doc["entries"])
          std::printf("hw %.6g: peak %.12g, string stable: %s\n", e["hw"].get<double>(),
                      e["report"]["peakMagnitude"].get<double>(),
                      e["report"]["stringStable"].get<bool>() ? "yes" : "no");
        break;
      }
      case Command::PaperRepro: {
        const auto doc = cmd_paper_repro(cfg);
        for (const auto& [name, run] : doc["runs"].items())
          std::printf("%s: max ratio %.6g\n", name.c_str(), run["maxRatio"].get<double>());
        break;
      }
    }
    return 0;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_status(e.kind());
  } catch (const Json::exception& e) {
    std::fprintf(stderr, "error: malformed input: %s\n", e.what());
    return exit_status(ErrorKind::Config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace platoon
