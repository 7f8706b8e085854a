// Command-line runner for Shack-Hartmann coherence tomography scenarios.
//
// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "shtomo/scenario.hpp"

namespace {

using namespace shtomo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Options {
  std::string config;
  std::string out = "shtomo_out";
  std::optional<std::uint64_t> seed;
  std::string format = "json";
  std::string data;  // reconstruct: measured intensities instead of simulating
  std::string rho;   // propagate: coherence matrix file instead of the config state
};

int report_error(const std::string& stage, const std::string& kind, const std::string& message, int code) {
  nlohmann::ordered_json e;
  e["schema"] = 1;
  e["error"] = {{"stage", stage}, {"kind", kind}, {"message", message}, {"exit_code", code}};
  std::cerr << e.dump() << std::endl;
  return code;
}

void write_rho(ArtifactSet& out, const std::string& stem, const CoherenceMatrix& rho) {
  out.write(stem + ".json", [&](std::ostream& os) { os << io::coherence_to_json(rho).dump(2) << '\n'; });
  const CMatrix n = rho.normalized();
  out.write(stem + "_real.csv", [&](std::ostream& os) { io::write_matrix_csv(os, n.real()); });
  out.write(stem + "_imag.csv", [&](std::ostream& os) { io::write_matrix_csv(os, n.imag()); });
}

void write_record(ArtifactSet& out, const IntensityRecord& rec) {
  out.write("intensities.csv", [&](std::ostream& os) { io::write_intensity_csv(os, rec); });
  for (std::size_t i = 0; i < rec.lenses; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "lens_%03zu.pgm", i);
    out.write(name, [&](std::ostream& os) { io::write_lens_pgm(os, rec, i); }, true);
  }
}

void write_map(ArtifactSet& out, const std::string& stem, const IntensityMap& m) {
  out.write(stem + ".csv", [&](std::ostream& os) { io::write_map_csv(os, m); });
  out.write(stem + ".pgm", [&](std::ostream& os) { io::write_map_pgm(os, m); }, true);
}

IntensityRecord load_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read intensity file " + path);
  return io::read_intensity_csv(in);
}

CoherenceMatrix load_rho(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read coherence matrix file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("coherence matrix file is not valid JSON: " + std::string(e.what()));
  }
  return io::coherence_from_json(j);
}

void execute(const std::string& verb, const Options& opt) {
  ScenarioConfig cfg = run_stage("config", [&] { return load_config(opt.config); });
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.noise.seed = *opt.seed;
  }
  Scenario sc = run_stage("config", [&] { return Scenario(cfg); });
  ArtifactSet out(opt.out);
  Report report = new_report(verb, cfg);

  const bool all = verb == "run";
  std::optional<IntensityRecord> rec;
  auto record = [&]() -> const IntensityRecord& {
    if (!rec) {
      if (!opt.data.empty()) rec = run_stage("config", [&] { return load_record(opt.data); });
      else rec = sc.simulate();
    }
    return *rec;
  };

  if (verb == "simulate" || all) {
    const IntensityRecord& r = record();
    report["simulation"] = simulation_section(r, cfg);
    write_record(out, r);
  }

  std::optional<SvdAnalysis> svd;
  if (verb == "analyze-svd" || verb == "reconstruct" || all) {
    svd = sc.analyze();
    report["svd"] = svd_section(*svd, cfg.basis.dim());
    if (verb != "reconstruct")
      out.write("spectrum.csv", [&](std::ostream& os) { io::write_spectrum_csv(os, svd->spectrum); });
  }

  std::optional<CoherenceMatrix> estimate;
  if (verb == "reconstruct" || verb == "compare" || all) {
    const IntensityRecord& r = record();
    const bool ml = cfg.reconstruction.ml || verb == "compare";
    if (ml) {
      const ReconstructionResult res = sc.reconstruct_ml(r);
      report["reconstruction"]["ml"] = ml_section(res);
      write_rho(out, "rho_ml", res.rho_hat);
      estimate = res.rho_hat;
    }
    if (cfg.reconstruction.linear && verb != "compare") {
      if (!svd) svd = sc.analyze();
      const LinearReconstruction lin = sc.reconstruct_linear(r, *svd);
      report["reconstruction"]["linear"] = linear_section(lin, sc.truth());
      write_rho(out, "rho_linear", lin.rho);
      if (!estimate) estimate = lin.rho;
    }
  }

  if (verb == "propagate") {
    const CoherenceMatrix rho = opt.rho.empty() ? sc.truth() : run_stage("config", [&] { return load_rho(opt.rho); });
    if (!(rho.basis() == cfg.basis))
      throw StageError("propagate", "ConfigError", "coherence matrix basis differs from the config basis", true);
    const IntensityMap m = sc.propagate(rho.rho());
    report["far_field"] = {{"total_power", m.total_power()},
                           {"source", opt.rho.empty() ? "config_state" : opt.rho}};
    write_map(out, "far_field", m);
  }

  if (verb == "compare" || (all && cfg.plane && cfg.sensor.dimension == Dimension::Two && estimate)) {
    const FarFieldComparison c = sc.compare(record(), *estimate);
    report["far_field"] = far_field_section(c);
    write_map(out, "far_field_direct", c.direct);
    write_map(out, "far_field_tomographic", c.tomographic);
    write_map(out, "far_field_standard", c.standard);
  }

  if (opt.format == "csv") {
    out.write("report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
    write_report_csv(std::cout, report);
  } else {
    out.write("report.json", [&](std::ostream& os) { os << report.dump(2) << '\n'; });
    std::cout << report.dump(2) << '\n';
  }
  out.commit();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shack-Hartmann coherence tomography"};
  app.require_subcommand(1);
  Options opt;
  const char* verbs[][2] = {
      {"simulate", "simulate sensor intensities for the configured state"},
      {"reconstruct", "estimate the coherence matrix from simulated or measured intensities"},
      {"analyze-svd", "singular spectrum and unobservable directions of the sensor"},
      {"propagate", "far-field intensity of the configured (or a given) coherence matrix"},
      {"compare", "tomographic versus standard-wavefront far-field predictions"},
      {"run", "full pipeline"},
  };
  for (const auto& v : verbs) {
    CLI::App* sub = app.add_subcommand(v[0], v[1]);
    sub->add_option("--config", opt.config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "override the config seed");
    sub->add_option("--format", opt.format, "report format")->check(CLI::IsMember({"json", "csv"}));
    if (std::string(v[0]) == "reconstruct" || std::string(v[0]) == "compare")
      sub->add_option("--data", opt.data, "intensity CSV (lens,pixel_u,pixel_v,value)")->check(CLI::ExistingFile);
    if (std::string(v[0]) == "propagate")
      sub->add_option("--rho", opt.rho, "coherence matrix JSON")->check(CLI::ExistingFile);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("arguments", "UsageError", e.what(), kExitConfig);
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    execute(verb, opt);
  } catch (const StageError& e) {
    return report_error(e.stage(), e.kind(), e.what(), e.is_config_error() ? kExitConfig : kExitNumeric);
  } catch (const ConfigError& e) {
    return report_error("config", e.kind(), e.what(), kExitConfig);
  } catch (const Error& e) {
    return report_error("output", e.kind(), e.what(), kExitNumeric);
  } catch (const std::exception& e) {
    return report_error("output", "InternalError", e.what(), kExitNumeric);
  }
  return kExitOk;
}
