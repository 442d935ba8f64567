// qlab: declarative experiment driver for the wave-packet laboratory.
//
// Every experiment is a subcommand with a built-in default configuration;
// --config overlays a JSON file (which may itself include another), and
// --seed / --out / --emit-plots override the most common fields directly.

#include <CLI11.hpp>
#include <iostream>

#include "qlab/experiments.hpp"

using namespace qlab;

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool emit_plots = false;
  bool validate_only = false;
};

ExperimentConfig default_config_for(const std::string& kind) {
  ExperimentConfig cfg;
  cfg.experiment = kind;
  if (kind == "born-trials" || kind == "detection-force") {
    cfg.grid = GridConfig{3, 64, {0.25, 0.25, 0.25}, {0.0, 0.0, 0.0}};
    cfg.packet.profile = "shell";
    cfg.packet.k_mag = 4.0;
    cfg.packet.delta_k = 0.2;
    cfg.measurement.binning = "wedges";
    if (kind == "detection-force") cfg.measurement.refinement.clear();
  } else if (kind == "evolve-kg") {
    cfg.grid = GridConfig{1, 512, {0.05, 0.05, 0.05}, {0.0, 0.0, 0.0}};
    cfg.packet.k0 = {0.3, 0.0, 0.0};
    cfg.packet.delta_k = 0.1;
    cfg.potential.preset = "harmonic";
    cfg.potential.omega = 0.05;
  } else if (kind == "evolve-schrodinger") {
    cfg.grid = GridConfig{1, 1024, {0.02, 0.02, 0.02}, {0.0, 0.0, 0.0}};
    cfg.packet.k0 = {0.0, 0.0, 0.0};
    cfg.packet.delta_k = 0.1;
    cfg.packet.x0 = {12.0, 0.0, 0.0};
    cfg.potential.preset = "harmonic";
    cfg.potential.omega = 0.25;
    cfg.solver.dt = 0.02;
  } else {
    cfg.grid = GridConfig{1, 512, {0.02, 0.02, 0.02}, {0.0, 0.0, 0.0}};
    cfg.packet.k0 = {0.3, 0.0, 0.0};
    cfg.packet.delta_k = 0.06;
  }
  return cfg;
}

int run_kind(const std::string& kind, const CliOptions& opt) {
  try {
    ExperimentConfig cfg;
    if (!opt.config_path.empty()) {
      json overlay = load_config_json(opt.config_path);
      json base = default_config_for(kind);
      cfg = merge_json(base, overlay).get<ExperimentConfig>();
    } else {
      cfg = default_config_for(kind);
    }
    cfg.experiment = kind;
    if (opt.seed_set) cfg.measurement.seed = opt.seed;
    if (!opt.out_dir.empty()) cfg.output.dir = opt.out_dir;
    if (opt.emit_plots) cfg.output.emit_plots = true;

    std::vector<Diagnostic> diags = validate(cfg);
    if (opt.validate_only) {
      json out = json::array();
      for (const auto& d : diags) out.push_back(json{{"field", d.field}, {"message", d.message}});
      std::cout << out.dump(2) << "\n";
      return diags.empty() ? 0 : 2;
    }
    if (!diags.empty()) {
      json out = json::array();
      for (const auto& d : diags) out.push_back(json{{"field", d.field}, {"message", d.message}});
      std::cerr << json{{"error", {{"code", "ConfigInvalid"}, {"diagnostics", out}}}}.dump(2)
                << "\n";
      return 2;
    }

    json record = run_experiment(cfg);
    std::cout << record["results"].dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    json err{{"error", {{"code", error_name(e.code())}, {"message", e.what()}}}};
    std::cerr << err.dump(2) << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"code", "Internal"}, {"message", e.what()}}}}.dump(2)
              << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wave-packet laboratory: packets, gauge audits, wave/low-energy evolution, "
               "detector statistics"};
  app.require_subcommand(1);

  CliOptions opt;
  app.add_option("--config", opt.config_path, "JSON config overlay (supports \"include\")")
      ->check(CLI::ExistingFile);
  app.add_option("--out", opt.out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", opt.seed, "override the trial seed");
  app.add_flag("--emit-plots", opt.emit_plots, "write companion plot scripts");
  app.add_flag("--validate-only", opt.validate_only,
               "print diagnostics for the resolved config and exit");

  static const std::vector<std::pair<std::string, std::string>> kinds = {
      {"packet-info", "construct a packet and report its conserved functionals"},
      {"evolve-free", "exact spectral free evolution with conservation series"},
      {"evolve-kg", "leapfrog wave evolution with a scalar potential"},
      {"evolve-schrodinger", "split-step low-energy evolution"},
      {"compare-low-energy", "wave vs low-energy discrepancy, single run or v/c sweep"},
      {"gauge-audit", "gauge covariance, curvature and current-identity residuals"},
      {"born-trials", "detector-array Monte Carlo with chi-squared gate"},
      {"detection-force", "momentum balance statistics of detections"},
      {"full-suite", "every experiment with default settings"},
  };
  for (const auto& [name, desc] : kinds) app.add_subcommand(name, desc)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  opt.seed_set = seed_opt->count() > 0;

  for (const auto& [name, desc] : kinds)
    if (app.got_subcommand(name)) return run_kind(name, opt);
  return 1;
}
