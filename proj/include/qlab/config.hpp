#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qlab/constants.hpp"
#include "qlab/errors.hpp"
#include "qlab/evolution.hpp"
#include "qlab/gauge.hpp"
#include "qlab/grid.hpp"
#include "qlab/measurement.hpp"
#include "qlab/packet.hpp"

namespace qlab {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

struct GridConfig {
  int dim = 1;
  int points = 1024;
  std::array<double, 3> k_spacing{0.01, 0.01, 0.01};
  std::array<double, 3> k_offset{0.0, 0.0, 0.0};

  KGrid build() const { return KGrid(dim, points, k_spacing, k_offset); }
};

struct AngularWeightConfig {
  std::string kind = "uniform";  // uniform | linear | hemisphere
  int axis = 2;
  double coeff = 0.0;

  std::function<double(std::array<double, 3>)> build() const {
    if (kind == "uniform") return [](std::array<double, 3>) { return 1.0; };
    if (kind == "linear") {
      int a = axis;
      double c = coeff;
      return [a, c](std::array<double, 3> khat) { return 1.0 + c * khat[a]; };
    }
    if (kind == "hemisphere") {
      int a = axis;
      return [a](std::array<double, 3> khat) { return khat[a] >= 0.0 ? 1.0 : 0.0; };
    }
    throw Error(ErrorCode::ConfigInvalid, "packet.angular_weight.kind: " + kind);
  }
};

struct PacketConfig {
  std::string profile = "gaussian";  // gaussian | shell
  std::array<double, 3> k0{0.5, 0.0, 0.0};
  double delta_k = 0.05;
  double k_mag = 4.0;
  AngularWeightConfig angular_weight;
  std::array<double, 3> x0{0.0, 0.0, 0.0};

  MomentumPacket build(const KGrid& grid, const PhysicalConstants& pc,
                       double* sigma_out = nullptr) const {
    cvec raw;
    if (profile == "gaussian")
      raw = gaussian_amplitude(grid, k0, delta_k);
    else if (profile == "shell")
      raw = shell_amplitude(grid, k_mag, delta_k, angular_weight.build());
    else
      throw Error(ErrorCode::ConfigInvalid, "packet.profile: " + profile);
    MomentumPacket p = MomentumPacket::normalize(grid, std::move(raw), pc, sigma_out);
    if (x0[0] != 0.0 || x0[1] != 0.0 || x0[2] != 0.0) return p.translated(x0);
    return p;
  }
};

struct PotentialConfig {
  std::string preset = "zero";  // zero | uniform-e | uniform-b | uniform-a | harmonic | file
  std::array<double, 3> field{0.0, 0.0, 0.0};  // E or B or A components
  double omega = 0.1;                          // harmonic frequency
  std::string file;                            // columnar node values

  EMPotential build(const KGrid& grid, const PhysicalConstants& pc) const {
    if (preset == "zero") return EMPotential::zero(grid);
    if (preset == "uniform-e") return EMPotential::uniform_e(grid, field);
    if (preset == "uniform-b") return EMPotential::uniform_b(grid, field);
    if (preset == "uniform-a") return EMPotential::uniform_a(grid, field);
    if (preset == "harmonic") return EMPotential::harmonic(grid, omega, pc);
    if (preset == "file") return load_file(grid);
    throw Error(ErrorCode::ConfigInvalid, "potential.preset: " + preset);
  }

  EMPotential load_file(const KGrid& grid) const {
    std::ifstream in(file);
    if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open potential file " + file);
    std::vector<double> phi;
    std::array<std::vector<double>, 3> A;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ss(line);
      double v = 0.0;
      ss >> v;
      phi.push_back(v);
      for (int a = 0; a < grid.dim(); ++a) {
        double w = 0.0;
        ss >> w;
        A[a].push_back(w);
      }
    }
    for (int a = 0; a < grid.dim(); ++a)
      if (A[a].size() != grid.size())
        throw Error(ErrorCode::ConfigInvalid, "potential file row count mismatch");
    return EMPotential(grid, std::move(phi), std::move(A));
  }
};

struct SolverConfig {
  double dt = 0.0;       // 0 selects the module default
  long steps = 1000;
  double horizon = 0.0;  // 0 derives a horizon from the packet where needed
  int samples = 32;
};

struct MeasurementConfig {
  int bins = 8;
  std::string binning = "wedges";  // wedges | bands | intervals
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  long trials = 100000;
  std::uint64_t seed = 42;
  bool stream_trials = false;
  std::vector<int> refinement{8, 16, 32};

  DetectorArray build(const KGrid& grid, const PacketConfig& packet) const {
    if (binning == "wedges") return DetectorArray::wedges(bins);
    if (binning == "bands") return DetectorArray::bands(bins);
    if (binning == "intervals") {
      double lo = interval_lo, hi = interval_hi;
      if (lo == 0.0 && hi == 0.0) {
        lo = packet.k0[0] - 6.0 * packet.delta_k;
        hi = packet.k0[0] + 6.0 * packet.delta_k;
      }
      (void)grid;
      return DetectorArray::equal_intervals(lo, hi, bins);
    }
    throw Error(ErrorCode::ConfigInvalid, "measurement.binning: " + binning);
  }
};

struct CompareConfig {
  std::vector<double> v_over_c{0.01, 0.03, 0.1};
  double travel_widths = 10.0;
};

struct OutputConfig {
  std::string dir = "out";
  bool emit_plots = false;
  bool export_amplitudes = false;
  bool series = true;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string experiment = "packet-info";
  PhysicalConstants constants;
  GridConfig grid;
  PacketConfig packet;
  PotentialConfig potential;
  SolverConfig solver;
  MeasurementConfig measurement;
  CompareConfig compare;
  OutputConfig output;
};

// --- json round-trip ---------------------------------------------------------

inline void to_json(json& j, const PhysicalConstants& c) {
  j = json{{"hbar", c.hbar}, {"c", c.c}, {"m", c.m}, {"q", c.q}};
}
inline void from_json(const json& j, PhysicalConstants& c) {
  c.hbar = j.value("hbar", 1.0);
  c.c = j.value("c", 1.0);
  c.m = j.value("m", 1.0);
  c.q = j.value("q", -1.0);
}

namespace detail {
template <typename T, std::size_t N>
std::array<T, N> array_from(const json& j, const char* key, std::array<T, N> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  std::array<T, N> out = fallback;
  if (v.is_number()) {
    out.fill(v.get<T>());
    return out;
  }
  if (v.size() == 1) {  // a single entry broadcasts to every axis
    out.fill(v[0].get<T>());
    return out;
  }
  for (std::size_t i = 0; i < std::min(N, v.size()); ++i) out[i] = v[i].get<T>();
  return out;
}
}  // namespace detail

inline void to_json(json& j, const GridConfig& g) {
  j = json{{"dim", g.dim},
           {"points", g.points},
           {"k_spacing", g.k_spacing},
           {"k_offset", g.k_offset}};
}
inline void from_json(const json& j, GridConfig& g) {
  g.dim = j.value("dim", 1);
  g.points = j.value("points", 1024);
  g.k_spacing = detail::array_from<double, 3>(j, "k_spacing", {0.01, 0.01, 0.01});
  g.k_offset = detail::array_from<double, 3>(j, "k_offset", {0.0, 0.0, 0.0});
}

inline void to_json(json& j, const AngularWeightConfig& w) {
  j = json{{"kind", w.kind}, {"axis", w.axis}, {"coeff", w.coeff}};
}
inline void from_json(const json& j, AngularWeightConfig& w) {
  w.kind = j.value("kind", std::string("uniform"));
  w.axis = j.value("axis", 2);
  w.coeff = j.value("coeff", 0.0);
}

inline void to_json(json& j, const PacketConfig& p) {
  j = json{{"profile", p.profile}, {"k0", p.k0},
           {"delta_k", p.delta_k}, {"k_mag", p.k_mag},
           {"angular_weight", p.angular_weight}, {"x0", p.x0}};
}
inline void from_json(const json& j, PacketConfig& p) {
  p.profile = j.value("profile", std::string("gaussian"));
  p.k0 = detail::array_from<double, 3>(j, "k0", {0.5, 0.0, 0.0});
  p.delta_k = j.value("delta_k", 0.05);
  p.k_mag = j.value("k_mag", 4.0);
  if (j.contains("angular_weight")) p.angular_weight = j.at("angular_weight");
  p.x0 = detail::array_from<double, 3>(j, "x0", {0.0, 0.0, 0.0});
}

inline void to_json(json& j, const PotentialConfig& p) {
  j = json{{"preset", p.preset}, {"field", p.field}, {"omega", p.omega}, {"file", p.file}};
}
inline void from_json(const json& j, PotentialConfig& p) {
  p.preset = j.value("preset", std::string("zero"));
  p.field = detail::array_from<double, 3>(j, "field", {0.0, 0.0, 0.0});
  p.omega = j.value("omega", 0.1);
  p.file = j.value("file", std::string());
}

inline void to_json(json& j, const SolverConfig& s) {
  j = json{{"dt", s.dt}, {"steps", s.steps}, {"horizon", s.horizon}, {"samples", s.samples}};
}
inline void from_json(const json& j, SolverConfig& s) {
  s.dt = j.value("dt", 0.0);
  s.steps = j.value("steps", 1000L);
  s.horizon = j.value("horizon", 0.0);
  s.samples = j.value("samples", 32);
}

inline void to_json(json& j, const MeasurementConfig& m) {
  j = json{{"bins", m.bins},       {"binning", m.binning},
           {"interval_lo", m.interval_lo}, {"interval_hi", m.interval_hi},
           {"trials", m.trials},   {"seed", m.seed},
           {"stream_trials", m.stream_trials}, {"refinement", m.refinement}};
}
inline void from_json(const json& j, MeasurementConfig& m) {
  m.bins = j.value("bins", 8);
  m.binning = j.value("binning", std::string("wedges"));
  m.interval_lo = j.value("interval_lo", 0.0);
  m.interval_hi = j.value("interval_hi", 0.0);
  m.trials = j.value("trials", 100000L);
  m.seed = j.value("seed", std::uint64_t{42});
  m.stream_trials = j.value("stream_trials", false);
  m.refinement = j.value("refinement", std::vector<int>{8, 16, 32});
}

inline void to_json(json& j, const CompareConfig& c) {
  j = json{{"v_over_c", c.v_over_c}, {"travel_widths", c.travel_widths}};
}
inline void from_json(const json& j, CompareConfig& c) {
  c.v_over_c = j.value("v_over_c", std::vector<double>{0.01, 0.03, 0.1});
  c.travel_widths = j.value("travel_widths", 10.0);
}

inline void to_json(json& j, const OutputConfig& o) {
  j = json{{"dir", o.dir},
           {"emit_plots", o.emit_plots},
           {"export_amplitudes", o.export_amplitudes},
           {"series", o.series}};
}
inline void from_json(const json& j, OutputConfig& o) {
  o.dir = j.value("dir", std::string("out"));
  o.emit_plots = j.value("emit_plots", false);
  o.export_amplitudes = j.value("export_amplitudes", false);
  o.series = j.value("series", true);
}

inline void to_json(json& j, const ExperimentConfig& c) {
  j = json{{"schema_version", c.schema_version},
           {"experiment", c.experiment},
           {"constants", c.constants},
           {"grid", c.grid},
           {"packet", c.packet},
           {"potential", c.potential},
           {"solver", c.solver},
           {"measurement", c.measurement},
           {"compare", c.compare},
           {"output", c.output}};
}
inline void from_json(const json& j, ExperimentConfig& c) {
  c.schema_version = j.value("schema_version", kSchemaVersion);
  c.experiment = j.value("experiment", std::string("packet-info"));
  if (j.contains("constants")) c.constants = j.at("constants");
  if (j.contains("grid")) c.grid = j.at("grid");
  if (j.contains("packet")) c.packet = j.at("packet");
  if (j.contains("potential")) c.potential = j.at("potential");
  if (j.contains("solver")) c.solver = j.at("solver");
  if (j.contains("measurement")) c.measurement = j.at("measurement");
  if (j.contains("compare")) c.compare = j.at("compare");
  if (j.contains("output")) c.output = j.at("output");
}

// --- file loading with include composition -----------------------------------

/// Recursive overlay merge: values in `over` win; objects merge key-wise.
inline json merge_json(json base, const json& over) {
  if (!base.is_object() || !over.is_object()) return over;
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (base.contains(it.key()))
      base[it.key()] = merge_json(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
  return base;
}

/// Load a config file; an "include" key pulls in another file (relative to the
/// including file) as the base layer.
inline json load_config_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigInvalid, "cannot open config " + path.string());
  json j = json::parse(in, nullptr, true, true);  // allow comments
  if (j.contains("include")) {
    std::filesystem::path inc = j.at("include").get<std::string>();
    if (inc.is_relative()) inc = path.parent_path() / inc;
    json base = load_config_json(inc);
    j.erase("include");
    j = merge_json(base, j);
  }
  return j;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  json j = load_config_json(path);
  ExperimentConfig cfg = j.get<ExperimentConfig>();
  if (cfg.schema_version != kSchemaVersion)
    throw Error(ErrorCode::ConfigInvalid, "unsupported schema_version");
  return cfg;
}

// --- validation ---------------------------------------------------------------

struct Diagnostic {
  std::string field;
  std::string message;
};

/// Collect every violation the config would hit, without running anything.
inline std::vector<Diagnostic> validate(const ExperimentConfig& cfg) {
  std::vector<Diagnostic> out;
  auto add = [&](const std::string& f, const std::string& m) { out.push_back({f, m}); };

  static const std::vector<std::string> kinds{
      "packet-info",     "evolve-free",     "evolve-kg",
      "evolve-schrodinger", "compare-low-energy", "gauge-audit",
      "born-trials",     "detection-force", "full-suite"};
  bool known = false;
  for (const auto& k : kinds) known = known || k == cfg.experiment;
  if (!known) add("experiment", "unknown experiment kind: " + cfg.experiment);

  try {
    cfg.constants.validate();
  } catch (const Error& e) {
    add("constants", e.what());
  }

  std::optional<KGrid> grid;
  try {
    grid = cfg.grid.build();
  } catch (const Error& e) {
    add("grid", e.what());
  }
  if (!grid) return out;

  try {
    cfg.packet.build(*grid, cfg.constants);
  } catch (const Error& e) {
    add("packet", e.what());
  }

  try {
    cfg.potential.build(*grid, cfg.constants);
  } catch (const Error& e) {
    add("potential", e.what());
  }

  if (cfg.experiment == "evolve-kg" && cfg.solver.dt > 0.0) {
    double bound = kg_stability_dt_max(*grid, cfg.constants);
    if (cfg.solver.dt > bound)
      add("solver.dt", "UnstableStep: dt exceeds the stability bound 0.5/omega_max = " +
                           std::to_string(bound));
  }
  if (cfg.experiment == "compare-low-energy") {
    for (double beta : cfg.compare.v_over_c)
      if (beta > 0.3)
        add("compare.v_over_c", "TooRelativistic: v/c = " + std::to_string(beta) +
                                    " exceeds the 0.3 gate");
    if (cfg.compare.v_over_c.empty()) {
      double beta = cfg.constants.hbar *
                    std::abs(cfg.packet.k0[0]) / (cfg.constants.m * cfg.constants.c);
      if (beta > 0.3) add("packet.k0", "TooRelativistic: hbar |k0| / (m c) exceeds 0.3");
    }
  }
  if (cfg.experiment == "born-trials" || cfg.experiment == "detection-force") {
    if (cfg.measurement.bins < 1) add("measurement.bins", "need at least one bin");
    if (cfg.measurement.trials < 1) add("measurement.trials", "need at least one trial");
    if (cfg.grid.dim == 3 && cfg.measurement.binning == "intervals")
      add("measurement.binning", "interval bins are 1D");
    if (cfg.grid.dim == 1 && cfg.measurement.binning != "intervals")
      add("measurement.binning", "wedges/bands need a 3D grid");
  }
  return out;
}

}  // namespace qlab
