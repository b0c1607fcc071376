#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdc/rates.hpp"

namespace spdc {

inline constexpr const char* kToolVersion = "0.1.0";

struct FilterSpec {
  std::string arm = "both";  // signal | idler | both
  std::string kind;          // top-hat | long-pass | short-pass | tabulated
  double center_nm = 0.0;
  double width_nm = 0.0;
  double edge_nm = 0.0;
  double peak = 1.0;
  std::vector<std::pair<double, double>> table_nm;  // (lambda_nm, T)
};

struct SweepSpec {
  std::string param;  // filter-width | waist-scale | pump-waist-um
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;
};

/// Resolved run configuration; vacuum wavelengths in nm, waists in um.
struct ScenarioConfig {
  std::string preset = "noncollinear-degenerate";
  std::string crystal_file;  // empty: default BiBO data file
  std::optional<double> theta_p_deg;
  std::optional<double> exterior_angle_deg;
  double lambda_p_nm = 355.0;
  std::optional<double> lambda_s_nm;  // defaulted per preset
  double waists_um[3] = {250.0, 100.0, 100.0};  // pump, signal, idler
  double pump_power_mw = 1.0;
  double eta_signal = 1.0;
  double eta_idler = 1.0;
  double crystal_length_um = 600.0;
  double d_eff_pm_v = 2.8;
  int mode_truncation = 10;
  int grid_points = 2001;
  std::vector<FilterSpec> filters;
  std::optional<SweepSpec> sweep;
  std::string out_dir = "out";
  std::string format = "csv";  // csv | json
  int jobs = 1;

  std::string to_json() const;
  static ScenarioConfig from_json_text(const std::string& text, const std::string& origin);
  /// FNV-1a hash of the canonical JSON form, as hex.
  std::string hash() const;
};

/// Parses and validates a JSON config file, applying preset defaults.
ScenarioConfig load_config(const std::string& path);

/// Validation + preset defaults on an in-memory config (flag overrides applied
/// by the caller first).
void finalize_config(ScenarioConfig& cfg);

struct EmittedFile {
  std::string path;
  std::string checksum;  // fnv1a64 hex of the file bytes
};

struct RunReport {
  ScenarioConfig config;
  Geometry geometry;
  RateReport rates;
  std::vector<EmittedFile> manifest;
  std::string tool_version;
  std::string dispersion_checksum;  // hex
  std::string config_hash;
  std::string report_json() const;
};

/// Builds the source (dispersion, geometry solve, beams) from a config.
SourceSetup build_setup(const ScenarioConfig& cfg, DispersionSet& dispersion_storage);

/// Resolves per-arm filters from the config specs.
std::pair<SpectralFilter, SpectralFilter> resolve_filters(const ScenarioConfig& cfg,
                                                          const Geometry& g);

/// Solves the scenario, computes rates and spectra, writes the output files
/// (spectra + report) under cfg.out_dir and returns the report.
RunReport run_scenario(const ScenarioConfig& cfg);

struct SweepRow {
  double param = 0.0;
  double joint_rate = 0.0;
  double singles_signal = 0.0;
  double singles_idler = 0.0;
  double heralding = 0.0;
  bool ok = false;
  std::string error;  // set when ok is false
};

/// Evaluates the sweep concurrently (cfg.jobs workers) and writes the table.
std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg);

/// Writes a spectral curve / sweep table in the configured format; returns the
/// emitted file entry.
EmittedFile emit_curve(const SpectralCurve& curve, const std::string& format,
                       const std::string& path);
EmittedFile emit_sweep(const std::vector<SweepRow>& rows, const std::string& format,
                       const std::string& path);

std::string default_dispersion_path();

}  // namespace spdc
