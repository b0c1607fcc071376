#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/scenario.hpp"

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// top-hat:CENTER_NM:WIDTH_NM[:PEAK], long-pass:EDGE_NM, short-pass:EDGE_NM,
// optionally suffixed with @signal or @idler (default: both arms).
spdc::FilterSpec parse_filter(std::string text) {
  spdc::FilterSpec f;
  const auto at = text.find('@');
  if (at != std::string::npos) {
    f.arm = text.substr(at + 1);
    text.erase(at);
  }
  const auto parts = split(text, ':');
  f.kind = parts[0];
  try {
    if (f.kind == "top-hat") {
      if (parts.size() < 3) throw spdc::ConfigError("top-hat filter needs CENTER_NM:WIDTH_NM");
      f.center_nm = std::stod(parts[1]);
      f.width_nm = std::stod(parts[2]);
      if (parts.size() > 3) f.peak = std::stod(parts[3]);
    } else if (f.kind == "long-pass" || f.kind == "short-pass") {
      if (parts.size() < 2) throw spdc::ConfigError(f.kind + " filter needs EDGE_NM");
      f.edge_nm = std::stod(parts[1]);
      if (parts.size() > 2) f.peak = std::stod(parts[2]);
    } else {
      throw spdc::ConfigError("unknown filter kind: " + f.kind);
    }
  } catch (const std::invalid_argument&) {
    throw spdc::ConfigError("cannot parse filter spec: " + text);
  }
  return f;
}

spdc::SweepSpec parse_sweep(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 4) throw spdc::ConfigError("sweep spec must be PARAM:START:STOP:STEPS");
  spdc::SweepSpec s;
  s.param = parts[0];
  try {
    s.start = std::stod(parts[1]);
    s.stop = std::stod(parts[2]);
    s.steps = std::stoi(parts[3]);
  } catch (const std::invalid_argument&) {
    throw spdc::ConfigError("cannot parse sweep spec: " + text);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Joint and singles spectral rates, total biphoton rate and heralding\n"
      "efficiency for type-I SPDC from a thin crystal into Gaussian target modes."};

  std::string config_path, preset, waists, out_dir, format, crystal_file;
  std::vector<std::string> filter_specs;
  std::string sweep_spec;
  double theta_p_deg = 0.0, exterior_deg = 0.0, power_mw = 0.0, lambda_s_nm = 0.0;
  int truncation = -1, jobs = 0, grid_points = 0;
  bool show_version = false;

  app.add_option("--config", config_path, "JSON scenario configuration file");
  app.add_option("--preset", preset,
                 "collinear-degenerate | noncollinear-degenerate | "
                 "collinear-nondegenerate | noncollinear-nondegenerate");
  auto* tp = app.add_option("--theta-p-deg", theta_p_deg, "crystal tilt, degrees");
  auto* ea = app.add_option("--exterior-angle-deg", exterior_deg,
                            "target exterior signal angle, degrees");
  app.add_option("--waists-um", waists, "pump,signal,idler 1/e field radii in um (P,S,I)");
  app.add_option("--filter", filter_specs,
                 "top-hat:CENTER_NM:WIDTH_NM | long-pass:EDGE_NM | short-pass:EDGE_NM, "
                 "optional @signal/@idler suffix; repeatable");
  app.add_option("--sweep", sweep_spec, "PARAM:START:STOP:STEPS with PARAM one of "
                                        "filter-width, waist-scale, pump-waist-um");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--format", format, "csv | json");
  app.add_option("--mode-truncation", truncation, "companion mode sum truncation N");
  auto* ls = app.add_option("--lambda-s-nm", lambda_s_nm, "signal carrier wavelength, nm");
  auto* pw = app.add_option("--pump-power-mw", power_mw, "average pump power, mW");
  app.add_option("--grid-points", grid_points, "spectral grid density");
  app.add_option("--jobs", jobs, "concurrent sweep evaluations");
  app.add_option("--crystal-file", crystal_file, "dispersion data file");
  app.add_flag("--version", show_version, "print tool version and data checksums");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (show_version) {
      std::cout << "spdc " << spdc::kToolVersion << "\n";
      const std::string path =
          crystal_file.empty() ? spdc::default_dispersion_path() : crystal_file;
      const auto d = spdc::DispersionSet::from_file(path);
      char buf[17];
      std::snprintf(buf, sizeof buf, "%016llx",
                    static_cast<unsigned long long>(d.checksum()));
      std::cout << "dispersion " << d.material() << " " << buf << " (" << path << ")\n";
      return 0;
    }

    spdc::ScenarioConfig cfg;
    if (!config_path.empty()) cfg = spdc::load_config(config_path);

    // flags win over the config file
    if (!preset.empty()) cfg.preset = preset;
    if (!crystal_file.empty()) cfg.crystal_file = crystal_file;
    if (tp->count()) cfg.theta_p_deg = theta_p_deg;
    if (ea->count()) cfg.exterior_angle_deg = exterior_deg;
    if (ls->count()) cfg.lambda_s_nm = lambda_s_nm;
    if (pw->count()) cfg.pump_power_mw = power_mw;
    if (!waists.empty()) {
      const auto parts = split(waists, ',');
      if (parts.size() != 3) throw spdc::ConfigError("--waists-um needs P,S,I");
      for (int i = 0; i < 3; ++i) cfg.waists_um[i] = std::stod(parts[i]);
    }
    for (const auto& fspec : filter_specs) cfg.filters.push_back(parse_filter(fspec));
    if (!sweep_spec.empty()) cfg.sweep = parse_sweep(sweep_spec);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!format.empty()) cfg.format = format;
    if (truncation >= 0) cfg.mode_truncation = truncation;
    if (grid_points > 0) cfg.grid_points = grid_points;
    if (jobs > 0) cfg.jobs = jobs;
    spdc::finalize_config(cfg);

    if (cfg.sweep) {
      const auto rows = spdc::run_sweep(cfg);
      const std::string ext = cfg.format == "csv" ? ".csv" : ".json";
      const auto file = spdc::emit_sweep(
          rows, cfg.format,
          (std::filesystem::path(cfg.out_dir) / ("sweep" + ext)).string());
      std::cout << "wrote " << file.path << " (" << file.checksum << ")\n";
      int failures = 0;
      for (const auto& r : rows) {
        if (!r.ok) {
          ++failures;
          std::cerr << "sweep point " << r.param << " failed: " << r.error << "\n";
        }
      }
      return failures == 0 ? 0 : 3;
    }

    const auto report = spdc::run_scenario(cfg);
    for (const auto& f : report.manifest)
      std::cout << "wrote " << f.path << " (" << f.checksum << ")\n";
    std::cout << "theta_p " << spdc::rad_to_deg(report.geometry.theta_p) << " deg, R "
              << report.rates.joint_rate << " Hz, Rs " << report.rates.singles_rate_signal
              << " Hz, Ri " << report.rates.singles_rate_idler << " Hz, eta "
              << report.rates.heralding << "\n";
    return 0;
  } catch (const spdc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const spdc::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const spdc::QuadratureError& e) {
    std::cerr << "quadrature error: " << e.what() << " (last estimate " << e.last_estimate
              << ", bound " << e.last_error_bound << ")\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
