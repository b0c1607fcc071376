#include "spdc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

Preset preset_from_name(const std::string& name) {
  if (name == "collinear-degenerate") return Preset::collinear_degenerate;
  if (name == "noncollinear-degenerate") return Preset::noncollinear_degenerate;
  if (name == "collinear-nondegenerate") return Preset::collinear_nondegenerate;
  if (name == "noncollinear-nondegenerate") return Preset::noncollinear_nondegenerate;
  throw ConfigError("unknown preset: " + name);
}

bool is_noncollinear(const std::string& name) {
  return name == "noncollinear-degenerate" || name == "noncollinear-nondegenerate";
}

bool is_degenerate(const std::string& name) {
  return name == "collinear-degenerate" || name == "noncollinear-degenerate";
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

EmittedFile write_file(const std::string& path, const std::string& content) {
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write output file: " + path);
  f << content;
  f.close();
  return {path, hex64(fnv1a64(content.data(), content.size()))};
}

json filter_to_json(const FilterSpec& f) {
  json j;
  j["arm"] = f.arm;
  j["kind"] = f.kind;
  if (f.kind == "top-hat") {
    j["center_nm"] = f.center_nm;
    j["width_nm"] = f.width_nm;
  } else if (f.kind == "long-pass" || f.kind == "short-pass") {
    j["edge_nm"] = f.edge_nm;
  } else if (f.kind == "tabulated") {
    j["table_nm"] = f.table_nm;
  }
  j["peak"] = f.peak;
  return j;
}

FilterSpec filter_from_json(const json& j) {
  FilterSpec f;
  f.arm = j.value("arm", "both");
  f.kind = j.at("kind").get<std::string>();
  f.center_nm = j.value("center_nm", 0.0);
  f.width_nm = j.value("width_nm", 0.0);
  f.edge_nm = j.value("edge_nm", 0.0);
  f.peak = j.value("peak", 1.0);
  if (j.contains("table_nm"))
    f.table_nm = j.at("table_nm").get<std::vector<std::pair<double, double>>>();
  return f;
}

}  // namespace

std::string ScenarioConfig::to_json() const {
  json j;
  j["preset"] = preset;
  j["crystal_file"] = crystal_file;
  if (theta_p_deg) j["theta_p_deg"] = *theta_p_deg;
  if (exterior_angle_deg) j["exterior_angle_deg"] = *exterior_angle_deg;
  j["lambda_p_nm"] = lambda_p_nm;
  if (lambda_s_nm) j["lambda_s_nm"] = *lambda_s_nm;
  j["waists_um"] = {waists_um[0], waists_um[1], waists_um[2]};
  j["pump_power_mw"] = pump_power_mw;
  j["eta_signal"] = eta_signal;
  j["eta_idler"] = eta_idler;
  j["crystal_length_um"] = crystal_length_um;
  j["d_eff_pm_v"] = d_eff_pm_v;
  j["mode_truncation"] = mode_truncation;
  j["grid_points"] = grid_points;
  json jf = json::array();
  for (const auto& f : filters) jf.push_back(filter_to_json(f));
  j["filters"] = jf;
  if (sweep) {
    j["sweep"] = {{"param", sweep->param},
                  {"start", sweep->start},
                  {"stop", sweep->stop},
                  {"steps", sweep->steps}};
  }
  j["out_dir"] = out_dir;
  j["format"] = format;
  j["jobs"] = jobs;
  return j.dump(2);
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text,
                                              const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  ScenarioConfig cfg;
  try {
    cfg.preset = j.value("preset", cfg.preset);
    cfg.crystal_file = j.value("crystal_file", cfg.crystal_file);
    if (j.contains("theta_p_deg")) cfg.theta_p_deg = j.at("theta_p_deg").get<double>();
    if (j.contains("exterior_angle_deg"))
      cfg.exterior_angle_deg = j.at("exterior_angle_deg").get<double>();
    cfg.lambda_p_nm = j.value("lambda_p_nm", cfg.lambda_p_nm);
    if (j.contains("lambda_s_nm")) cfg.lambda_s_nm = j.at("lambda_s_nm").get<double>();
    if (j.contains("waists_um")) {
      const auto w = j.at("waists_um").get<std::vector<double>>();
      if (w.size() != 3) throw ConfigError(origin + ": waists_um needs exactly 3 entries");
      for (int i = 0; i < 3; ++i) cfg.waists_um[i] = w[i];
    }
    cfg.pump_power_mw = j.value("pump_power_mw", cfg.pump_power_mw);
    cfg.eta_signal = j.value("eta_signal", cfg.eta_signal);
    cfg.eta_idler = j.value("eta_idler", cfg.eta_idler);
    cfg.crystal_length_um = j.value("crystal_length_um", cfg.crystal_length_um);
    cfg.d_eff_pm_v = j.value("d_eff_pm_v", cfg.d_eff_pm_v);
    cfg.mode_truncation = j.value("mode_truncation", cfg.mode_truncation);
    cfg.grid_points = j.value("grid_points", cfg.grid_points);
    if (j.contains("filters"))
      for (const auto& fj : j.at("filters")) cfg.filters.push_back(filter_from_json(fj));
    if (j.contains("sweep")) {
      SweepSpec s;
      s.param = j.at("sweep").at("param").get<std::string>();
      s.start = j.at("sweep").at("start").get<double>();
      s.stop = j.at("sweep").at("stop").get<double>();
      s.steps = j.at("sweep").at("steps").get<int>();
      cfg.sweep = s;
    }
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.format = j.value("format", cfg.format);
    cfg.jobs = j.value("jobs", cfg.jobs);
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  return cfg;
}

std::string ScenarioConfig::hash() const {
  const std::string canonical = to_json();
  return hex64(fnv1a64(canonical.data(), canonical.size()));
}

void finalize_config(ScenarioConfig& cfg) {
  preset_from_name(cfg.preset);  // validates the name
  if (!cfg.lambda_s_nm) {
    cfg.lambda_s_nm = is_degenerate(cfg.preset) ? 2.0 * cfg.lambda_p_nm : 850.0;
  }
  if (is_noncollinear(cfg.preset)) {
    if (cfg.theta_p_deg && cfg.exterior_angle_deg)
      throw ConfigError("specify only one of theta_p_deg and exterior_angle_deg");
    if (!cfg.theta_p_deg && !cfg.exterior_angle_deg) {
      if (cfg.preset == "noncollinear-degenerate")
        cfg.exterior_angle_deg = 3.04;
      else
        cfg.theta_p_deg = 142.44;
    }
  } else if (cfg.theta_p_deg || cfg.exterior_angle_deg) {
    throw ConfigError("collinear presets solve theta_p; do not constrain it");
  }
  for (double w : cfg.waists_um)
    if (!(w > 0.0)) throw ConfigError("waists must be positive");
  if (!(cfg.lambda_p_nm > 0.0) || !(*cfg.lambda_s_nm > 0.0))
    throw ConfigError("wavelengths must be positive");
  if (!(cfg.pump_power_mw > 0.0)) throw ConfigError("pump power must be positive");
  if (cfg.eta_signal < 0.0 || cfg.eta_signal > 1.0 || cfg.eta_idler < 0.0 ||
      cfg.eta_idler > 1.0)
    throw ConfigError("path efficiencies must lie in [0,1]");
  if (!(cfg.crystal_length_um > 0.0)) throw ConfigError("crystal length must be positive");
  if (!(cfg.d_eff_pm_v > 0.0)) throw ConfigError("d_eff must be positive");
  if (cfg.mode_truncation < 0) throw ConfigError("mode truncation must be non-negative");
  if (cfg.grid_points < 2) throw ConfigError("grid_points must be at least 2");
  if (cfg.format != "csv" && cfg.format != "json")
    throw ConfigError("format must be csv or json");
  if (cfg.jobs < 1) throw ConfigError("jobs must be at least 1");
  for (const auto& f : cfg.filters) {
    if (f.arm != "signal" && f.arm != "idler" && f.arm != "both")
      throw ConfigError("filter arm must be signal, idler or both");
    if (f.kind != "top-hat" && f.kind != "long-pass" && f.kind != "short-pass" &&
        f.kind != "tabulated")
      throw ConfigError("unknown filter kind: " + f.kind);
    if (f.peak < 0.0 || f.peak > 1.0) throw ConfigError("filter peak must lie in [0,1]");
    if (f.kind == "top-hat" && f.width_nm < 0.0)
      throw ConfigError("filter width must be non-negative");
  }
  if (cfg.sweep) {
    if (cfg.sweep->param != "filter-width" && cfg.sweep->param != "waist-scale" &&
        cfg.sweep->param != "pump-waist-um")
      throw ConfigError("unknown sweep parameter: " + cfg.sweep->param);
    if (cfg.sweep->steps < 1) throw ConfigError("sweep needs at least one step");
  }
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  ScenarioConfig cfg = ScenarioConfig::from_json_text(buf.str(), path);
  finalize_config(cfg);
  return cfg;
}

std::string default_dispersion_path() {
  const fs::path cwd_candidate = fs::path("data") / "bibo.dispersion";
  if (fs::exists(cwd_candidate)) return cwd_candidate.string();
#ifdef SPDC_DATA_DIR
  const fs::path build_candidate = fs::path(SPDC_DATA_DIR) / "bibo.dispersion";
  if (fs::exists(build_candidate)) return build_candidate.string();
#endif
  throw ConfigError("cannot locate bibo.dispersion; pass crystal_file explicitly");
}

SourceSetup build_setup(const ScenarioConfig& cfg, DispersionSet& dispersion_storage) {
  const std::string path =
      cfg.crystal_file.empty() ? default_dispersion_path() : cfg.crystal_file;
  dispersion_storage = DispersionSet::from_file(path);

  SourceSetup s;
  s.crystal.dispersion = &dispersion_storage;
  s.crystal.length = cfg.crystal_length_um * 1e-6;
  s.crystal.d_eff = cfg.d_eff_pm_v * 1e-12;

  GeometryConstraint constraint;
  if (cfg.theta_p_deg) constraint.theta_p = deg_to_rad(*cfg.theta_p_deg);
  if (cfg.exterior_angle_deg) constraint.exterior_angle = deg_to_rad(*cfg.exterior_angle_deg);
  const auto solved =
      solve_geometry(preset_from_name(cfg.preset), s.crystal, cfg.lambda_p_nm * 1e-9,
                     cfg.lambda_s_nm ? std::optional<double>(*cfg.lambda_s_nm * 1e-9)
                                     : std::nullopt,
                     constraint);
  s.geometry = solved.geometry;

  s.beams.waist_pump = cfg.waists_um[0] * 1e-6;
  s.beams.waist_signal = cfg.waists_um[1] * 1e-6;
  s.beams.waist_idler = cfg.waists_um[2] * 1e-6;
  s.beams.pump_power = cfg.pump_power_mw * 1e-3;
  s.beams.eta_signal = cfg.eta_signal;
  s.beams.eta_idler = cfg.eta_idler;
  s.beams.lambda_pump = cfg.lambda_p_nm * 1e-9;
  return s;
}

std::pair<SpectralFilter, SpectralFilter> resolve_filters(const ScenarioConfig& cfg,
                                                          const Geometry& g) {
  auto build = [&](const FilterSpec& f) {
    if (f.kind == "top-hat") {
      const double center = omega_from_wavelength(f.center_nm * 1e-9);
      const double width =
          bandwidth_nm_to_angular(f.center_nm * 1e-9, f.width_nm * 1e-9);
      return SpectralFilter::top_hat(center, width, f.peak);
    }
    if (f.kind == "long-pass")
      return SpectralFilter::long_pass(omega_from_wavelength(f.edge_nm * 1e-9), f.peak);
    if (f.kind == "short-pass")
      return SpectralFilter::short_pass(omega_from_wavelength(f.edge_nm * 1e-9), f.peak);
    std::vector<std::pair<double, double>> table;
    for (const auto& [nm, t] : f.table_nm)
      table.emplace_back(omega_from_wavelength(nm * 1e-9), t);
    std::sort(table.begin(), table.end());
    return SpectralFilter::tabulated(std::move(table));
  };
  (void)g;
  SpectralFilter fs = SpectralFilter::open(), fi = SpectralFilter::open();
  for (const auto& spec : cfg.filters) {
    const auto built = build(spec);
    if (spec.arm == "signal" || spec.arm == "both") {
      if (fs.kind != SpectralFilter::Kind::none)
        throw ConfigError("multiple filters on the signal arm are not supported");
      fs = built;
    }
    if (spec.arm == "idler" || spec.arm == "both") {
      if (fi.kind != SpectralFilter::Kind::none)
        throw ConfigError("multiple filters on the idler arm are not supported");
      fi = built;
    }
  }
  return {fs, fi};
}

EmittedFile emit_curve(const SpectralCurve& curve, const std::string& format,
                       const std::string& path) {
  std::ostringstream out;
  if (format == "csv") {
    out << "omega_rad_s,lambda_nm,joint_density,singles_signal_density,singles_idler_density\n";
    for (std::size_t i = 0; i < curve.omega.size(); ++i) {
      out << format_double(curve.omega[i]) << ','
          << format_double(wavelength_from_omega(curve.omega[i]) * 1e9) << ','
          << format_double(curve.joint[i]) << ',' << format_double(curve.singles_signal[i])
          << ',' << format_double(curve.singles_idler[i]) << '\n';
    }
  } else {
    json j;
    j["config_hash"] = curve.config_hash;
    j["columns"] = {"omega_rad_s", "lambda_nm", "joint_density", "singles_signal_density",
                    "singles_idler_density"};
    json rows = json::array();
    for (std::size_t i = 0; i < curve.omega.size(); ++i) {
      rows.push_back({curve.omega[i], wavelength_from_omega(curve.omega[i]) * 1e9,
                      curve.joint[i], curve.singles_signal[i], curve.singles_idler[i]});
    }
    j["rows"] = rows;
    out << j.dump(2) << '\n';
  }
  return write_file(path, out.str());
}

EmittedFile emit_sweep(const std::vector<SweepRow>& rows, const std::string& format,
                       const std::string& path) {
  std::ostringstream out;
  if (format == "csv") {
    out << "param,R_hz,Rs_hz,Ri_hz,eta\n";
    for (const auto& r : rows) {
      out << format_double(r.param) << ',' << format_double(r.joint_rate) << ','
          << format_double(r.singles_signal) << ',' << format_double(r.singles_idler) << ','
          << format_double(r.heralding) << '\n';
    }
  } else {
    json j;
    j["columns"] = {"param", "R_hz", "Rs_hz", "Ri_hz", "eta"};
    json jr = json::array();
    for (const auto& r : rows) {
      json row = {{"param", r.param},        {"R_hz", r.joint_rate},
                  {"Rs_hz", r.singles_signal}, {"Ri_hz", r.singles_idler},
                  {"eta", r.heralding},      {"ok", r.ok}};
      if (!r.ok) row["error"] = r.error;
      jr.push_back(row);
    }
    j["rows"] = jr;
    out << j.dump(2) << '\n';
  }
  return write_file(path, out.str());
}

namespace {

json geometry_to_json(const Geometry& g) {
  json j;
  j["theta_p_deg"] = rad_to_deg(g.theta_p);
  j["theta_s_deg"] = rad_to_deg(g.theta_s);
  j["theta_i_deg"] = rad_to_deg(g.theta_i);
  j["theta_s_ext_deg"] = rad_to_deg(g.theta_s_ext);
  j["theta_i_ext_deg"] = rad_to_deg(g.theta_i_ext);
  j["omega_p_rad_s"] = g.omega_p;
  j["omega_s0_rad_s"] = g.omega_s0;
  j["omega_i0_rad_s"] = g.omega_i0;
  j["lambda_s0_nm"] = wavelength_from_omega(g.omega_s0) * 1e9;
  j["lambda_i0_nm"] = wavelength_from_omega(g.omega_i0) * 1e9;
  j["degenerate"] = g.degenerate;
  return j;
}

json rates_to_json(const RateReport& r) {
  json j;
  j["R_hz"] = r.joint_rate;
  j["Rs_hz"] = r.singles_rate_signal;
  j["Ri_hz"] = r.singles_rate_idler;
  j["eta"] = r.heralding;
  j["mode_truncation"] = r.truncation;
  j["quad_error_R_hz"] = r.joint_error;
  j["quad_error_Rs_hz"] = r.singles_error_signal;
  j["quad_error_Ri_hz"] = r.singles_error_idler;
  j["mode_sum_increment"] = r.mode_sum.last_increment;
  j["mode_sum_warning"] = r.mode_sum.warning;
  if (r.second_branch) {
    j["second_branch"] = {
        {"omega_s_rad_s", *r.second_branch},
        {"lambda_s_nm", wavelength_from_omega(*r.second_branch) * 1e9},
        {"R_hz", r.second_branch_joint_rate}};
  }
  return j;
}

}  // namespace

std::string RunReport::report_json() const {
  json j;
  j["tool_version"] = tool_version;
  j["dispersion_checksum"] = dispersion_checksum;
  j["config_hash"] = config_hash;
  j["config"] = json::parse(config.to_json());
  j["geometry"] = geometry_to_json(geometry);
  j["rates"] = rates_to_json(rates);
  json m = json::array();
  for (const auto& f : manifest) m.push_back({{"path", f.path}, {"checksum", f.checksum}});
  j["manifest"] = m;
  return j.dump(2) + "\n";
}

RunReport run_scenario(const ScenarioConfig& cfg) {
  RunReport report;
  report.config = cfg;
  report.tool_version = kToolVersion;
  report.config_hash = cfg.hash();

  DispersionSet dispersion;
  SourceSetup setup = build_setup(cfg, dispersion);
  report.geometry = setup.geometry;
  report.dispersion_checksum = hex64(dispersion.checksum());

  const auto [fs_, fi_] = resolve_filters(cfg, setup.geometry);
  RateOptions opts;
  opts.truncation = cfg.mode_truncation;
  report.rates = heralding_efficiency(setup, fs_, fi_, opts);
  if (report.rates.mode_sum.warning) {
    std::cerr << "warning: mode sum increment "
              << format_double(report.rates.mode_sum.last_increment * 100.0)
              << "% from truncation " << cfg.mode_truncation << " to "
              << cfg.mode_truncation + 2 << "; sum may not be converged\n";
  }

  SpectralCurve curve = sample_spectra(setup, cfg.grid_points, cfg.mode_truncation);
  curve.config_hash = report.config_hash;
  const std::string ext = cfg.format == "csv" ? ".csv" : ".json";
  report.manifest.push_back(
      emit_curve(curve, cfg.format, (fs::path(cfg.out_dir) / ("spectra" + ext)).string()));

  // the report cannot carry its own checksum; it is marked "self"
  const std::string report_path = (fs::path(cfg.out_dir) / "report.json").string();
  report.manifest.push_back({report_path, "self"});
  write_file(report_path, report.report_json());
  return report;
}

std::vector<SweepRow> run_sweep(const ScenarioConfig& cfg) {
  if (!cfg.sweep) throw ConfigError("run_sweep requires a sweep spec");
  const SweepSpec sw = *cfg.sweep;

  std::vector<double> params(sw.steps);
  for (int i = 0; i < sw.steps; ++i) {
    params[i] = sw.steps == 1 ? sw.start
                              : sw.start + (sw.stop - sw.start) * i / (sw.steps - 1);
  }

  std::vector<SweepRow> rows(params.size());
  std::atomic<std::size_t> next{0};
  const int n_workers = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(params.size())));

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= params.size()) return;
      SweepRow& row = rows[i];
      row.param = params[i];
      try {
        ScenarioConfig point = cfg;
        point.sweep.reset();
        if (sw.param == "waist-scale") {
          for (double& w : point.waists_um) w *= params[i];
        } else if (sw.param == "pump-waist-um") {
          point.waists_um[0] = params[i];
        }
        DispersionSet dispersion;
        SourceSetup setup = build_setup(point, dispersion);
        SpectralFilter f_s, f_i;
        if (sw.param == "filter-width") {
          // top-hat of the swept full width (rad/s) at each arm's carrier
          f_s = SpectralFilter::top_hat(setup.geometry.omega_s0, params[i]);
          f_i = SpectralFilter::top_hat(setup.geometry.omega_i0, params[i]);
        } else {
          std::tie(f_s, f_i) = resolve_filters(point, setup.geometry);
        }
        RateOptions opts;
        opts.truncation = point.mode_truncation;
        const auto r = heralding_efficiency(setup, f_s, f_i, opts);
        row.joint_rate = r.joint_rate;
        row.singles_signal = r.singles_rate_signal;
        row.singles_idler = r.singles_rate_idler;
        row.heralding = r.heralding;
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
        row.joint_rate = row.singles_signal = row.singles_idler = row.heralding =
            std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return rows;
}

}  // namespace spdc
