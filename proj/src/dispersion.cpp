#include "spdc/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

double SellmeierCoeffs::n_squared(double L) const {
  return a + b / (L * L - c) - d * L * L;
}

double SellmeierCoeffs::dn2_dlambda(double L) const {
  const double q = L * L - c;
  return -2.0 * b * L / (q * q) - 2.0 * d * L;
}

double SellmeierCoeffs::d2n2_dlambda2(double L) const {
  const double q = L * L - c;
  return 2.0 * b * (3.0 * L * L + c) / (q * q * q) - 2.0 * d;
}

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

namespace {

std::map<std::string, std::string> parse_key_values(const std::string& text,
                                                    const std::string& path) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double to_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 const std::string& path) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(path + ": missing key '" + key + "'");
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ConfigError(path + ": key '" + key + "' is not a number: " + it->second);
  }
}

SellmeierCoeffs axis_coeffs(const std::map<std::string, std::string>& kv,
                            const std::string& axis, const std::string& path) {
  SellmeierCoeffs c;
  c.a = to_double(kv, axis + ".A", path);
  c.b = to_double(kv, axis + ".B", path);
  c.c = to_double(kv, axis + ".C", path);
  c.d = to_double(kv, axis + ".D", path);
  return c;
}

}  // namespace

DispersionSet DispersionSet::from_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open dispersion file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();

  const auto kv = parse_key_values(text, path);
  DispersionSet d;
  d.checksum_ = fnv1a64(text.data(), text.size());
  auto get = [&](const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(path + ": missing key '" + key + "'");
    return it->second;
  };
  d.material_ = get("material");
  d.citation_ = get("citation");
  d.valid_min_m_ = to_double(kv, "valid_nm_min", path) * 1e-9;
  d.valid_max_m_ = to_double(kv, "valid_nm_max", path) * 1e-9;
  d.pump_ax_ = axis_coeffs(kv, get("pump_axis"), path);
  d.lo_ax_ = axis_coeffs(kv, get("plane_axis_lo"), path);
  d.hi_ax_ = axis_coeffs(kv, get("plane_axis_hi"), path);
  d.validate();
  return d;
}

DispersionSet DispersionSet::collapsed_for_test(const SellmeierCoeffs& pump_axis,
                                                const SellmeierCoeffs& plane_axis,
                                                double valid_min_m, double valid_max_m) {
  DispersionSet d;
  d.material_ = "test";
  d.citation_ = "synthetic";
  d.valid_min_m_ = valid_min_m;
  d.valid_max_m_ = valid_max_m;
  d.pump_ax_ = pump_axis;
  d.lo_ax_ = plane_axis;
  d.hi_ax_ = plane_axis;
  d.checksum_ = 0;
  return d;
}

void DispersionSet::validate() const {
  if (!(valid_min_m_ > 0.0) || !(valid_max_m_ > valid_min_m_))
    throw ConfigError("dispersion set: bad validity range");
  const int n_check = 64;
  std::array<double, 3> prev{};
  for (int i = 0; i <= n_check; ++i) {
    const double lambda = valid_min_m_ + (valid_max_m_ - valid_min_m_) * i / n_check;
    const auto idx = principal_indices(lambda);
    for (double n : idx) {
      if (!(n > 1.0 && n < 4.0))
        throw ConfigError("dispersion set: principal index outside (1,4) at lambda = " +
                          std::to_string(lambda * 1e9) + " nm");
    }
    if (i > 0) {
      for (int ax = 0; ax < 3; ++ax) {
        if (idx[ax] >= prev[ax])
          throw ConfigError("dispersion set: index not monotonically decreasing with wavelength");
      }
    }
    prev = idx;
  }
}

void DispersionSet::require_in_range(double lambda_m) const {
  if (!(lambda_m >= valid_min_m_ && lambda_m <= valid_max_m_)) {
    std::ostringstream msg;
    msg << "wavelength " << lambda_m * 1e9 << " nm outside dispersion validity ["
        << valid_min_m_ * 1e9 << ", " << valid_max_m_ * 1e9 << "] nm for " << material_;
    throw std::domain_error(msg.str());
  }
}

std::array<double, 3> DispersionSet::principal_indices(double lambda_m) const {
  require_in_range(lambda_m);
  const double L = lambda_m * 1e6;
  return {std::sqrt(pump_ax_.n_squared(L)), std::sqrt(lo_ax_.n_squared(L)),
          std::sqrt(hi_ax_.n_squared(L))};
}

double DispersionSet::index_pump(double lambda_m) const {
  require_in_range(lambda_m);
  return std::sqrt(pump_ax_.n_squared(lambda_m * 1e6));
}

void DispersionSet::inv_n2_spdc(double L, double theta, double& s, double& s1,
                                double& s2) const {
  const double cs2 = std::cos(theta) * std::cos(theta);
  const double sn2 = 1.0 - cs2;
  const double ulo = lo_ax_.n_squared(L), uhi = hi_ax_.n_squared(L);
  const double ulo1 = lo_ax_.dn2_dlambda(L), uhi1 = hi_ax_.dn2_dlambda(L);
  const double ulo2 = lo_ax_.d2n2_dlambda2(L), uhi2 = hi_ax_.d2n2_dlambda2(L);
  s = cs2 / ulo + sn2 / uhi;
  s1 = -cs2 * ulo1 / (ulo * ulo) - sn2 * uhi1 / (uhi * uhi);
  s2 = cs2 * (2.0 * ulo1 * ulo1 / (ulo * ulo * ulo) - ulo2 / (ulo * ulo)) +
       sn2 * (2.0 * uhi1 * uhi1 / (uhi * uhi * uhi) - uhi2 / (uhi * uhi));
}

double DispersionSet::index_spdc(double lambda_m, double theta) const {
  require_in_range(lambda_m);
  double s, s1, s2;
  inv_n2_spdc(lambda_m * 1e6, theta, s, s1, s2);
  return 1.0 / std::sqrt(s);
}

IndexSample DispersionSet::sample(double lambda_m, double theta, Polarization pol) const {
  require_in_range(lambda_m);
  const double L = lambda_m * 1e6;  // um
  double n, n1, n2;                 // index and d/dL, d2/dL2 in um^-1, um^-2
  if (pol == Polarization::pump) {
    const double u = pump_ax_.n_squared(L);
    const double u1 = pump_ax_.dn2_dlambda(L);
    const double u2 = pump_ax_.d2n2_dlambda2(L);
    n = std::sqrt(u);
    n1 = 0.5 * u1 / n;
    n2 = 0.5 * u2 / n - 0.25 * u1 * u1 / (u * n);
  } else {
    double s, s1, s2;
    inv_n2_spdc(L, theta, s, s1, s2);
    n = 1.0 / std::sqrt(s);
    // n = s^{-1/2}
    n1 = -0.5 * std::pow(s, -1.5) * s1;
    n2 = 0.75 * std::pow(s, -2.5) * s1 * s1 - 0.5 * std::pow(s, -1.5) * s2;
  }
  // convert to SI: derivatives w.r.t. lambda in meters
  const double n1_m = n1 * 1e6;
  const double n2_m = n2 * 1e12;
  IndexSample out;
  out.n = n;
  out.k = n * omega_from_wavelength(lambda_m) / kSpeedOfLight;
  out.n_group = n - lambda_m * n1_m;
  out.gvd = lambda_m * lambda_m * lambda_m * n2_m /
            (kTwoPiC * kSpeedOfLight);  // lambda^3 n'' / (2 pi c^2)
  return out;
}

IndexSample DispersionSet::sample_fd(double lambda_m, double theta, Polarization pol,
                                     double rel_step) const {
  const double omega = omega_from_wavelength(lambda_m);
  const double h = rel_step * omega;
  auto k_of = [&](double w) {
    const double lam = wavelength_from_omega(w);
    require_in_range(lam);
    const double n = (pol == Polarization::pump) ? index_pump(lam) : index_spdc(lam, theta);
    return n * w / kSpeedOfLight;
  };
  IndexSample out;
  out.n = (pol == Polarization::pump) ? index_pump(lambda_m) : index_spdc(lambda_m, theta);
  out.k = k_of(omega);
  out.n_group = kSpeedOfLight * (k_of(omega + h) - k_of(omega - h)) / (2.0 * h);
  out.gvd = (k_of(omega + h) - 2.0 * out.k + k_of(omega - h)) / (h * h);
  return out;
}

}  // namespace spdc
