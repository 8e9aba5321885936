#include "bellpair/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace bellpair {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0) || !std::isfinite(v))
    throw ConfigError("config: key '" + key + "' must be strictly positive, got " + fmt_double(v));
}

}  // namespace

void PhysicalParams::finalize() {
  require_positive("atom_mass_kg", atom_mass_kg);
  require_positive("a_bar_m", a_bar_m);
  require_positive("delta_a_m", delta_a_m);
  require_positive("nu_x_hz", nu_x_hz);
  require_positive("nu_y_hz", nu_y_hz);
  require_positive("nu_z_hz", nu_z_hz);
  require_positive("k_rec_per_m", k_rec_per_m);
  require_positive("evolution_time_s", evolution_time_s);
  if (n_atoms < 1) throw ConfigError("config: n_atoms must be >= 1");
  if (lattice_depth_erec < 0) throw ConfigError("config: lattice_depth_erec must be >= 0");
  if (n_x < 16) throw ConfigError("config: n_x must be >= 16");
  if (!(box_alat > 0)) throw ConfigError("config: box_alat must be positive");
  if (!(dt_erec > 0)) throw ConfigError("config: dt_erec must be positive");
  if (!(snapshot_every_s > 0)) throw ConfigError("config: snapshot_every_s must be positive");
  if (lattice_ramp_s < 0) throw ConfigError("config: lattice_ramp_s must be >= 0");

  a_lat_m = M_PI / k_rec_per_m;
  e_rec_j = kHbar * kHbar * k_rec_per_m * k_rec_per_m / (2.0 * atom_mass_kg);
  // Same quantity through the lattice period; the two must agree to 1e-12.
  const double e_rec_from_alat = kHbar * kHbar * M_PI * M_PI / (2.0 * atom_mass_kg * a_lat_m * a_lat_m);
  if (std::abs(e_rec_j - e_rec_from_alat) > 1e-12 * e_rec_j)
    throw ConfigError("config: recoil-energy self-consistency check failed");

  t_unit_s = kHbar / e_rec_j;
  c0_si = 4.0 * M_PI * kHbar * kHbar * a_bar_m / atom_mass_kg;
  c1_si = 4.0 * M_PI * kHbar * kHbar * delta_a_m / atom_mass_kg;
  t_final = evolution_time_s / t_unit_s;
  snapshot_every = snapshot_every_s / t_unit_s;
  lattice_ramp = lattice_ramp_s / t_unit_s;
  trap_wz = kHbar * 2.0 * M_PI * nu_z_hz / e_rec_j;
}

Couplings1d effective_1d_couplings(const PhysicalParams& p) {
  if (std::abs(p.nu_x_hz - p.nu_y_hz) > 1e-12 * std::max(p.nu_x_hz, p.nu_y_hz))
    throw ConfigError("effective_1d_couplings: anisotropic transverse trap unsupported (nu_x != nu_y)");
  const double aperp2 = kHbar / (p.atom_mass_kg * 2.0 * M_PI * p.nu_x_hz);
  Couplings1d c;
  c.g0_jm = p.c0_si / (2.0 * M_PI * aperp2);
  c.g1_jm = p.c1_si / (2.0 * M_PI * aperp2);
  c.g0_lat = c.g0_jm / (p.e_rec_j * p.a_lat_m);
  c.g1_lat = c.g1_jm / (p.e_rec_j * p.a_lat_m);
  return c;
}

double slab_density_alat(const PhysicalParams& p) {
  const auto c = effective_1d_couplings(p);
  const double wz = 2.0 * M_PI * p.nu_z_hz;
  // 1D Thomas-Fermi: mu = (3 N g omega/4)^(2/3) (m/2)^(1/3), n_peak = mu/g
  const double mu = std::pow(0.75 * p.n_atoms * c.g0_jm * wz, 2.0 / 3.0) *
                    std::pow(p.atom_mass_kg / 2.0, 1.0 / 3.0);
  return mu / c.g0_jm * p.a_lat_m;
}

namespace {

struct KeyTable {
  std::map<std::string, double PhysicalParams::*> phys;   // required
  std::map<std::string, double PhysicalParams::*> grid_d; // optional doubles
  KeyTable() {
    phys = {
        {"atom_mass_kg", &PhysicalParams::atom_mass_kg},
        {"n_atoms", &PhysicalParams::n_atoms},
        {"a_bar_m", &PhysicalParams::a_bar_m},
        {"delta_a_m", &PhysicalParams::delta_a_m},
        {"nu_x_hz", &PhysicalParams::nu_x_hz},
        {"nu_y_hz", &PhysicalParams::nu_y_hz},
        {"nu_z_hz", &PhysicalParams::nu_z_hz},
        {"lattice_depth_erec", &PhysicalParams::lattice_depth_erec},
        {"k_rec_per_m", &PhysicalParams::k_rec_per_m},
        {"k0_alat", &PhysicalParams::k0_alat},
        {"evolution_time_s", &PhysicalParams::evolution_time_s},
    };
    grid_d = {
        {"box_alat", &PhysicalParams::box_alat},
        {"dt_erec", &PhysicalParams::dt_erec},
        {"snapshot_every_s", &PhysicalParams::snapshot_every_s},
        {"k0_snap_tol", &PhysicalParams::k0_snap_tol},
        {"region_half_width_frac", &PhysicalParams::region_half_width_frac},
        {"lattice_ramp_s", &PhysicalParams::lattice_ramp_s},
    };
  }
};

const KeyTable& key_table() {
  static KeyTable t;
  return t;
}

double parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double x = std::stod(v, &pos);
    while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
    if (pos != v.size()) throw std::invalid_argument("trailing junk");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: cannot parse value '" + v + "' for key '" + key + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config: cannot parse boolean '" + v + "' for key '" + key + "'");
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

}  // namespace

PhysicalParams parse_config(const std::string& text, const std::string& origin) {
  PhysicalParams p;
  const auto& table = key_table();
  std::set<std::string> seen;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (!seen.insert(key).second)
      throw ConfigError(origin + ": duplicate key '" + key + "'");

    if (auto it = table.phys.find(key); it != table.phys.end()) {
      p.*(it->second) = parse_number(key, val);
    } else if (auto ig = table.grid_d.find(key); ig != table.grid_d.end()) {
      p.*(ig->second) = parse_number(key, val);
    } else if (key == "n_x") {
      p.n_x = static_cast<int>(parse_number(key, val));
    } else if (key == "n_max") {
      p.n_max = static_cast<int>(parse_number(key, val));
    } else if (key == "n_bands") {
      p.n_bands = static_cast<int>(parse_number(key, val));
    } else if (key == "geometry") {
      if (val == "slab") p.geometry = Geometry::Slab;
      else if (val == "trap") p.geometry = Geometry::Trap;
      else throw ConfigError("config: geometry must be 'slab' or 'trap', got '" + val + "'");
    } else if (key == "tune_box") {
      p.tune_box = parse_bool(key, val);
    } else if (key == "frozen_pump") {
      p.frozen_pump = parse_bool(key, val);
    } else if (key == "sector_symmetry") {
      p.sector_symmetry = parse_bool(key, val);
    } else {
      throw ConfigError(origin + ": unknown key '" + key + "'");
    }
  }

  // Physical constants never default; every key must be present.
  for (const auto& [key, ptr] : table.phys)
    if (!seen.count(key)) throw ConfigError("config: missing key '" + key + "'");

  p.finalize();
  return p;
}

PhysicalParams load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::string serialize(const PhysicalParams& p) {
  std::ostringstream o;
  auto put = [&o](const char* k, double v) { o << k << " = " << fmt_double(v) << "\n"; };
  put("atom_mass_kg", p.atom_mass_kg);
  put("n_atoms", p.n_atoms);
  put("a_bar_m", p.a_bar_m);
  put("delta_a_m", p.delta_a_m);
  put("nu_x_hz", p.nu_x_hz);
  put("nu_y_hz", p.nu_y_hz);
  put("nu_z_hz", p.nu_z_hz);
  put("lattice_depth_erec", p.lattice_depth_erec);
  put("k_rec_per_m", p.k_rec_per_m);
  put("k0_alat", p.k0_alat);
  put("evolution_time_s", p.evolution_time_s);
  o << "n_x = " << p.n_x << "\n";
  put("box_alat", p.box_alat);
  put("dt_erec", p.dt_erec);
  put("snapshot_every_s", p.snapshot_every_s);
  o << "geometry = " << (p.geometry == Geometry::Slab ? "slab" : "trap") << "\n";
  o << "tune_box = " << (p.tune_box ? "true" : "false") << "\n";
  put("k0_snap_tol", p.k0_snap_tol);
  o << "n_max = " << p.n_max << "\n";
  o << "n_bands = " << p.n_bands << "\n";
  put("region_half_width_frac", p.region_half_width_frac);
  o << "frozen_pump = " << (p.frozen_pump ? "true" : "false") << "\n";
  o << "sector_symmetry = " << (p.sector_symmetry ? "true" : "false") << "\n";
  put("lattice_ramp_s", p.lattice_ramp_s);
  return o.str();
}

}  // namespace bellpair
