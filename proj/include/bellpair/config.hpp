#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace bellpair {

// CODATA-ish constants, SI.
inline constexpr double kHbar = 1.0545718176461565e-34;  // J s
inline constexpr double kPlanckH = 6.62607015e-34;       // J s

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Geometry { Slab, Trap };

// All experimental constants plus run settings, read from a flat
// `key = value` config file.  SI units unless the key name carries a unit
// suffix (_alat: lattice periods, _erec: recoil energies).
//
// Internally every solver works in lattice units: lengths in a_L, energies
// in E_rec = hbar^2 k_rec^2 / 2m, time in hbar/E_rec.  In these units the
// kinetic energy of a plane wave is (k a_L / pi)^2 E_rec, i.e. hbar^2/2m -> 1/pi^2.
struct PhysicalParams {
  // physical constants (required keys)
  double atom_mass_kg = 0;
  double n_atoms = 0;
  double a_bar_m = 0;    // (a0 + 2 a2)/3
  double delta_a_m = 0;  // (a2 - a0)/3
  double nu_x_hz = 0, nu_y_hz = 0, nu_z_hz = 0;
  double lattice_depth_erec = 0;  // U0 / E_rec, >= 0
  double k_rec_per_m = 0;
  double k0_alat = 0;           // condensate momentum, units 1/a_L
  double evolution_time_s = 0;  // t_final

  // grid / run settings (defaulted)
  int n_x = 1024;
  double box_alat = 64;         // target box length; slab runs may shrink it
  double dt_erec = 5e-3;        // kernel integrator step, hbar/E_rec
  double snapshot_every_s = 5e-5;
  Geometry geometry = Geometry::Slab;
  bool tune_box = true;         // slab mode: commensurate box with the pair resonance
  double k0_snap_tol = 0.06;    // max |k0_run - k0| accepted by the tuner, 1/a_L
  int n_max = 20;               // plane-wave truncation
  int n_bands = 8;
  double region_half_width_frac = 0.25;  // of |k1 - k2|
  bool frozen_pump = false;
  bool sector_symmetry = true;
  double lattice_ramp_s = 0;    // 0 = quench

  // ---- derived quantities (filled by finalize()) ----
  double a_lat_m = 0;    // pi / k_rec
  double e_rec_j = 0;    // hbar^2 k_rec^2 / 2m
  double t_unit_s = 0;   // hbar / E_rec
  double c0_si = 0;      // 4 pi hbar^2 abar / m, J m^3
  double c1_si = 0;      // 4 pi hbar^2 da / m
  double t_final = 0;    // evolution time, lattice units
  double snapshot_every = 0;
  double lattice_ramp = 0;
  double trap_wz = 0;    // hbar * omega_z / E_rec (weak, lattice axis)

  void finalize();  // derive the above + validate invariants
};

// Transverse-ground-state reduction of the 3D couplings onto the lattice
// axis: g_1d = c / (2 pi a_perp^2), a_perp = sqrt(hbar / (m 2 pi nu_perp)).
// Requires nu_x == nu_y.  Returns pairs in J m.
struct Couplings1d {
  double g0_jm = 0;
  double g1_jm = 0;
  double g0_lat = 0;  // g / (E_rec a_L), i.e. energy per unit 1D density
  double g1_lat = 0;
};
Couplings1d effective_1d_couplings(const PhysicalParams& p);

// Thomas-Fermi peak 1D density of the full trapped cloud, atoms per a_L.
// This is what the slab geometry puts in the box.
double slab_density_alat(const PhysicalParams& p);

PhysicalParams load_config(const std::string& path);
PhysicalParams parse_config(const std::string& text, const std::string& origin = "<string>");
std::string serialize(const PhysicalParams& p);

}  // namespace bellpair
