#pragma once

#include <complex>
#include <string>
#include <vector>

#include "cpdesign/grid.hpp"

namespace cpd {

/// Converts a photon energy in eV to an angular frequency in c/L0 for a length unit L0 given in nm.
double ev_to_sim_frequency(double energy_ev, double length_unit_nm);

/// Inverse of ev_to_sim_frequency.
double sim_frequency_to_ev(double omega, double length_unit_nm);

/// Free-electron permittivity eps(w) = eps_inf - wp^2 / (w^2 + i g w).
struct DrudeParameters {
  double eps_inf = 1.0;
  double plasma_frequency = 0.0;  // c/L0
  double collision_rate = 0.0;    // c/L0

  void validate() const;
  friend bool operator==(const DrudeParameters&, const DrudeParameters&) = default;
};

/// Single-resonance ground-state polarizability a(w) = a0 wa^2 / (wa^2 - w^2 - i ga w) along one axis.
struct AtomModel {
  double static_polarizability = 1.0;
  double resonance = 0.0;  // c/L0
  double linewidth = 0.0;  // c/L0
  Vec3 axis{1.0, 0.0, 0.0};

  void validate() const;
  friend bool operator==(const AtomModel&, const AtomModel&) = default;
};

std::complex<double> drude_permittivity(double omega, const DrudeParameters& p);

std::complex<double> atom_polarizability(double omega, const AtomModel& a);

/// Polarizability on the imaginary axis, a(i xi), which is real and positive.
double atom_polarizability_imaginary(double xi, const AtomModel& a);

/// Drude fit for gold (Ordal et al., Appl. Opt. 24, 4493 (1985)):
/// hbar*wp = 9.026 eV (7.28e4 cm^-1), hbar*g = 0.02666 eV (215 cm^-1), eps_inf = 1.
DrudeParameters gold_preset(double length_unit_nm = 100.0);

/// The Rb-87 D-line model used for the reference configuration: wa = 1.6 eV, ga = 2.5e-8 eV, a0 = 1.
AtomModel rubidium_preset(double length_unit_nm = 100.0);

struct MaterialPreset {
  std::string name;
  std::string description;
  bool perfect_conductor = false;
  DrudeParameters drude;  // unused for perfect conductors
};

/// Presets the CLI can list; Drude values are expressed for the given length unit.
std::vector<MaterialPreset> material_presets(double length_unit_nm = 100.0);

/// Looks up a preset by name; throws ConfigError for unknown names.
MaterialPreset find_material_preset(const std::string& name, double length_unit_nm = 100.0);

}  // namespace cpd
