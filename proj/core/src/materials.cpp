#include "cpdesign/materials.hpp"

#include <cmath>

namespace cpd {

namespace {

// e / hbar in rad s^-1 per eV, and the speed of light in nm/s.
constexpr double kRadPerSecondPerEv = 1.602176634e-19 / 1.054571817e-34;
constexpr double kSpeedOfLightNmPerSecond = 2.99792458e17;

constexpr double kGoldPlasmaEv = 9.026;
constexpr double kGoldCollisionEv = 0.02666;

}  // namespace

double ev_to_sim_frequency(double energy_ev, double length_unit_nm) {
  return energy_ev * kRadPerSecondPerEv * length_unit_nm / kSpeedOfLightNmPerSecond;
}

double sim_frequency_to_ev(double omega, double length_unit_nm) {
  return omega * kSpeedOfLightNmPerSecond / (kRadPerSecondPerEv * length_unit_nm);
}

void DrudeParameters::validate() const {
  if (!(plasma_frequency > 0.0)) throw ConfigError("Drude plasma frequency must be positive");
  if (!(collision_rate >= 0.0)) throw ConfigError("Drude collision rate must be non-negative");
  if (!(eps_inf >= 1.0)) throw ConfigError("Drude eps_inf must be >= 1");
}

void AtomModel::validate() const {
  if (!(static_polarizability >= 0.0)) throw ConfigError("static polarizability must not be negative");
  if (!(resonance > 0.0)) throw ConfigError("atomic resonance must be positive");
  if (!(linewidth > 0.0)) throw ConfigError("atomic linewidth must be positive");
  if (std::abs(axis.norm() - 1.0) > 1e-12) throw ConfigError("atom polarization axis must be a unit vector");
}

std::complex<double> drude_permittivity(double omega, const DrudeParameters& p) {
  using namespace std::complex_literals;
  const double wp2 = p.plasma_frequency * p.plasma_frequency;
  return p.eps_inf - wp2 / (omega * omega + 1i * p.collision_rate * omega);
}

std::complex<double> atom_polarizability(double omega, const AtomModel& a) {
  using namespace std::complex_literals;
  const double wa2 = a.resonance * a.resonance;
  return a.static_polarizability * wa2 / (wa2 - omega * omega - 1i * a.linewidth * omega);
}

double atom_polarizability_imaginary(double xi, const AtomModel& a) {
  const double wa2 = a.resonance * a.resonance;
  return a.static_polarizability * wa2 / (wa2 + xi * xi + a.linewidth * xi);
}

DrudeParameters gold_preset(double length_unit_nm) {
  return {1.0, ev_to_sim_frequency(kGoldPlasmaEv, length_unit_nm),
          ev_to_sim_frequency(kGoldCollisionEv, length_unit_nm)};
}

AtomModel rubidium_preset(double length_unit_nm) {
  AtomModel a;
  a.static_polarizability = 1.0;
  a.resonance = ev_to_sim_frequency(1.6, length_unit_nm);
  a.linewidth = ev_to_sim_frequency(2.5e-8, length_unit_nm);
  return a;
}

std::vector<MaterialPreset> material_presets(double length_unit_nm) {
  std::vector<MaterialPreset> presets;
  presets.push_back({"gold", "Drude gold, Ordal et al. 1985 (wp = 9.026 eV, g = 0.02666 eV, eps_inf = 1)", false,
                     gold_preset(length_unit_nm)});
  DrudeParameters jc;
  jc.eps_inf = 9.5;
  jc.plasma_frequency = ev_to_sim_frequency(8.95, length_unit_nm);
  jc.collision_rate = ev_to_sim_frequency(0.069, length_unit_nm);
  presets.push_back({"gold-jc", "Drude gold with background, fit to Johnson & Christy 1972 (wp = 8.95 eV, g = 0.069 eV, eps_inf = 9.5)",
                     false, jc});
  presets.push_back({"pec", "perfect electric conductor (tangential E = 0)", true, {}});
  return presets;
}

MaterialPreset find_material_preset(const std::string& name, double length_unit_nm) {
  for (auto& p : material_presets(length_unit_nm)) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown material preset '" + name + "'");
}

}  // namespace cpd
