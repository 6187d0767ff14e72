#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cpdesign/optimizer.hpp"

namespace cpd {

struct GeometrySpec {
  std::string shape = "cylinder";  // cylinder | disk | file
  double radius = 1.5;
  double height = 0.4;
  double separation = 1.1;  // atom to shape centre along x
  std::string file;          // level-set field file when shape = file
};

struct MaterialSpec {
  std::string preset = "gold";
  std::optional<double> eps_inf;
  std::optional<double> plasma_ev;
  std::optional<double> collision_ev;
};

struct ValidationSpec {
  std::vector<double> separations{0.8, 1.0, 1.5, 2.0};
  double tolerance = 0.15;
  double slope_target = -3.0;
  double slope_tolerance = 0.4;
  double plane_offset = 2.0;  // plane face position along z
};

struct RunConfig {
  RunConfig() { simulation.steps = 0; }

  SimulationConfig simulation;
  double duration = 60.0;  // used when simulation.steps == 0
  double length_unit_nm = 100.0;

  double atom_resonance_ev = 1.6;
  double atom_linewidth_ev = 2.5e-8;
  double atom_polarizability = 1.0;
  Vec3 atom_axis{1.0, 0.0, 0.0};
  Vec3 atom_position{-0.55, 0.0, 0.0};

  double source_cutoff = 2.5;
  double source_amplitude = 1.0;

  double kernel_omega_max = 0.0;
  int kernel_samples = 16384;
  double kernel_linewidth_floor = 10.0;
  double kernel_window_cells = 0.75;  // window frequency = window_cells / dx; 0 disables
  double kernel_taper = 0.15;

  MaterialSpec material;
  GeometrySpec geometry;
  OptimizerSettings optimizer;
  ValidationSpec validation;

  std::filesystem::path output = "runs/default";
  bool lean = false;

  /// Throws ConfigError on the first invalid value.
  void validate() const;

  AtomModel atom() const;
  /// Perfect conductor presets return nullopt.
  std::optional<DrudeParameters> drude() const;
  bool perfect_conductor() const;
  EvaluatorSettings evaluator() const;
  /// Shape centre: atom position shifted by the separation along x.
  Vec3 structure_center() const;
  LevelSetField initial_geometry() const;
  DesignProblem design_problem() const;

  /// Hash of the canonical text without the [output] section.
  std::uint64_t hash() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text: every key, fixed order, 17 significant digits.
std::string serialize_config(const RunConfig& config, bool include_output = true);

}  // namespace cpd
