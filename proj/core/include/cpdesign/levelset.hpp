#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cpdesign/fdtd.hpp"

namespace cpd {

/// Phi < 0 inside the structure, Phi > 0 outside, on the simulation node lattice.
struct LevelSetField {
  Lattice lattice;
  std::vector<double> phi;
  double tau = 0.0;
  int reinit_age = 0;

  static LevelSetField from_function(const Lattice& lattice, const std::function<double(const Vec3&)>& f);
  /// Phi = +limit everywhere (no structure).
  static LevelSetField empty(const Lattice& lattice, double limit = 1e3);

  bool has_interior() const;
  std::uint64_t hash() const;
};

/// Exact signed distance to a solid cylinder of radius R and height h, its axis along `axis`.
/// In 2D the cylinder becomes its cross-section through the axis: a rectangle h long and 2R wide.
/// Throws ConfigError if the shape reaches into the absorbing layer.
LevelSetField init_cylinder(const SimulationConfig& config, double radius, double height, const Vec3& center,
                            int axis = 0);

/// Signed distance to a disk (2D) or ball (3D).
LevelSetField init_disk(const SimulationConfig& config, double radius, const Vec3& center);

/// Rebuilds a signed distance by second-order fast marching from the current zero contour.
/// Returns false (field untouched) when there is no interior or no contour.
bool reinitialize(LevelSetField& field);

/// Fast-marching extension of interface values along normals. `seed` holds values for band nodes
/// (`band.nodes` order). Throws ConfigError if no seeded node touches the contour.
std::vector<double> extend_velocity(const LevelSetField& field, const GridBand& band, const std::vector<double>& seed);

/// For band nodes on the contour: own value plus the mean over band neighbours across the contour.
/// Other nodes keep their value. Pairs up the two sides of each crossing so the boundary sees both.
std::vector<double> pair_across_interface(const LevelSetField& field, const GridBand& band,
                                          const std::vector<double>& values);

/// One first-order Godunov step of dPhi/dtau + v |grad Phi| = 0. v > 0 moves the boundary outward
/// (the structure grows). Throws ConfigError if max|v| dtau exceeds half a cell. Nodes flagged in
/// `frozen` keep their value.
void advect(LevelSetField& field, const std::vector<double>& velocity, double dtau,
            const std::vector<std::uint8_t>* frozen = nullptr);

/// Advects over `dtau` in as many half-cell sub-steps as needed.
void advect_substepped(LevelSetField& field, const std::vector<double>& velocity, double dtau,
                       const std::vector<std::uint8_t>* frozen = nullptr);

/// Fill fraction per node: clamp(1/2 - Phi/dx, 0, 1).
std::vector<double> interior_mask(const LevelSetField& field);

/// Material map for the solver. Perfect conductors fill nodes with fill >= 1/2.
MediaMap to_media(const LevelSetField& field, const DrudeParameters& drude, bool perfect_conductor = false);

/// Nodes with |Phi| <= width * dx.
GridBand make_band(const LevelSetField& field, double width_cells = 3.0);

/// Nodes within `cells` cells of any of the points.
std::vector<std::uint8_t> freeze_mask(const Lattice& lattice, const std::vector<Vec3>& points, double cells = 2.0);

/// Keeps the zero contour out of the absorbing layer: Phi >= dx there.
void apply_constraints(LevelSetField& field, const SimulationConfig& config);

struct TopologyStats {
  int components = 0;  // 6-connected (4 in 2D) pieces of {Phi < 0}
  int holes = 0;       // 2D: enclosed gaps; 3D: tunnels (first Betti number)
  int cavities = 0;    // 3D enclosed voids
  int euler = 0;       // Euler characteristic of the cubical complex
};

TopologyStats topology_stats(const LevelSetField& field);

/// Material thickness (sum of fill * dx) along the line through `point` parallel to x.
double axis_thickness(const LevelSetField& field, const Vec3& point);

}  // namespace cpd
