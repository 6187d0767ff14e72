#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cpdesign/grid.hpp"
#include "cpdesign/materials.hpp"

namespace cpd {

/// Geometry and discretisation of a run. The interior is a cube (square in 2D) of side
/// `domain_size`, wrapped on every side by an absorbing layer `pml_thickness` deep.
struct SimulationConfig {
  int dimensions = 3;
  double domain_size = 8.0;
  int resolution = 10;  // cells per L0
  double pml_thickness = 1.0;
  double courant = 0.5;  // dt = courant * dx
  int steps = 960;

  void validate() const;

  double dx() const { return 1.0 / resolution; }
  double dt() const { return courant * dx(); }
  int cells_per_axis() const;
  int pml_cells() const;
  /// Node lattice shared by fields, media and level sets: cells_per_axis()+1 nodes per active axis,
  /// centred on the origin.
  Lattice lattice() const;
  /// Number of steps needed to cover `duration` (L0/c).
  int steps_for_duration(double duration) const;
  /// True if the point lies in the interior (non-absorbing) region.
  bool in_interior(const Vec3& p) const;
};

/// Per-node material description. Fill fractions scale the Drude response (and eps_inf - 1);
/// perfect-conductor nodes pin tangential E to zero.
struct MediaMap {
  Lattice lattice;
  DrudeParameters drude{1.0, 1.0, 0.0};
  std::vector<double> fill;
  std::vector<std::uint8_t> pec;

  static MediaMap vacuum(const Lattice& lattice);

  bool has_material() const;
  std::uint64_t hash() const;
};

enum class Component : int { Ex = 0, Ey = 1, Ez = 2 };

/// Current-moment point source; current density is amplitude / cell volume in the snapped cell.
/// Waveform sample n is the current at t = n * dt.
struct PointSource {
  Vec3 position;
  Vec3 orientation{1.0, 0.0, 0.0};
  std::vector<double> waveform;
};

struct ProbePosition {
  Vec3 position;
  Component component = Component::Ex;
};

/// Time series of one E component at one point; sample n is taken at t = n * dt.
struct ProbeRecord {
  ProbePosition probe;
  double dt = 0.0;
  std::vector<double> series;
};

/// A set of lattice nodes on which full E vectors are recorded.
struct GridBand {
  GridShape shape;
  std::vector<std::size_t> nodes;  // sorted flat node indices

  bool empty() const { return nodes.empty(); }
};

/// Node-averaged E vectors on a band, sampled every `stride` steps.
/// Layout: data[(sample * nodes + node) * 3 + component].
struct VolumeRecord {
  GridBand band;
  int stride = 1;
  double dt = 0.0;  // simulation step; sample spacing is stride * dt
  std::size_t samples = 0;
  std::vector<double> data;

  double sample_spacing() const { return stride * dt; }
  std::span<const double> at(std::size_t sample, std::size_t node) const {
    return {data.data() + (sample * band.nodes.size() + node) * 3, 3};
  }
  std::size_t bytes() const { return data.size() * sizeof(double); }
};

/// Yee-lattice FDTD solver: CFS convolutional PML, auxiliary-current Drude media,
/// perfect conductors, point current sources and interpolated point probes.
class Simulation {
 public:
  Simulation(const SimulationConfig& config, const MediaMap& media);

  const SimulationConfig& config() const { return config_; }
  const Lattice& lattice() const { return lattice_; }
  double dt() const { return dt_; }
  int time_step() const { return step_; }
  double time() const { return step_ * dt_; }

  void add_source(const PointSource& source);
  void clear_sources() { sources_.clear(); }

  /// Advances every field by one time step.
  void step();

  /// E component at the probe point, trilinearly interpolated from its staggered lattice.
  double sample(const ProbePosition& probe) const;
  /// E vector at a node, averaged from the two neighbouring staggered samples of each component.
  Vec3 node_field(std::size_t node) const;

  /// 0.5 * sum(eps E^2 + H^2) dV over the whole lattice.
  double energy() const;

  std::span<const double> electric(Component c) const { return e_[static_cast<int>(c)]; }
  std::span<const double> magnetic(Component c) const { return h_[static_cast<int>(c)]; }

  /// Throws NumericalError if any field value is not finite.
  void check_finite() const;

 private:
  struct InjectionPoint {
    int component;
    std::size_t index;
    double weight;  // orientation projection / cell volume
    std::size_t waveform;
  };
  struct DrudeEntry {
    std::size_t index;
    double kb;
  };
  struct PmlTerm {
    bool magnetic;
    int target;
    int source;
    int axis;
    double sign;
    std::vector<double> psi;
  };

  void build_media(const MediaMap& media);
  void build_pml();
  void update_h();
  void update_e();
  void apply_pml_h();
  void apply_pml_e();
  void apply_pml_term(PmlTerm& term);
  std::size_t slab_index(const PmlTerm& term, int i, int j, int k) const;

  SimulationConfig config_;
  Lattice lattice_;
  GridShape shape_;
  double dt_ = 0.0;
  double dx_ = 0.0;
  int step_ = 0;
  int pml_cells_ = 0;

  std::vector<double> e_[3];
  std::vector<double> h_[3];
  std::vector<double> inv_eps_[3];

  std::vector<DrudeEntry> drude_[3];
  std::vector<double> drude_current_[3];
  double drude_ka_ = 1.0;

  // CPML update coefficients along each axis, at integer (E) and half-integer (H) positions.
  std::vector<double> pml_b_e_[3], pml_c_e_[3], pml_b_h_[3], pml_c_h_[3];
  std::vector<PmlTerm> pml_terms_;

  std::vector<std::vector<double>> waveforms_;
  std::vector<InjectionPoint> sources_;
};

/// What to drive and what to record during one complete run.
struct RunRequest {
  std::vector<PointSource> sources;
  std::vector<ProbePosition> probes;
  const GridBand* band = nullptr;
  int stride = 1;
  std::size_t memory_budget = std::size_t{2} << 30;
};

struct RunOutput {
  std::vector<ProbeRecord> probes;
  VolumeRecord volume;
};

/// Steps a fresh simulation for config().steps steps, recording probes every step and the band
/// every `stride` steps. Probes and band must lie inside the lattice.
RunOutput execute(Simulation& sim, const RunRequest& request);

/// Runs with a single source and returns one record per probe.
std::vector<ProbeRecord> run_with_source(Simulation& sim, const PointSource& source,
                                         std::span<const ProbePosition> probes);

/// Runs with a single source and returns node E vectors on the band at strided times.
VolumeRecord record_volume(Simulation& sim, const PointSource& source, const GridBand& band, int stride,
                           std::size_t memory_budget = std::size_t{2} << 30);

}  // namespace cpd
