#pragma once

#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "cpdesign/fdtd.hpp"
#include "cpdesign/kernel.hpp"

namespace cpd {

/// U_CP at one atom position, in simulation units (hbar = eps0 = mu0 = c = 1, a0 = 1).
struct PotentialSample {
  Vec3 atom;
  double potential = 0.0;
  int resolution = 0;
  int steps = 0;
  std::uint64_t geometry_hash = 0;
  bool flagged = false;  // scattered series had not decayed by the last step
};

/// Elementwise total - vacuum. Throws ConfigError on mismatched dt, probe or length.
ProbeRecord scattered_series(const ProbeRecord& total, const ProbeRecord& vacuum);

/// Central difference (plus - minus) / (2 h) of two scattered records one spacing h either side of the atom.
ProbeRecord gradient_probe(const ProbeRecord& plus, const ProbeRecord& minus);

/// True when the last tenth of the series stays below `threshold` times its peak magnitude.
bool series_decayed(const ProbeRecord& record, double threshold = 1e-3);

/// U = -sum_n K(t_n) E1(t_n) dt.
PotentialSample cp_potential(const ConvolutionKernel& kernel, const ProbeRecord& scattered);

/// F = sum_n K(t_n) dE1/dx(t_n) dt. Positive means attraction towards +x; negative is repulsive for a
/// structure on the +x side.
double merit_force(const ConvolutionKernel& kernel, const ProbeRecord& gradient);

struct EvaluatorSettings {
  SimulationConfig simulation;
  AtomModel atom;
  double source_cutoff = 2.5;
  double source_amplitude = 1.0;
  KernelOptions kernel;
};

/// Everything one structure run yields at the atom.
struct AtomResponse {
  Vec3 atom;
  PotentialSample potential;
  double merit = 0.0;
  ProbeRecord scattered;           // E1 along the atom axis at the atom
  ProbeRecord gradient;            // central-difference dE1/dx at the atom
  VolumeRecord band;               // total E on the requested band (empty if none)
};

/// Runs the structure and vacuum simulations behind U_CP, the merit and the finite-difference force.
/// Vacuum runs are cached per snapped atom position.
class CasimirPolderEvaluator {
 public:
  explicit CasimirPolderEvaluator(EvaluatorSettings settings);

  const EvaluatorSettings& settings() const { return settings_; }
  const SimulationConfig& simulation() const { return settings_.simulation; }
  const SourceWaveform& source() const { return source_; }
  const ConvolutionKernel& kernel() const { return kernel_; }
  Component atom_component() const { return component_; }
  /// Probe spacing h used for the merit's central difference (one cell).
  double probe_offset() const { return settings_.simulation.dx(); }

  /// Nearest lattice position of the atom-axis E component.
  Vec3 snap_atom(const Vec3& atom) const;
  PointSource atom_source(const Vec3& atom) const;
  /// Probe positions: atom, atom + h x, atom - h x.
  std::vector<ProbePosition> atom_probes(const Vec3& atom) const;

  AtomResponse evaluate(const MediaMap& media, const Vec3& atom, const GridBand* band = nullptr, int stride = 1,
                        std::size_t memory_budget = std::size_t{2} << 30);
  PotentialSample potential(const MediaMap& media, const Vec3& atom);
  double merit(const MediaMap& media, const Vec3& atom);
  /// F_x = -[U(r + d/2) - U(r - d/2)] / d, each U from a full evaluation.
  double force_x(const MediaMap& media, const Vec3& atom, double displacement);

  /// Number of simulations run so far (structure + vacuum).
  int simulations_run() const { return simulations_; }

 private:
  const std::vector<ProbeRecord>& vacuum_records(const Vec3& snapped);
  void check_atom_in_vacuum(const MediaMap& media, const Vec3& snapped) const;

  EvaluatorSettings settings_;
  SourceWaveform source_;
  ConvolutionKernel kernel_;
  Component component_ = Component::Ex;
  std::map<std::tuple<long, long, long>, std::vector<ProbeRecord>> vacuum_cache_;
  int simulations_ = 0;
};

}  // namespace cpd
