#pragma once

#include <vector>

#include "cpdesign/potential.hpp"

namespace cpd {

/// How the merit's x-derivative enters the adjoint.
enum class GradientForm {
  SourceDifference,   // adjoint dipole pair at r_A +- h carrying +-K / 2h; velocity from the plain overlap
  OverlapDerivative,  // single adjoint dipole at r_A; velocity is the x-derivative of the overlap on the band
};

/// How the adjoint waveform and its record are paired with forward time.
enum class TimeConvention {
  ReversedSource,  // drive with K(T - t), read the record backwards
  DirectSource,    // drive with K(t), read the record backwards
};

/// Which forward field enters the overlap.
enum class ForwardField { Total, Scattered };

struct AdjointOptions {
  GradientForm form = GradientForm::SourceDifference;
  TimeConvention time = TimeConvention::ReversedSource;
  ForwardField forward = ForwardField::Total;
  int stride = 2;
  std::size_t memory_budget = std::size_t{2} << 30;
  int threads = 1;  // 2 or more runs the forward and adjoint simulations concurrently
};

struct AdjointSource {
  std::vector<PointSource> sources;
  TimeConvention time = TimeConvention::ReversedSource;
  double dt = 0.0;
};

AdjointSource make_adjoint_source(const CasimirPolderEvaluator& evaluator, const Vec3& atom,
                                  const AdjointOptions& options);

/// Merit sensitivity per band node: dF ~ sum_node values[node] * d(fill)[node].
/// The descent velocity is -values.
struct OverlapField {
  GridBand band;
  std::vector<double> values;

  std::vector<double> velocity() const;
};

/// Sample-order reversal; applying it twice is the identity.
VolumeRecord reverse_time(const VolumeRecord& record);

/// Forward run with the atom dipole, recording the band. Scattered mode subtracts a vacuum band run.
AtomResponse run_forward(CasimirPolderEvaluator& evaluator, const MediaMap& media, const Vec3& atom,
                         const GridBand& band, const AdjointOptions& options);

/// Adjoint run on the same geometry. The returned record is already mapped onto forward sample times
/// (time-reversed and aligned), so it pairs sample-by-sample with the forward band record.
VolumeRecord run_adjoint(const CasimirPolderEvaluator& evaluator, const MediaMap& media, const Vec3& atom,
                         const GridBand& band, const AdjointOptions& options);

/// Per-node time integral sum_t a(t) . b(t) dt over the band. Symmetric in its arguments.
std::vector<double> overlap_integral(const VolumeRecord& a, const VolumeRecord& b);

/// Polarisation current per unit fill that a Drude medium would carry when driven by the recorded field,
/// using the solver's own discrete update (exact at stride 1).
VolumeRecord polarization_response(const VolumeRecord& field, const DrudeParameters& drude);

/// Sensitivity of the merit to the node fill fractions, from forward and aligned adjoint records.
OverlapField overlap_velocity(const VolumeRecord& forward, const VolumeRecord& adjoint, const DrudeParameters& drude,
                              const Lattice& lattice, GradientForm form = GradientForm::SourceDifference);

struct SensitivityResult {
  AtomResponse forward;
  OverlapField overlap;
};

/// Forward run, adjoint run and overlap on `band` for the geometry in `media`.
SensitivityResult merit_sensitivity(CasimirPolderEvaluator& evaluator, const MediaMap& media, const Vec3& atom,
                                    const GridBand& band, const AdjointOptions& options);

}  // namespace cpd
