#include "cpdesign/potential.hpp"

#include <algorithm>
#include <cmath>

namespace cpd {

namespace {

void check_compatible(const ProbeRecord& a, const ProbeRecord& b) {
  if (a.dt != b.dt) throw ConfigError("probe records have different time steps");
  if (a.series.size() != b.series.size()) throw ConfigError("probe records have different lengths");
}

double kernel_sum(const ConvolutionKernel& kernel, const ProbeRecord& record) {
  if (kernel.dt != record.dt) throw ConfigError("kernel and probe record have different time steps");
  if (kernel.samples.size() < record.series.size()) throw ConfigError("kernel is shorter than the probe record");
  double acc = 0.0;
  for (std::size_t n = 0; n < record.series.size(); ++n) acc += kernel.samples[n] * record.series[n];
  return acc * record.dt;
}

}  // namespace

ProbeRecord scattered_series(const ProbeRecord& total, const ProbeRecord& vacuum) {
  check_compatible(total, vacuum);
  if (!(total.probe.position == vacuum.probe.position) || total.probe.component != vacuum.probe.component) {
    throw ConfigError("scattered series needs records from the same probe");
  }
  ProbeRecord out = total;
  for (std::size_t n = 0; n < out.series.size(); ++n) out.series[n] -= vacuum.series[n];
  return out;
}

ProbeRecord gradient_probe(const ProbeRecord& plus, const ProbeRecord& minus) {
  check_compatible(plus, minus);
  const double spacing = plus.probe.position.x - minus.probe.position.x;
  if (!(spacing > 0.0)) throw ConfigError("gradient probe needs plus on the +x side of minus");
  ProbeRecord out = plus;
  out.probe.position = 0.5 * (plus.probe.position + minus.probe.position);
  for (std::size_t n = 0; n < out.series.size(); ++n) {
    out.series[n] = (plus.series[n] - minus.series[n]) / spacing;
  }
  return out;
}

bool series_decayed(const ProbeRecord& record, double threshold) {
  double peak = 0.0;
  for (double v : record.series) peak = std::max(peak, std::abs(v));
  if (peak == 0.0) return true;
  const std::size_t tail = record.series.size() - record.series.size() / 10;
  double tail_peak = 0.0;
  for (std::size_t n = tail; n < record.series.size(); ++n) tail_peak = std::max(tail_peak, std::abs(record.series[n]));
  return tail_peak <= threshold * peak;
}

PotentialSample cp_potential(const ConvolutionKernel& kernel, const ProbeRecord& scattered) {
  PotentialSample s;
  s.atom = scattered.probe.position;
  s.potential = -kernel_sum(kernel, scattered);
  s.steps = static_cast<int>(scattered.series.size());
  s.flagged = !series_decayed(scattered);
  return s;
}

double merit_force(const ConvolutionKernel& kernel, const ProbeRecord& gradient) { return kernel_sum(kernel, gradient); }

// ---------------------------------------------------------------------------------------------

CasimirPolderEvaluator::CasimirPolderEvaluator(EvaluatorSettings settings) : settings_(std::move(settings)) {
  settings_.simulation.validate();
  settings_.atom.validate();
  const Vec3& ax = settings_.atom.axis;
  int axis = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(std::abs(ax[a]) - 1.0) < 1e-12) axis = a;
  }
  if (axis < 0) throw ConfigError("atom polarization must lie along a coordinate axis");
  if (settings_.simulation.dimensions == 2 && axis == 2) {
    throw ConfigError("2D runs support in-plane (x or y) atom polarization only");
  }
  component_ = static_cast<Component>(axis);
  source_ = build_source_waveform(settings_.source_cutoff, settings_.source_amplitude, settings_.simulation.dt(),
                                  settings_.simulation.steps);
  kernel_ = build_kernel(settings_.atom, source_, settings_.kernel);
}

Vec3 CasimirPolderEvaluator::snap_atom(const Vec3& atom) const {
  const Lattice lat = settings_.simulation.lattice();
  const int c = static_cast<int>(component_);
  Vec3 out;
  for (int a = 0; a < 3; ++a) {
    if (!lat.shape.active(a)) {
      out[a] = 0.0;
      continue;
    }
    const double shift = a == c ? 0.5 : 0.0;
    const double u = lat.coordinate(atom, a) - shift;
    out[a] = lat.origin[a] + lat.dx * (std::round(u) + shift);
  }
  return out;
}

PointSource CasimirPolderEvaluator::atom_source(const Vec3& atom) const {
  PointSource s;
  s.position = snap_atom(atom);
  s.orientation = settings_.atom.axis;
  s.waveform = source_.samples;
  return s;
}

std::vector<ProbePosition> CasimirPolderEvaluator::atom_probes(const Vec3& atom) const {
  const Vec3 r = snap_atom(atom);
  const Vec3 h{probe_offset(), 0.0, 0.0};
  return {{r, component_}, {r + h, component_}, {r - h, component_}};
}

void CasimirPolderEvaluator::check_atom_in_vacuum(const MediaMap& media, const Vec3& snapped) const {
  const Lattice& lat = media.lattice;
  int idx[3];
  for (int a = 0; a < 3; ++a) {
    idx[a] = lat.shape.active(a) ? static_cast<int>(std::floor(lat.coordinate(snapped, a))) : 0;
  }
  const int c = static_cast<int>(component_);
  for (int o = 0; o <= 1; ++o) {
    int j[3] = {idx[0], idx[1], idx[2]};
    if (lat.shape.active(c)) j[c] += o;
    if (!lat.shape.contains(j[0], j[1], j[2])) throw ConfigError("atom outside the lattice");
    const auto n = lat.shape.index(j[0], j[1], j[2]);
    if (media.fill[n] > 0.0 || media.pec[n] != 0) {
      throw ConfigError("atom position collides with the structure");
    }
  }
}

const std::vector<ProbeRecord>& CasimirPolderEvaluator::vacuum_records(const Vec3& snapped) {
  const double dx = settings_.simulation.dx();
  const auto key = std::make_tuple(std::lround(snapped.x / dx * 2.0), std::lround(snapped.y / dx * 2.0),
                                   std::lround(snapped.z / dx * 2.0));
  auto it = vacuum_cache_.find(key);
  if (it != vacuum_cache_.end()) return it->second;
  const auto& cfg = settings_.simulation;
  Simulation sim(cfg, MediaMap::vacuum(cfg.lattice()));
  RunRequest req;
  req.sources.push_back(atom_source(snapped));
  req.probes = atom_probes(snapped);
  auto out = execute(sim, req);
  ++simulations_;
  return vacuum_cache_.emplace(key, std::move(out.probes)).first->second;
}

AtomResponse CasimirPolderEvaluator::evaluate(const MediaMap& media, const Vec3& atom, const GridBand* band, int stride,
                                              std::size_t memory_budget) {
  const Vec3 r = snap_atom(atom);
  check_atom_in_vacuum(media, r);
  const auto& vac = vacuum_records(r);

  const auto& cfg = settings_.simulation;
  Simulation sim(cfg, media);
  RunRequest req;
  req.sources.push_back(atom_source(r));
  req.probes = atom_probes(r);
  req.band = band;
  req.stride = stride;
  req.memory_budget = memory_budget;
  auto out = execute(sim, req);
  ++simulations_;

  AtomResponse resp;
  resp.atom = r;
  resp.scattered = scattered_series(out.probes[0], vac[0]);
  const auto plus = scattered_series(out.probes[1], vac[1]);
  const auto minus = scattered_series(out.probes[2], vac[2]);
  resp.gradient = gradient_probe(plus, minus);
  resp.potential = cp_potential(kernel_, resp.scattered);
  resp.potential.resolution = cfg.resolution;
  resp.potential.geometry_hash = media.hash();
  resp.merit = merit_force(kernel_, resp.gradient);
  resp.band = std::move(out.volume);
  return resp;
}

PotentialSample CasimirPolderEvaluator::potential(const MediaMap& media, const Vec3& atom) {
  return evaluate(media, atom).potential;
}

double CasimirPolderEvaluator::merit(const MediaMap& media, const Vec3& atom) { return evaluate(media, atom).merit; }

double CasimirPolderEvaluator::force_x(const MediaMap& media, const Vec3& atom, double displacement) {
  const double dx = settings_.simulation.dx();
  if (displacement < dx - 1e-12) throw ConfigError("force displacement must be at least one cell");
  const Vec3 half{0.5 * displacement, 0.0, 0.0};
  const Vec3 plus = snap_atom(atom + half);
  const Vec3 minus = snap_atom(atom - half);
  const double separation = plus.x - minus.x;
  if (!(separation > 0.0)) throw ConfigError("force displacement collapses onto a single lattice site");
  const double up = potential(media, plus).potential;
  const double um = potential(media, minus).potential;
  return -(up - um) / separation;
}

}  // namespace cpd
