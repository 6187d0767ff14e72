#include "cpdesign/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <future>

namespace cpd {

namespace {

void check_same_band(const VolumeRecord& a, const VolumeRecord& b) {
  if (!(a.band.shape == b.band.shape) || a.band.nodes != b.band.nodes) throw ConfigError("band records cover different nodes");
  if (a.stride != b.stride || a.samples != b.samples || a.dt != b.dt) {
    throw ConfigError("band records have different time sampling");
  }
}

}  // namespace

std::vector<double> OverlapField::velocity() const {
  std::vector<double> v(values.size());
  std::transform(values.begin(), values.end(), v.begin(), [](double s) { return -s; });
  return v;
}

AdjointSource make_adjoint_source(const CasimirPolderEvaluator& evaluator, const Vec3& atom,
                                  const AdjointOptions& options) {
  const auto& k = evaluator.kernel().samples;
  const std::size_t n = k.size();
  std::vector<double> wave(n, 0.0);
  if (options.time == TimeConvention::ReversedSource) {
    for (std::size_t q = 0; q < n; ++q) wave[q] = k[n - 1 - q];
    wave[0] = 0.0;  // K(T) is tapered to zero already
  } else {
    for (std::size_t q = 1; q < n; ++q) wave[q] = k[q - 1];
  }

  AdjointSource out;
  out.time = options.time;
  out.dt = evaluator.kernel().dt;
  const Vec3 r = evaluator.snap_atom(atom);
  const Vec3 axis = evaluator.settings().atom.axis;
  if (options.form == GradientForm::SourceDifference) {
    const double h = evaluator.probe_offset();
    const Vec3 dh{h, 0.0, 0.0};
    std::vector<double> plus(wave), minus(wave);
    for (std::size_t q = 0; q < n; ++q) {
      plus[q] = wave[q] / (2.0 * h);
      minus[q] = -wave[q] / (2.0 * h);
    }
    out.sources.push_back({r + dh, axis, std::move(plus)});
    out.sources.push_back({r - dh, axis, std::move(minus)});
  } else {
    out.sources.push_back({r, axis, std::move(wave)});
  }
  return out;
}

VolumeRecord reverse_time(const VolumeRecord& record) {
  VolumeRecord out = record;
  const std::size_t block = record.band.nodes.size() * 3;
  for (std::size_t s = 0; s < record.samples; ++s) {
    std::copy_n(record.data.begin() + static_cast<std::ptrdiff_t>(s * block), block,
                out.data.begin() + static_cast<std::ptrdiff_t>((record.samples - 1 - s) * block));
  }
  return out;
}

AtomResponse run_forward(CasimirPolderEvaluator& evaluator, const MediaMap& media, const Vec3& atom,
                         const GridBand& band, const AdjointOptions& options) {
  auto resp = evaluator.evaluate(media, atom, &band, options.stride, options.memory_budget);
  if (options.forward == ForwardField::Scattered && !band.empty()) {
    const auto& cfg = evaluator.simulation();
    Simulation vac(cfg, MediaMap::vacuum(cfg.lattice()));
    const auto rec = record_volume(vac, evaluator.atom_source(atom), band, options.stride, options.memory_budget);
    for (std::size_t i = 0; i < rec.data.size(); ++i) resp.band.data[i] -= rec.data[i];
  }
  return resp;
}

VolumeRecord run_adjoint(const CasimirPolderEvaluator& evaluator, const MediaMap& media, const Vec3& atom,
                         const GridBand& band, const AdjointOptions& options) {
  const auto src = make_adjoint_source(evaluator, atom, options);
  const auto& cfg = evaluator.simulation();
  Simulation sim(cfg, media);
  RunRequest req;
  req.sources = src.sources;
  req.band = &band;
  req.stride = options.stride;
  req.memory_budget = options.memory_budget;
  const VolumeRecord raw = execute(sim, req).volume;

  // Forward sample m (step m*s) pairs with adjoint step N - 3/2 - m*s.
  VolumeRecord out = raw;
  const std::size_t block = band.nodes.size() * 3;
  if (block == 0) return out;
  const double s = options.stride;
  const double last = static_cast<double>(cfg.steps) - 1.5;
  auto sample = [&](long j, std::size_t i) -> double {
    if (j < 0) return 0.0;
    j = std::min<long>(j, static_cast<long>(raw.samples) - 1);
    return raw.data[static_cast<std::size_t>(j) * block + i];
  };
  for (std::size_t m = 0; m < raw.samples; ++m) {
    const double js = (last - static_cast<double>(m) * s) / s;
    const long j0 = static_cast<long>(std::floor(js));
    const double w = js - static_cast<double>(j0);
    for (std::size_t i = 0; i < block; ++i) {
      out.data[m * block + i] = (1.0 - w) * sample(j0, i) + w * sample(j0 + 1, i);
    }
  }
  return out;
}

std::vector<double> overlap_integral(const VolumeRecord& a, const VolumeRecord& b) {
  check_same_band(a, b);
  const std::size_t nodes = a.band.nodes.size();
  std::vector<double> out(nodes, 0.0);
  for (std::size_t m = 0; m < a.samples; ++m) {
    const double* pa = a.data.data() + m * nodes * 3;
    const double* pb = b.data.data() + m * nodes * 3;
    for (std::size_t n = 0; n < nodes; ++n) {
      out[n] += pa[3 * n] * pb[3 * n] + pa[3 * n + 1] * pb[3 * n + 1] + pa[3 * n + 2] * pb[3 * n + 2];
    }
  }
  const double h = a.sample_spacing();
  for (double& v : out) v *= h;
  return out;
}

VolumeRecord polarization_response(const VolumeRecord& field, const DrudeParameters& drude) {
  VolumeRecord y = field;
  std::fill(y.data.begin(), y.data.end(), 0.0);
  const std::size_t block = field.band.nodes.size() * 3;
  if (block == 0 || field.samples == 0) return y;

  const double dt = field.dt;
  const int s = field.stride;
  const double half_loss = 0.5 * drude.collision_rate * dt;
  const double ka = (1.0 - half_loss) / (1.0 + half_loss);
  const double kb = drude.plasma_frequency * drude.plasma_frequency * dt / (1.0 + half_loss);
  // Sub-steps between samples see E interpolated linearly.
  double a = 0.0, b = 0.0, kas = 1.0;
  for (int j = 0; j < s; ++j) {
    a += kas * (1.0 - static_cast<double>(j) / s);
    b += kas * static_cast<double>(j) / s;
    kas *= ka;
  }
  a *= kb;
  b *= kb;
  const double bound = drude.eps_inf - 1.0;
  const double h = field.sample_spacing();

  std::vector<double> state(block, 0.0);
  for (std::size_t m = 0; m < field.samples; ++m) {
    const double* e = field.data.data() + m * block;
    const double* prev = m > 0 ? e - block : nullptr;
    const double* next = m + 1 < field.samples ? e + block : nullptr;
    double* out = y.data.data() + m * block;
    for (std::size_t i = 0; i < block; ++i) {
      state[i] = kas * state[i] + a * e[i] + (prev ? b * prev[i] : 0.0);
      double v = state[i];
      if (bound != 0.0) {
        const double ep = prev ? prev[i] : 0.0;
        const double en = next ? next[i] : e[i];
        v += bound * (en - ep) / (2.0 * h);
      }
      out[i] = v;
    }
  }
  return y;
}

OverlapField overlap_velocity(const VolumeRecord& forward, const VolumeRecord& adjoint, const DrudeParameters& drude,
                              const Lattice& lattice, GradientForm form) {
  check_same_band(forward, adjoint);
  if (!(forward.band.shape == lattice.shape)) throw ConfigError("band does not belong to this lattice");
  const auto y = polarization_response(forward, drude);
  auto o = overlap_integral(y, adjoint);
  const double cell = std::pow(lattice.dx, lattice.shape.dims());
  for (double& v : o) v *= cell;

  OverlapField field;
  field.band = forward.band;
  if (form == GradientForm::SourceDifference) {
    field.values = std::move(o);
    return field;
  }
  const auto& nodes = forward.band.nodes;
  auto find = [&](std::size_t idx) -> long {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), idx);
    if (it == nodes.end() || *it != idx) return -1;
    return static_cast<long>(it - nodes.begin());
  };
  field.values.assign(nodes.size(), 0.0);
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const auto c = lattice.shape.unflatten(nodes[n]);
    const long hi = c[0] + 1 < lattice.shape.nx ? find(nodes[n] + 1) : -1;
    const long lo = c[0] > 0 ? find(nodes[n] - 1) : -1;
    if (hi >= 0 && lo >= 0) {
      field.values[n] = (o[static_cast<std::size_t>(hi)] - o[static_cast<std::size_t>(lo)]) / (2.0 * lattice.dx);
    } else if (hi >= 0) {
      field.values[n] = (o[static_cast<std::size_t>(hi)] - o[n]) / lattice.dx;
    } else if (lo >= 0) {
      field.values[n] = (o[n] - o[static_cast<std::size_t>(lo)]) / lattice.dx;
    }
  }
  return field;
}

SensitivityResult merit_sensitivity(CasimirPolderEvaluator& evaluator, const MediaMap& media, const Vec3& atom,
                                    const GridBand& band, const AdjointOptions& options) {
  if (media.pec.end() != std::find(media.pec.begin(), media.pec.end(), std::uint8_t{1})) {
    throw ConfigError("shape sensitivities need a Drude material, not a perfect conductor");
  }
  SensitivityResult out;
  if (options.threads > 1) {
    const CasimirPolderEvaluator& shared = evaluator;
    auto pending = std::async(std::launch::async, [&] { return run_adjoint(shared, media, atom, band, options); });
    out.forward = run_forward(evaluator, media, atom, band, options);
    const auto adj = pending.get();
    out.overlap = overlap_velocity(out.forward.band, adj, media.drude, media.lattice, options.form);
    return out;
  }
  out.forward = run_forward(evaluator, media, atom, band, options);
  const auto adj = run_adjoint(evaluator, media, atom, band, options);
  out.overlap = overlap_velocity(out.forward.band, adj, media.drude, media.lattice, options.form);
  return out;
}

}  // namespace cpd
