#include "cpdesign/fdtd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cpdesign/hash.hpp"

namespace cpd {

namespace {

constexpr int kPmlOrder = 3;
constexpr double kPmlAlphaMax = 0.05;
constexpr int kFiniteCheckInterval = 200;

struct Box {
  int lo[3];
  int hi[3];
};

template <class F>
inline void for_each_in(const Box& b, const GridShape& s, F&& f) {
  for (int k = b.lo[2]; k < b.hi[2]; ++k) {
    for (int j = b.lo[1]; j < b.hi[1]; ++j) {
      std::size_t idx = s.index(b.lo[0], j, k);
      for (int i = b.lo[0]; i < b.hi[0]; ++i, ++idx) f(idx, i, j, k);
    }
  }
}

// Update region of the magnetic component along axis t.
Box magnetic_box(const GridShape& s, int t) {
  Box b{};
  for (int a = 0; a < 3; ++a) {
    b.lo[a] = 0;
    if (a == t) {
      b.hi[a] = s.extent(a);
    } else {
      b.hi[a] = s.active(a) ? s.extent(a) - 1 : 1;
    }
  }
  return b;
}

// Update region of the electric component along axis t; outer-wall tangential samples stay zero.
Box electric_box(const GridShape& s, int t) {
  Box b{};
  for (int a = 0; a < 3; ++a) {
    if (!s.active(a)) {
      b.lo[a] = 0;
      b.hi[a] = 1;
    } else if (a == t) {
      b.lo[a] = 0;
      b.hi[a] = s.extent(a) - 1;
    } else {
      b.lo[a] = 1;
      b.hi[a] = s.extent(a) - 1;
    }
  }
  return b;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// SimulationConfig

void SimulationConfig::validate() const {
  if (dimensions != 2 && dimensions != 3) throw ConfigError("dimensions must be 2 or 3");
  if (!(domain_size > 0.0)) throw ConfigError("domain size must be positive");
  if (resolution < 8) throw ConfigError("resolution must be at least 8 cells per L0");
  if (!(pml_thickness >= 0.5)) throw ConfigError("PML thickness must be at least 0.5 L0");
  if (!(courant > 0.0) || courant > 1.0 / std::sqrt(static_cast<double>(dimensions)) + 1e-12) {
    throw ConfigError("Courant factor must lie in (0, 1/sqrt(d)]");
  }
  if (steps < 1) throw ConfigError("step count must be positive");
}

int SimulationConfig::cells_per_axis() const {
  return static_cast<int>(std::lround((domain_size + 2.0 * pml_thickness) * resolution));
}

int SimulationConfig::pml_cells() const { return static_cast<int>(std::lround(pml_thickness * resolution)); }

Lattice SimulationConfig::lattice() const {
  const int n = cells_per_axis() + 1;
  Lattice lat;
  lat.dx = dx();
  lat.shape = {n, n, dimensions == 3 ? n : 1};
  const double half = 0.5 * cells_per_axis() * lat.dx;
  lat.origin = {-half, -half, dimensions == 3 ? -half : 0.0};
  return lat;
}

int SimulationConfig::steps_for_duration(double duration) const {
  return static_cast<int>(std::ceil(duration / dt() - 1e-9));
}

bool SimulationConfig::in_interior(const Vec3& p) const {
  const double half = 0.5 * domain_size + 1e-9;
  for (int a = 0; a < dimensions; ++a) {
    if (std::abs(p[a]) > half) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------------------------
// MediaMap

MediaMap MediaMap::vacuum(const Lattice& lattice) {
  MediaMap m;
  m.lattice = lattice;
  m.drude = {1.0, 0.0, 0.0};
  m.fill.assign(lattice.shape.size(), 0.0);
  m.pec.assign(lattice.shape.size(), 0);
  return m;
}

bool MediaMap::has_material() const {
  return std::any_of(fill.begin(), fill.end(), [](double f) { return f > 0.0; }) ||
         std::any_of(pec.begin(), pec.end(), [](std::uint8_t p) { return p != 0; });
}

std::uint64_t MediaMap::hash() const {
  ContentHasher h;
  h.add(lattice.shape.nx).add(lattice.shape.ny).add(lattice.shape.nz).add(lattice.dx);
  h.add(lattice.origin.x).add(lattice.origin.y).add(lattice.origin.z);
  h.add(drude.eps_inf).add(drude.plasma_frequency).add(drude.collision_rate);
  h.add(std::span<const double>(fill));
  h.add(std::span<const std::uint8_t>(pec));
  return h.digest64();
}

// ---------------------------------------------------------------------------------------------
// Simulation

Simulation::Simulation(const SimulationConfig& config, const MediaMap& media)
    : config_(config), lattice_(config.lattice()) {
  config_.validate();
  shape_ = lattice_.shape;
  if (!(media.lattice == lattice_) || media.fill.size() != shape_.size() || media.pec.size() != shape_.size()) {
    throw ConfigError("media map dimensions do not match the simulation lattice");
  }
  dx_ = config_.dx();
  dt_ = config_.dt();
  pml_cells_ = config_.pml_cells();
  for (int c = 0; c < 3; ++c) {
    e_[c].assign(shape_.size(), 0.0);
    h_[c].assign(shape_.size(), 0.0);
  }
  build_media(media);
  build_pml();
}

void Simulation::build_media(const MediaMap& media) {
  const auto& d = media.drude;
  const bool dispersive = d.plasma_frequency > 0.0;
  const double half_loss = 0.5 * d.collision_rate * dt_;
  drude_ka_ = (1.0 - half_loss) / (1.0 + half_loss);
  const double kb_full = dispersive ? d.plasma_frequency * d.plasma_frequency * dt_ / (1.0 + half_loss) : 0.0;

  for (int c = 0; c < 3; ++c) {
    inv_eps_[c].assign(shape_.size(), 1.0);
    drude_[c].clear();
    const auto stride = shape_.stride(c);
    const Box box = electric_box(shape_, c);
    for_each_in(box, shape_, [&](std::size_t idx, int, int, int) {
      double fill = media.fill[idx];
      bool pec = media.pec[idx] != 0;
      if (stride != 0) {
        const std::size_t other = idx + static_cast<std::size_t>(stride);
        fill = 0.5 * (fill + media.fill[other]);
        pec = pec && media.pec[other] != 0;
      }
      if (pec) {
        inv_eps_[c][idx] = 0.0;
        return;
      }
      if (fill > 0.0) {
        inv_eps_[c][idx] = 1.0 / (1.0 + fill * (d.eps_inf - 1.0));
        if (dispersive) drude_[c].push_back({idx, fill * kb_full});
      }
    });
    drude_current_[c].assign(drude_[c].size(), 0.0);
  }
}

void Simulation::build_pml() {
  const int n_cells = config_.cells_per_axis();
  const double inner = 0.5 * config_.domain_size;
  const double sigma_max = 0.8 * (kPmlOrder + 1) / dx_;
  auto coefficients = [&](double x, double& b, double& c) {
    double depth = (std::abs(x) - inner) / config_.pml_thickness;
    depth = std::clamp(depth, 0.0, 1.0);
    if (depth <= 0.0) {
      b = 1.0;
      c = 0.0;
      return;
    }
    const double sigma = sigma_max * std::pow(depth, kPmlOrder);
    const double alpha = kPmlAlphaMax * (1.0 - depth);
    b = std::exp(-(sigma + alpha) * dt_);
    c = sigma / (sigma + alpha) * (b - 1.0);
  };
  for (int a = 0; a < 3; ++a) {
    const int n = shape_.extent(a);
    pml_b_e_[a].assign(n, 1.0);
    pml_c_e_[a].assign(n, 0.0);
    pml_b_h_[a].assign(n, 1.0);
    pml_c_h_[a].assign(n, 0.0);
    if (!shape_.active(a)) continue;
    for (int i = 0; i < n; ++i) {
      const double x_int = lattice_.origin[a] + dx_ * i;
      coefficients(x_int, pml_b_e_[a][i], pml_c_e_[a][i]);
      coefficients(x_int + 0.5 * dx_, pml_b_h_[a][i], pml_c_h_[a][i]);
    }
  }
  (void)n_cells;

  pml_terms_.clear();
  const int slab = 2 * (pml_cells_ + 1);
  for (int magnetic = 1; magnetic >= 0; --magnetic) {
    for (int t = 0; t < 3; ++t) {
      for (int a = 0; a < 3; ++a) {
        if (a == t || !shape_.active(a)) continue;
        PmlTerm term;
        term.magnetic = magnetic != 0;
        term.target = t;
        term.axis = a;
        if (a == (t + 1) % 3) {
          term.source = (t + 2) % 3;
          term.sign = 1.0;
        } else {
          term.source = (t + 1) % 3;
          term.sign = -1.0;
        }
        std::size_t count = 1;
        for (int b = 0; b < 3; ++b) count *= static_cast<std::size_t>(b == a ? slab : shape_.extent(b));
        term.psi.assign(count, 0.0);
        pml_terms_.push_back(std::move(term));
      }
    }
  }
}

std::size_t Simulation::slab_index(const PmlTerm& term, int i, int j, int k) const {
  int c[3] = {i, j, k};
  const int n = shape_.extent(term.axis);
  const int p = pml_cells_;
  int& l = c[term.axis];
  l = l <= p ? l : l - (n - 1 - p) + (p + 1);
  int ext[3] = {shape_.nx, shape_.ny, shape_.nz};
  ext[term.axis] = 2 * (p + 1);
  return (static_cast<std::size_t>(c[2]) * ext[1] + c[1]) * ext[0] + c[0];
}

void Simulation::add_source(const PointSource& source) {
  if (!config_.in_interior(source.position)) {
    throw ConfigError("point source must lie inside the non-PML region");
  }
  if (source.waveform.empty()) throw ConfigError("point source waveform is empty");
  double peak = 0.0;
  for (double w : source.waveform) peak = std::max(peak, std::abs(w));
  if (std::abs(source.waveform.front()) > 1e-12 * peak) {
    throw ConfigError("point source waveform must start at zero");
  }
  if (static_cast<int>(source.waveform.size()) > config_.steps + 1) {
    throw ConfigError("source waveform is longer than the run");
  }
  const double norm = source.orientation.norm();
  if (!(norm > 0.0)) throw ConfigError("point source orientation must be non-zero");

  const double cell_volume = std::pow(dx_, shape_.dims());
  waveforms_.push_back(source.waveform);
  const std::size_t wf = waveforms_.size() - 1;
  for (int c = 0; c < 3; ++c) {
    const double projection = source.orientation[c] / norm;
    if (std::abs(projection) < 1e-14) continue;
    int idx[3];
    for (int a = 0; a < 3; ++a) {
      if (!shape_.active(a)) {
        idx[a] = 0;
        continue;
      }
      double u = lattice_.coordinate(source.position, a);
      if (a == c) u -= 0.5;
      idx[a] = static_cast<int>(std::lround(u));
    }
    const Box box = electric_box(shape_, c);
    for (int a = 0; a < 3; ++a) {
      if (idx[a] < box.lo[a] || idx[a] >= box.hi[a]) throw ConfigError("point source outside the lattice");
    }
    sources_.push_back({c, shape_.index(idx[0], idx[1], idx[2]), projection / cell_volume, wf});
  }
}

void Simulation::update_h() {
  const double c = dt_ / dx_;
  const auto sx = static_cast<std::size_t>(shape_.stride(0));
  const auto sy = static_cast<std::size_t>(shape_.stride(1));
  const auto sz = static_cast<std::size_t>(shape_.stride(2));
  double* hx = h_[0].data();
  double* hy = h_[1].data();
  double* hz = h_[2].data();
  const double* ex = e_[0].data();
  const double* ey = e_[1].data();
  const double* ez = e_[2].data();

  for_each_in(magnetic_box(shape_, 0), shape_, [&](std::size_t id, int, int, int) {
    hx[id] -= c * ((ez[id + sy] - ez[id]) - (ey[id + sz] - ey[id]));
  });
  for_each_in(magnetic_box(shape_, 1), shape_, [&](std::size_t id, int, int, int) {
    hy[id] -= c * ((ex[id + sz] - ex[id]) - (ez[id + sx] - ez[id]));
  });
  for_each_in(magnetic_box(shape_, 2), shape_, [&](std::size_t id, int, int, int) {
    hz[id] -= c * ((ey[id + sx] - ey[id]) - (ex[id + sy] - ex[id]));
  });
}

void Simulation::update_e() {
  // Polarisation current J^{n+1/2} from E^n before E is overwritten.
  for (int c = 0; c < 3; ++c) {
    const double* e = e_[c].data();
    auto& cur = drude_current_[c];
    const auto& entries = drude_[c];
    for (std::size_t m = 0; m < entries.size(); ++m) {
      cur[m] = drude_ka_ * cur[m] + entries[m].kb * e[entries[m].index];
    }
  }

  const double c = dt_ / dx_;
  const auto sx = static_cast<std::size_t>(shape_.stride(0));
  const auto sy = static_cast<std::size_t>(shape_.stride(1));
  const auto sz = static_cast<std::size_t>(shape_.stride(2));
  double* ex = e_[0].data();
  double* ey = e_[1].data();
  double* ez = e_[2].data();
  const double* hx = h_[0].data();
  const double* hy = h_[1].data();
  const double* hz = h_[2].data();
  const double* ix = inv_eps_[0].data();
  const double* iy = inv_eps_[1].data();
  const double* iz = inv_eps_[2].data();

  for_each_in(electric_box(shape_, 0), shape_, [&](std::size_t id, int, int, int) {
    ex[id] += c * ix[id] * ((hz[id] - hz[id - sy]) - (hy[id] - hy[id - sz]));
  });
  for_each_in(electric_box(shape_, 1), shape_, [&](std::size_t id, int, int, int) {
    ey[id] += c * iy[id] * ((hx[id] - hx[id - sz]) - (hz[id] - hz[id - sx]));
  });
  for_each_in(electric_box(shape_, 2), shape_, [&](std::size_t id, int, int, int) {
    ez[id] += c * iz[id] * ((hy[id] - hy[id - sx]) - (hx[id] - hx[id - sy]));
  });

  for (int comp = 0; comp < 3; ++comp) {
    double* e = e_[comp].data();
    const double* ie = inv_eps_[comp].data();
    const auto& cur = drude_current_[comp];
    const auto& entries = drude_[comp];
    for (std::size_t m = 0; m < entries.size(); ++m) {
      const std::size_t id = entries[m].index;
      e[id] -= dt_ * ie[id] * cur[m];
    }
  }
}

void Simulation::apply_pml_term(PmlTerm& term) {
  const int a = term.axis;
  const int n = shape_.extent(a);
  const int p = pml_cells_;
  Box box = term.magnetic ? magnetic_box(shape_, term.target) : electric_box(shape_, term.target);
  const auto stride = static_cast<std::size_t>(shape_.stride(a));
  const double* src = term.magnetic ? e_[term.source].data() : h_[term.source].data();
  double* dst = term.magnetic ? h_[term.target].data() : e_[term.target].data();
  const double* ie = inv_eps_[term.target].data();
  const auto& bcoef = term.magnetic ? pml_b_h_[a] : pml_b_e_[a];
  const auto& ccoef = term.magnetic ? pml_c_h_[a] : pml_c_e_[a];
  const double inv_dx = 1.0 / dx_;

  const int ranges[2][2] = {{box.lo[a], std::min(box.hi[a], p + 1)}, {std::max(box.lo[a], n - 1 - p), box.hi[a]}};
  for (const auto& r : ranges) {
    Box sub = box;
    sub.lo[a] = r[0];
    sub.hi[a] = r[1];
    if (sub.lo[a] >= sub.hi[a]) continue;
    for_each_in(sub, shape_, [&](std::size_t id, int i, int j, int k) {
      const int pos = a == 0 ? i : (a == 1 ? j : k);
      double& psi = term.psi[slab_index(term, i, j, k)];
      if (term.magnetic) {
        psi = bcoef[pos] * psi + ccoef[pos] * (src[id + stride] - src[id]) * inv_dx;
        dst[id] -= dt_ * term.sign * psi;
      } else {
        psi = bcoef[pos] * psi + ccoef[pos] * (src[id] - src[id - stride]) * inv_dx;
        dst[id] += dt_ * ie[id] * term.sign * psi;
      }
    });
  }
}

void Simulation::apply_pml_h() {
  for (auto& term : pml_terms_) {
    if (term.magnetic) apply_pml_term(term);
  }
}

void Simulation::apply_pml_e() {
  for (auto& term : pml_terms_) {
    if (!term.magnetic) apply_pml_term(term);
  }
}

void Simulation::step() {
  update_h();
  apply_pml_h();
  update_e();
  apply_pml_e();
  for (const auto& s : sources_) {
    const auto& w = waveforms_[s.waveform];
    const auto n = static_cast<std::size_t>(step_);
    const double a = n < w.size() ? w[n] : 0.0;
    const double b = n + 1 < w.size() ? w[n + 1] : 0.0;
    e_[s.component][s.index] -= dt_ * inv_eps_[s.component][s.index] * s.weight * 0.5 * (a + b);
  }
  ++step_;
}

double Simulation::sample(const ProbePosition& probe) const {
  const int c = static_cast<int>(probe.component);
  const Box box = electric_box(shape_, c);
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    if (!shape_.active(a)) {
      base[a] = 0;
      frac[a] = 0.0;
      continue;
    }
    double u = lattice_.coordinate(probe.position, a);
    if (a == c) u -= 0.5;
    const double eps = 1e-9;
    if (u < -eps || u > shape_.extent(a) - 1 + eps) throw ConfigError("probe outside the simulation domain");
    int b = static_cast<int>(std::floor(u + eps));
    b = std::clamp(b, 0, shape_.extent(a) - 2);
    base[a] = b;
    frac[a] = std::clamp(u - b, 0.0, 1.0);
    if (frac[a] < eps) frac[a] = 0.0;
  }
  const auto& e = e_[c];
  double value = 0.0;
  for (int corner = 0; corner < 8; ++corner) {
    double w = 1.0;
    int idx[3];
    bool skip = false;
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      if (bit && !shape_.active(a)) {
        skip = true;
        break;
      }
      w *= bit ? frac[a] : 1.0 - frac[a];
      idx[a] = base[a] + bit;
    }
    if (skip || w == 0.0) continue;
    bool inside = true;
    for (int a = 0; a < 3; ++a) inside = inside && idx[a] >= box.lo[a] && idx[a] < box.hi[a];
    if (inside) value += w * e[shape_.index(idx[0], idx[1], idx[2])];
  }
  return value;
}

Vec3 Simulation::node_field(std::size_t node) const {
  const auto ijk = shape_.unflatten(node);
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    const auto& e = e_[c];
    if (!shape_.active(c)) {
      out[c] = e[node];
      continue;
    }
    const auto stride = static_cast<std::size_t>(shape_.stride(c));
    const int pos = ijk[c];
    if (pos == 0) {
      out[c] = e[node];
    } else if (pos == shape_.extent(c) - 1) {
      out[c] = e[node - stride];
    } else {
      out[c] = 0.5 * (e[node] + e[node - stride]);
    }
  }
  return out;
}

double Simulation::energy() const {
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      const double ie = inv_eps_[c][i];
      if (ie > 0.0) total += e_[c][i] * e_[c][i] / ie;
      total += h_[c][i] * h_[c][i];
    }
  }
  return 0.5 * total * std::pow(dx_, shape_.dims());
}

void Simulation::check_finite() const {
  for (int c = 0; c < 3; ++c) {
    for (double v : e_[c]) {
      if (!std::isfinite(v)) {
        throw NumericalError("non-finite field at step " + std::to_string(step_) +
                             " (Courant factor or media parameters unstable?)");
      }
    }
  }
}

// ---------------------------------------------------------------------------------------------
// Runs

RunOutput execute(Simulation& sim, const RunRequest& request) {
  if (sim.time_step() != 0) throw ConfigError("execute() requires a freshly constructed simulation");
  if (request.stride < 1) throw ConfigError("recording stride must be at least 1");
  for (const auto& s : request.sources) sim.add_source(s);

  const int steps = sim.config().steps;
  RunOutput out;
  out.probes.reserve(request.probes.size());
  for (const auto& p : request.probes) {
    sim.sample(p);  // validates the position
    out.probes.push_back({p, sim.dt(), std::vector<double>(static_cast<std::size_t>(steps), 0.0)});
  }

  const GridBand* band = request.band;
  std::size_t band_nodes = 0;
  if (band != nullptr) {
    if (!(band->shape == sim.lattice().shape)) throw ConfigError("band lattice does not match the simulation");
    for (auto n : band->nodes) {
      if (n >= band->shape.size()) throw ConfigError("band node outside the simulation domain");
    }
    band_nodes = band->nodes.size();
    const auto samples = static_cast<std::size_t>((steps + request.stride - 1) / request.stride);
    const std::size_t bytes = samples * band_nodes * 3 * sizeof(double);
    if (bytes > request.memory_budget) {
      throw ConfigError("band recording needs " + std::to_string(bytes) + " bytes, over the memory budget");
    }
    out.volume.band = *band;
    out.volume.stride = request.stride;
    out.volume.dt = sim.dt();
    out.volume.samples = band_nodes == 0 ? 0 : samples;
    out.volume.data.reserve(out.volume.samples * band_nodes * 3);
  }

  for (int n = 0; n < steps; ++n) {
    for (auto& rec : out.probes) rec.series[static_cast<std::size_t>(n)] = sim.sample(rec.probe);
    if (band_nodes > 0 && n % request.stride == 0) {
      for (auto node : band->nodes) {
        const Vec3 e = sim.node_field(node);
        out.volume.data.push_back(e.x);
        out.volume.data.push_back(e.y);
        out.volume.data.push_back(e.z);
      }
    }
    sim.step();
    if ((n + 1) % kFiniteCheckInterval == 0) sim.check_finite();
  }
  sim.check_finite();
  return out;
}

std::vector<ProbeRecord> run_with_source(Simulation& sim, const PointSource& source,
                                         std::span<const ProbePosition> probes) {
  RunRequest req;
  req.sources.push_back(source);
  req.probes.assign(probes.begin(), probes.end());
  return execute(sim, req).probes;
}

VolumeRecord record_volume(Simulation& sim, const PointSource& source, const GridBand& band, int stride,
                           std::size_t memory_budget) {
  RunRequest req;
  req.sources.push_back(source);
  req.band = &band;
  req.stride = stride;
  req.memory_budget = memory_budget;
  return execute(sim, req).volume;
}

}  // namespace cpd
