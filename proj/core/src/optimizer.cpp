#include "cpdesign/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "cpdesign/hash.hpp"
#include "cpdesign/io.hpp"

namespace cpd {

namespace {

constexpr char kMagic[8] = {'C', 'P', 'D', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  template <class T>
  void put(const T& v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.append(p, sizeof(T));
  }
  void put_raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string& str() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view b) : b_(b) {}
  template <class T>
  T get() {
    T v;
    get_raw(&v, sizeof(T));
    return v;
  }
  void get_raw(void* p, std::size_t n) {
    if (pos_ + n > b_.size()) throw ConfigError("checkpoint is truncated");
    std::memcpy(p, b_.data() + pos_, n);
    pos_ += n;
  }

 private:
  std::string_view b_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum(std::string_view bytes) {
  ContentHasher h;
  h.update(bytes);
  return h.digest64();
}

}  // namespace

void StoppingRule::validate() const {
  if (max_iterations < 1) throw ConfigError("max iterations must be at least 1");
  if (plateau_window < 1) throw ConfigError("plateau window must be at least 1");
  if (!(plateau_tolerance >= 0.0)) throw ConfigError("plateau tolerance must be non-negative");
}

std::vector<double> OptimizationState::merits() const {
  std::vector<double> m;
  m.reserve(history.size());
  for (const auto& r : history) m.push_back(r.merit);
  return m;
}

std::vector<double> OptimizationState::normalized_merits() const {
  auto m = merits();
  double peak = 0.0;
  for (double v : m) peak = std::max(peak, std::abs(v));
  if (peak > 0.0) {
    for (double& v : m) v /= peak;
  }
  return m;
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Running: return "running";
    case RunStatus::Converged: return "converged";
    case RunStatus::Plateau: return "plateau";
    case RunStatus::Budget: return "budget";
    case RunStatus::Stalled: return "stalled";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------------------------

Optimizer::Optimizer(DesignProblem problem) : problem_(std::move(problem)), evaluator_(problem_.evaluator) {
  problem_.optimizer.stopping.validate();
  problem_.material.validate();
  if (!(problem_.optimizer.step_cells > 0.0)) throw ConfigError("trust-region step must be positive");
  if (problem_.optimizer.max_backtracks < 0) throw ConfigError("backtrack count must be non-negative");
  const Lattice lat = problem_.evaluator.simulation.lattice();
  if (!(problem_.initial.lattice.shape == lat.shape) || problem_.initial.lattice.dx != lat.dx) {
    throw ConfigError("initial level set does not match the simulation lattice");
  }
  std::vector<Vec3> points;
  for (const auto& p : evaluator_.atom_probes(problem_.atom)) points.push_back(p.position);
  frozen_ = freeze_mask(lat, points, problem_.optimizer.freeze_cells);
}

IterationRecord Optimizer::describe(const LevelSetField& geometry, double merit) const {
  IterationRecord r;
  r.merit = merit;
  r.geometry_hash = geometry.hash();
  const auto t = topology_stats(geometry);
  r.components = t.components;
  r.holes = t.holes;
  r.axis_thickness = axis_thickness(geometry, evaluator_.snap_atom(problem_.atom));
  return r;
}

double Optimizer::evaluate_merit(const LevelSetField& geometry) {
  return evaluator_.merit(to_media(geometry, problem_.material), problem_.atom);
}

OptimizationState Optimizer::initial_state() {
  OptimizationState s;
  s.geometry = problem_.initial;
  apply_constraints(s.geometry, problem_.evaluator.simulation);
  reinitialize(s.geometry);
  s.history.push_back(describe(s.geometry, evaluate_merit(s.geometry)));
  return s;
}

Optimizer::Step Optimizer::velocity_for(const LevelSetField& geometry) {
  Step step;
  step.velocity.assign(geometry.phi.size(), 0.0);
  if (!geometry.has_interior()) return step;
  const GridBand band = make_band(geometry, problem_.optimizer.band_cells);
  const auto media = to_media(geometry, problem_.material);
  const auto sens = merit_sensitivity(evaluator_, media, problem_.atom, band, problem_.optimizer.adjoint);
  step.velocity = extend_velocity(geometry, band, pair_across_interface(geometry, band, sens.overlap.velocity()));
  for (std::size_t n = 0; n < step.velocity.size(); ++n) {
    if (frozen_[n]) step.velocity[n] = 0.0;
    step.vmax = std::max(step.vmax, std::abs(step.velocity[n]));
  }
  return step;
}

LevelSetField Optimizer::moved(const LevelSetField& geometry, const Step& step, double dtau) const {
  LevelSetField g = geometry;
  advect_substepped(g, step.velocity, dtau, &frozen_);
  apply_constraints(g, problem_.evaluator.simulation);
  reinitialize(g);
  return g;
}

double Optimizer::trial_step(const OptimizationState& state, double dtau) {
  const Step step = velocity_for(state.geometry);
  return evaluate_merit(moved(state.geometry, step, dtau));
}

void Optimizer::iterate(OptimizationState& state) {
  const auto& opt = problem_.optimizer;
  const double f0 = state.current_merit();
  const Step step = velocity_for(state.geometry);
  ++state.iteration;
  if (step.vmax == 0.0) {
    auto rec = state.history.back();
    rec.dtau = 0.0;
    rec.backtracks = 0;
    state.history.push_back(rec);
    state.stalled = true;
    return;
  }

  double dtau = state.step_scale * opt.step_cells * problem_.initial.lattice.dx / step.vmax;
  for (int b = 0; b <= opt.max_backtracks; ++b) {
    LevelSetField candidate = moved(state.geometry, step, dtau);
    const double f = evaluate_merit(candidate);
    if (f <= f0 + opt.backtrack_tolerance * std::abs(f0)) {
      auto rec = describe(candidate, f);
      rec.dtau = dtau;
      rec.backtracks = b;
      state.geometry = std::move(candidate);
      state.history.push_back(rec);
      return;
    }
    dtau *= 0.5;
  }
  auto rec = state.history.back();
  rec.accepted = false;
  rec.dtau = 0.0;
  rec.backtracks = opt.max_backtracks;
  state.history.push_back(rec);
  state.stalled = true;
}

RunStatus Optimizer::status(const OptimizationState& state) const {
  const auto& rule = problem_.optimizer.stopping;
  if (state.stalled) return RunStatus::Stalled;
  bool flat = false;
  if (state.iteration >= rule.plateau_window) {
    const auto m = state.merits();
    const std::size_t last = m.size() - 1;
    flat = true;
    for (int k = 0; k < rule.plateau_window; ++k) {
      const double a = m[last - static_cast<std::size_t>(k)];
      const double b = m[last - static_cast<std::size_t>(k) - 1];
      const double scale = std::max(std::abs(a), 1e-300);
      if (std::abs(a - b) / scale >= rule.plateau_tolerance) flat = false;
    }
    if (flat && (!rule.require_negative || m[last] < 0.0)) return RunStatus::Converged;
  }
  if (state.iteration >= rule.max_iterations) return flat ? RunStatus::Plateau : RunStatus::Budget;
  return RunStatus::Running;
}

RunStatus Optimizer::run(OptimizationState& state, const std::function<void(const OptimizationState&)>& on_iteration) {
  RunStatus st = status(state);
  while (st == RunStatus::Running) {
    iterate(state);
    if (on_iteration) on_iteration(state);
    st = status(state);
  }
  return st;
}

// ---------------------------------------------------------------------------------------------

std::string encode_checkpoint(const OptimizationState& state, std::uint64_t config_hash) {
  Writer w;
  w.put_raw(kMagic, sizeof kMagic);
  w.put(kVersion);
  w.put(config_hash);
  w.put(static_cast<std::int32_t>(state.iteration));
  w.put(state.step_scale);
  w.put(static_cast<std::uint8_t>(state.stalled));
  const auto& lat = state.geometry.lattice;
  w.put(static_cast<std::int32_t>(lat.shape.nx));
  w.put(static_cast<std::int32_t>(lat.shape.ny));
  w.put(static_cast<std::int32_t>(lat.shape.nz));
  w.put(lat.dx);
  w.put(lat.origin.x);
  w.put(lat.origin.y);
  w.put(lat.origin.z);
  w.put(state.geometry.tau);
  w.put(static_cast<std::int32_t>(state.geometry.reinit_age));
  w.put(static_cast<std::uint64_t>(state.geometry.phi.size()));
  w.put_raw(state.geometry.phi.data(), state.geometry.phi.size() * sizeof(double));
  w.put(static_cast<std::uint64_t>(state.history.size()));
  for (const auto& r : state.history) {
    w.put(r.merit);
    w.put(static_cast<std::uint8_t>(r.accepted));
    w.put(r.geometry_hash);
    w.put(static_cast<std::int32_t>(r.components));
    w.put(static_cast<std::int32_t>(r.holes));
    w.put(r.axis_thickness);
    w.put(r.dtau);
    w.put(static_cast<std::int32_t>(r.backtracks));
  }
  const std::uint64_t sum = checksum(w.str());
  w.put(sum);
  return w.str();
}

OptimizationState decode_checkpoint(std::string_view bytes, std::uint64_t expected_hash, const Lattice& lattice) {
  if (bytes.size() < sizeof kMagic + sizeof(std::uint64_t)) throw ConfigError("checkpoint is truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw ConfigError("not a cpdesign checkpoint");
  const std::string_view body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored = 0;
  std::memcpy(&stored, bytes.data() + body.size(), sizeof stored);
  if (stored != checksum(body)) throw ConfigError("checkpoint checksum mismatch (file corrupted)");

  Reader r(body);
  char magic[8];
  r.get_raw(magic, sizeof magic);
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  const auto hash = r.get<std::uint64_t>();
  if (hash != expected_hash) {
    throw ConfigError("checkpoint was written by configuration " + hash_to_hex(hash) + ", expected " +
                      hash_to_hex(expected_hash));
  }
  OptimizationState s;
  s.iteration = r.get<std::int32_t>();
  s.step_scale = r.get<double>();
  s.stalled = r.get<std::uint8_t>() != 0;
  Lattice lat;
  lat.shape.nx = r.get<std::int32_t>();
  lat.shape.ny = r.get<std::int32_t>();
  lat.shape.nz = r.get<std::int32_t>();
  lat.dx = r.get<double>();
  lat.origin.x = r.get<double>();
  lat.origin.y = r.get<double>();
  lat.origin.z = r.get<double>();
  if (!(lat.shape == lattice.shape) || lat.dx != lattice.dx) throw ConfigError("checkpoint lattice does not match");
  s.geometry.lattice = lat;
  s.geometry.tau = r.get<double>();
  s.geometry.reinit_age = r.get<std::int32_t>();
  const auto n = r.get<std::uint64_t>();
  if (n != lat.shape.size()) throw ConfigError("checkpoint level set size does not match its lattice");
  s.geometry.phi.resize(n);
  r.get_raw(s.geometry.phi.data(), n * sizeof(double));
  const auto h = r.get<std::uint64_t>();
  if (h != static_cast<std::uint64_t>(s.iteration) + 1) throw ConfigError("checkpoint history length is inconsistent");
  for (std::uint64_t k = 0; k < h; ++k) {
    IterationRecord rec;
    rec.merit = r.get<double>();
    rec.accepted = r.get<std::uint8_t>() != 0;
    rec.geometry_hash = r.get<std::uint64_t>();
    rec.components = r.get<std::int32_t>();
    rec.holes = r.get<std::int32_t>();
    rec.axis_thickness = r.get<double>();
    rec.dtau = r.get<double>();
    rec.backtracks = r.get<std::int32_t>();
    s.history.push_back(rec);
  }
  return s;
}

void save_checkpoint(const std::filesystem::path& path, const OptimizationState& state, std::uint64_t config_hash) {
  write_atomic(path, encode_checkpoint(state, config_hash));
}

OptimizationState load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash,
                                  const Lattice& lattice) {
  return decode_checkpoint(read_file(path), expected_hash, lattice);
}

std::string merit_table(const OptimizationState& state, std::uint64_t config_hash) {
  std::string out = provenance_line(config_hash);
  out += "iteration,merit,normalized_merit,accepted\n";
  const auto norm = state.normalized_merits();
  for (std::size_t k = 0; k < state.history.size(); ++k) {
    out += std::to_string(k) + "," + format_number(state.history[k].merit) + "," + format_number(norm[k]) + "," +
           (state.history[k].accepted ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace cpd
