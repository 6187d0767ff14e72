#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cpdesign/config.hpp"
#include "cpdesign/hash.hpp"
#include "cpdesign/io.hpp"
#include "cpdesign/mesh.hpp"
#include "cpdesign/validation.hpp"

namespace fs = std::filesystem;
using namespace cpd;

namespace {

constexpr int kValidationFailure = 2;
constexpr int kNumericalFailure = 3;

struct Options {
  std::string config;
  int threads = 1;
  bool lean = false;
  std::string checkpoint;
  int iterations = 0;  // overrides the configured budget; not part of the config hash
  std::vector<std::string> points;
  std::string line_from, line_to;
  int line_samples = 10;
  std::string geometry;
  std::string field;
  std::string mesh_out;
};

RunConfig load(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  if (o.lean) c.lean = true;
  c.validate();
  return c;
}

fs::path output_dir(const RunConfig& c) {
  if (c.output.is_absolute()) return c.output;
  if (const char* root = std::getenv("CPDESIGN_OUTPUT_ROOT"); root && *root) return fs::path(root) / c.output;
  return c.output;
}

Vec3 parse_point(const std::string& s) {
  std::stringstream ss(s);
  std::string item;
  std::vector<double> v;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw ConfigError("point '" + s + "' needs three comma-separated coordinates");
  return {v[0], v[1], v[2]};
}

std::string iteration_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "iter_%03d.field", i);
  return buf;
}

FieldFile geometry_file(const LevelSetField& g, std::uint64_t hash) {
  return FieldFile{g.lattice, "phi", hash, g.phi};
}

int cmd_validate_plane(const Options& o) {
  const RunConfig c = load(o);
  const auto dir = output_dir(c);
  const auto hash = c.hash();
  check_provenance(dir, hash);
  spdlog::info("plane validation at {} cells/L0", c.simulation.resolution);
  const auto report = validate_plane(c, [](const PlanePoint& p) {
    spdlog::info("z = {:.4f}  U = {:.6e}  oracle = {:.6e}  error = {:.2f}%{}", p.separation, p.potential, p.oracle,
                 100.0 * p.relative_error, p.flagged ? "  (not decayed)" : "");
  });
  write_atomic(dir / "plane_validation.csv", plane_report_table(report, hash));
  spdlog::info("log-log slope {:.3f} (target {} +- {})", report.slope, c.validation.slope_target,
               c.validation.slope_tolerance);
  std::printf("%s\n", report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : kValidationFailure;
}

LevelSetField potential_geometry(const Options& o, const RunConfig& c) {
  if (o.geometry == "none") return LevelSetField::empty(c.evaluator().simulation.lattice(), 1e3);
  if (o.geometry.empty()) return c.initial_geometry();
  const FieldFile f = read_field(o.geometry);
  const Lattice lat = c.evaluator().simulation.lattice();
  if (!(f.lattice.shape == lat.shape)) throw ConfigError("geometry file does not match the configured lattice");
  LevelSetField g;
  g.lattice = lat;
  g.phi = f.data;
  return g;
}

int cmd_potential(const Options& o) {
  const RunConfig c = load(o);
  const auto dir = output_dir(c);
  const auto hash = c.hash();
  check_provenance(dir, hash);
  std::vector<Vec3> points;
  for (const auto& p : o.points) points.push_back(parse_point(p));
  if (!o.line_from.empty()) {
    if (o.line_to.empty() || o.line_samples < 2) throw ConfigError("a line scan needs --to and at least 2 samples");
    const Vec3 a = parse_point(o.line_from), b = parse_point(o.line_to);
    for (int i = 0; i < o.line_samples; ++i) {
      const double t = static_cast<double>(i) / (o.line_samples - 1);
      points.push_back(a + t * (b - a));
    }
  }
  if (points.empty()) points.push_back(c.atom_position);

  const LevelSetField g = potential_geometry(o, c);
  const auto drude = c.drude();
  const MediaMap media = to_media(g, drude.value_or(DrudeParameters{}), !drude.has_value());
  CasimirPolderEvaluator ev(c.evaluator());
  std::vector<PotentialSample> samples;
  int errors = 0;
  for (const auto& p : points) {
    try {
      samples.push_back(ev.potential(media, p));
      spdlog::info("({:.4f}, {:.4f}, {:.4f})  U = {:.9e}", p.x, p.y, p.z, samples.back().potential);
    } catch (const ConfigError& e) {
      if (points.size() == 1) throw;
      PotentialSample bad;
      bad.atom = p;
      bad.potential = std::nan("");
      bad.flagged = true;
      samples.push_back(bad);
      ++errors;
      spdlog::warn("({:.4f}, {:.4f}, {:.4f}): {}", p.x, p.y, p.z, e.what());
    }
  }
  write_atomic(dir / "potential.csv", potential_table(samples, hash));
  return errors ? kValidationFailure : 0;
}

void write_iteration(const fs::path& dir, const RunConfig& c, const OptimizationState& s, std::uint64_t hash) {
  write_atomic(dir / "merit.csv", merit_table(s, hash));
  if (c.lean) return;
  save_checkpoint(dir / "checkpoint.bin", s, hash);
  write_field(dir / "geometry" / iteration_name(s.iteration), geometry_file(s.geometry, hash));
}

int drive(const Options& o, bool resume) {
  RunConfig c = load(o);
  const auto dir = output_dir(c);
  const auto hash = c.hash();
  check_provenance(dir, hash);
  DesignProblem problem = c.design_problem();
  problem.optimizer.adjoint.threads = o.threads;
  if (o.iterations > 0) problem.optimizer.stopping.max_iterations = o.iterations;
  Optimizer opt(problem);

  OptimizationState state;
  if (resume) {
    const fs::path ck = o.checkpoint.empty() ? dir / "checkpoint.bin" : fs::path(o.checkpoint);
    state = load_checkpoint(ck, hash, problem.evaluator.simulation.lattice());
    spdlog::info("resumed at iteration {} (merit {:.6e})", state.iteration, state.current_merit());
  } else {
    if (!c.lean) write_atomic(dir / "config.ini", provenance_line(hash) + serialize_config(c));
    state = opt.initial_state();
    spdlog::info("iteration 0: merit {:.6e}", state.current_merit());
    write_iteration(dir, c, state, hash);
  }

  OptimizationState last = state;
  RunStatus status = RunStatus::Running;
  try {
    status = opt.run(state, [&](const OptimizationState& s) {
      const auto& r = s.history.back();
      spdlog::info("iteration {}: merit {:.6e}{} backtracks {} components {} holes {}", s.iteration, r.merit,
                   r.accepted ? "" : " (rejected)", r.backtracks, r.components, r.holes);
      write_iteration(dir, c, s, hash);
      last = s;
    });
  } catch (const NumericalError& e) {
    save_checkpoint(dir / "checkpoint.bin", last, hash);
    spdlog::error("numerical failure: {}; checkpoint at iteration {} saved", e.what(), last.iteration);
    return kNumericalFailure;
  }

  write_field(dir / "geometry_final.field", geometry_file(state.geometry, hash));
  if (c.lean) {
    fs::remove(dir / "checkpoint.bin");
  } else {
    std::string summary = provenance_line(hash);
    const auto& r = state.history.back();
    summary += "status " + to_string(status) + "\n";
    summary += "iterations " + std::to_string(state.iteration) + "\n";
    summary += "final_merit " + format_number(r.merit) + "\n";
    summary += "normalized_final " + format_number(state.normalized_merits().back()) + "\n";
    summary += "components " + std::to_string(r.components) + "\nholes " + std::to_string(r.holes) + "\n";
    write_atomic(dir / "summary.txt", summary);
  }
  spdlog::info("status {} after {} iterations, merit {:.6e}", to_string(status), state.iteration,
               state.current_merit());
  std::printf("%s\n", to_string(status).c_str());
  return 0;
}

int cmd_export(const Options& o) {
  const FieldFile f = read_field(o.field);
  LevelSetField g;
  g.lattice = f.lattice;
  g.phi = f.data;
  const ContourMesh mesh = extract_contour(g);
  fs::path out = o.mesh_out.empty() ? fs::path(o.field).replace_extension(".obj") : fs::path(o.mesh_out);
  std::ostringstream text;
  write_obj(text, mesh, {"config_hash " + hash_to_hex(f.config_hash)});
  write_atomic(out, text.str());
  spdlog::info("{} vertices, euler characteristic {}, closed {}", mesh.vertices.size(), euler_characteristic(mesh),
               is_closed(mesh) ? "yes" : "no");
  return 0;
}

int cmd_materials() {
  for (const auto& p : material_presets()) {
    std::printf("%-6s %s\n", p.name.c_str(), p.description.c_str());
    if (!p.perfect_conductor) {
      std::printf("       eps_inf %.9g  wp %.9g c/L0  gamma %.9g c/L0 (L0 = 100 nm)\n", p.drude.eps_inf,
                  p.drude.plasma_frequency, p.drude.collision_rate);
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Casimir-Polder inverse design"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--threads", o.threads, "Concurrent simulations per iteration")->check(CLI::Range(1, 64));

  auto add_config = [&](CLI::App* sub) { sub->add_option("-c,--config", o.config, "Run configuration (INI)"); };

  auto* plane = app.add_subcommand("validate-plane", "Perfect-conductor plane against the analytic potential");
  add_config(plane);

  auto* pot = app.add_subcommand("potential", "Potential table at atom positions");
  add_config(pot);
  pot->add_option("--at", o.points, "Atom position x,y,z (repeatable)");
  pot->add_option("--from", o.line_from, "Line scan start x,y,z");
  pot->add_option("--to", o.line_to, "Line scan end x,y,z");
  pot->add_option("--samples", o.line_samples, "Line scan sample count");
  pot->add_option("--geometry", o.geometry, "Level-set field file, or 'none' for vacuum");

  auto* optimize = app.add_subcommand("optimize", "Run the shape optimization");
  add_config(optimize);
  optimize->add_flag("--lean", o.lean, "Keep only the merit history and the final geometry");

  auto* resume = app.add_subcommand("resume", "Continue an optimization from its checkpoint");
  add_config(resume);
  resume->add_option("--checkpoint", o.checkpoint, "Checkpoint file (default: <output>/checkpoint.bin)");
  resume->add_option("--iterations", o.iterations, "Iteration budget, counted from the start of the run")
      ->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export", "Level-set field to an OBJ mesh or polyline");
  exp->add_option("field", o.field, "Field file")->required();
  exp->add_option("-o,--output", o.mesh_out, "Mesh file");

  auto* materials = app.add_subcommand("materials", "Material presets");
  materials->require_subcommand(1);
  auto* list = materials->add_subcommand("list", "List presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*plane) return cmd_validate_plane(o);
    if (*pot) return cmd_potential(o);
    if (*optimize) return drive(o, false);
    if (*resume) return drive(o, true);
    if (*exp) return cmd_export(o);
    if (*list) return cmd_materials();
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kValidationFailure;
  } catch (const NumericalError& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kNumericalFailure;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
