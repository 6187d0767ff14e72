#include "cpdesign/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "cpdesign/hash.hpp"
#include "cpdesign/io.hpp"

namespace cpd {

namespace pt = boost::property_tree;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(d)) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return d;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

Vec3 to_vec(const std::string& key, const std::string& v) {
  const auto l = to_list(key, v);
  if (l.size() != 3) throw ConfigError(key + ": expected three comma-separated numbers");
  return {l[0], l[1], l[2]};
}

std::string list_text(const std::vector<double>& l) {
  std::string out;
  for (std::size_t i = 0; i < l.size(); ++i) out += (i ? "," : "") + fmt17(l[i]);
  return out;
}

std::string vec_text(const Vec3& v) { return list_text({v.x, v.y, v.z}); }

template <class E>
struct EnumName {
  E value;
  const char* name;
};

constexpr EnumName<GradientForm> kForms[] = {{GradientForm::SourceDifference, "source-difference"},
                                             {GradientForm::OverlapDerivative, "overlap-derivative"}};
constexpr EnumName<TimeConvention> kTimes[] = {{TimeConvention::ReversedSource, "reversed-source"},
                                               {TimeConvention::DirectSource, "direct-source"}};
constexpr EnumName<ForwardField> kForwards[] = {{ForwardField::Total, "total"}, {ForwardField::Scattered, "scattered"}};

template <class E, std::size_t N>
E enum_from(const std::string& key, const std::string& v, const EnumName<E> (&names)[N]) {
  for (const auto& n : names) {
    if (trim(v) == n.name) return n.value;
  }
  throw ConfigError(key + ": unknown value '" + v + "'");
}

template <class E, std::size_t N>
std::string enum_text(E e, const EnumName<E> (&names)[N]) {
  for (const auto& n : names) {
    if (n.value == e) return n.name;
  }
  return "?";
}

struct Entry {
  const char* section;
  const char* key;
  std::function<std::optional<std::string>(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

#define NUM(sec, name, field)                                                              \
  Entry {                                                                                  \
    sec, name, [](const RunConfig& c) -> std::optional<std::string> { return fmt17(c.field); }, \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); } \
  }
#define INT(sec, name, field)                                                                        \
  Entry {                                                                                            \
    sec, name, [](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.field); }, \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_int(k, v); }     \
  }
#define BOOL(sec, name, field)                                                                                \
  Entry {                                                                                                     \
    sec, name, [](const RunConfig& c) -> std::optional<std::string> { return c.field ? "true" : "false"; }, \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }            \
  }
#define STR(sec, name, field)                                                                     \
  Entry {                                                                                         \
    sec, name, [](const RunConfig& c) -> std::optional<std::string> { return std::string(c.field); }, \
        [](RunConfig& c, const std::string&, const std::string& v) { c.field = trim(v); }         \
  }
#define OPT(sec, name, field)                                                                      \
  Entry {                                                                                          \
    sec, name,                                                                                     \
        [](const RunConfig& c) -> std::optional<std::string> {                                     \
          if (!c.field) return std::nullopt;                                                       \
          return fmt17(*c.field);                                                                  \
        },                                                                                         \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); } \
  }
#define VEC(sec, name, field)                                                                      \
  Entry {                                                                                          \
    sec, name, [](const RunConfig& c) -> std::optional<std::string> { return vec_text(c.field); }, \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_vec(k, v); }   \
  }
#define ENUM(sec, name, field, table)                                                                       \
  Entry {                                                                                                   \
    sec, name, [](const RunConfig& c) -> std::optional<std::string> { return enum_text(c.field, table); }, \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = enum_from(k, v, table); } \
  }

const std::vector<Entry>& schema() {
  static const std::vector<Entry> entries = {
      INT("simulation", "dimensions", simulation.dimensions),
      NUM("simulation", "domain_size", simulation.domain_size),
      INT("simulation", "resolution", simulation.resolution),
      NUM("simulation", "pml_thickness", simulation.pml_thickness),
      NUM("simulation", "courant", simulation.courant),
      INT("simulation", "steps", simulation.steps),
      NUM("simulation", "duration", duration),
      NUM("units", "length_nm", length_unit_nm),
      NUM("atom", "resonance_ev", atom_resonance_ev),
      NUM("atom", "linewidth_ev", atom_linewidth_ev),
      NUM("atom", "polarizability", atom_polarizability),
      VEC("atom", "axis", atom_axis),
      VEC("atom", "position", atom_position),
      NUM("source", "cutoff", source_cutoff),
      NUM("source", "amplitude", source_amplitude),
      NUM("kernel", "omega_max", kernel_omega_max),
      INT("kernel", "samples", kernel_samples),
      NUM("kernel", "linewidth_floor", kernel_linewidth_floor),
      NUM("kernel", "window_cells", kernel_window_cells),
      NUM("kernel", "taper", kernel_taper),
      STR("material", "preset", material.preset),
      OPT("material", "eps_inf", material.eps_inf),
      OPT("material", "plasma_ev", material.plasma_ev),
      OPT("material", "collision_ev", material.collision_ev),
      STR("geometry", "shape", geometry.shape),
      NUM("geometry", "radius", geometry.radius),
      NUM("geometry", "height", geometry.height),
      NUM("geometry", "separation", geometry.separation),
      STR("geometry", "file", geometry.file),
      INT("optimizer", "max_iterations", optimizer.stopping.max_iterations),
      NUM("optimizer", "plateau_tolerance", optimizer.stopping.plateau_tolerance),
      INT("optimizer", "plateau_window", optimizer.stopping.plateau_window),
      BOOL("optimizer", "require_negative", optimizer.stopping.require_negative),
      NUM("optimizer", "step_cells", optimizer.step_cells),
      INT("optimizer", "max_backtracks", optimizer.max_backtracks),
      NUM("optimizer", "backtrack_tolerance", optimizer.backtrack_tolerance),
      NUM("optimizer", "band_cells", optimizer.band_cells),
      NUM("optimizer", "freeze_cells", optimizer.freeze_cells),
      ENUM("optimizer", "gradient", optimizer.adjoint.form, kForms),
      ENUM("optimizer", "time_convention", optimizer.adjoint.time, kTimes),
      ENUM("optimizer", "forward_field", optimizer.adjoint.forward, kForwards),
      INT("optimizer", "stride", optimizer.adjoint.stride),
      Entry{"optimizer", "memory_mb",
            [](const RunConfig& c) -> std::optional<std::string> {
              return std::to_string(c.optimizer.adjoint.memory_budget >> 20);
            },
            [](RunConfig& c, const std::string& k, const std::string& v) {
              const int mb = to_int(k, v);
              if (mb < 1) throw ConfigError(k + ": must be at least 1");
              c.optimizer.adjoint.memory_budget = static_cast<std::size_t>(mb) << 20;
            }},
      Entry{"validation", "separations",
            [](const RunConfig& c) -> std::optional<std::string> { return list_text(c.validation.separations); },
            [](RunConfig& c, const std::string& k, const std::string& v) { c.validation.separations = to_list(k, v); }},
      NUM("validation", "tolerance", validation.tolerance),
      NUM("validation", "slope_target", validation.slope_target),
      NUM("validation", "slope_tolerance", validation.slope_tolerance),
      NUM("validation", "plane_offset", validation.plane_offset),
      Entry{"output", "directory",
            [](const RunConfig& c) -> std::optional<std::string> { return c.output.string(); },
            [](RunConfig& c, const std::string&, const std::string& v) { c.output = trim(v); }},
      BOOL("output", "lean", lean),
  };
  return entries;
}

#undef NUM
#undef INT
#undef BOOL
#undef STR
#undef OPT
#undef VEC
#undef ENUM

}  // namespace

void RunConfig::validate() const {
  evaluator().simulation.validate();
  if (!(length_unit_nm > 0.0)) throw ConfigError("units.length_nm must be positive");
  if (simulation.steps < 0) throw ConfigError("simulation.steps must be non-negative");
  if (simulation.steps == 0 && !(duration > 0.0)) throw ConfigError("simulation.duration must be positive");
  atom().validate();
  if (!(source_cutoff > 0.0) || !(source_amplitude > 0.0)) throw ConfigError("source cutoff and amplitude must be positive");
  if (kernel_omega_max < 0.0 || kernel_samples < 16 || kernel_linewidth_floor < 0.0 || kernel_window_cells < 0.0 ||
      kernel_taper < 0.0 || kernel_taper >= 1.0) {
    throw ConfigError("invalid kernel settings");
  }
  const auto d = drude();
  if (d) d->validate();
  if (geometry.shape != "cylinder" && geometry.shape != "disk" && geometry.shape != "file") {
    throw ConfigError("geometry.shape must be cylinder, disk or file");
  }
  if (geometry.shape == "file" && geometry.file.empty()) throw ConfigError("geometry.file is required for shape = file");
  if (geometry.shape != "file" && (!(geometry.radius > 0.0) || !(geometry.height > 0.0))) {
    throw ConfigError("geometry radius and height must be positive");
  }
  if (!(geometry.separation > 0.0)) throw ConfigError("geometry.separation must be positive");
  optimizer.stopping.validate();
  if (!(optimizer.step_cells > 0.0) || optimizer.max_backtracks < 0 || optimizer.backtrack_tolerance < 0.0 ||
      !(optimizer.band_cells >= 1.0) || optimizer.freeze_cells < 0.0 || optimizer.adjoint.stride < 1) {
    throw ConfigError("invalid optimizer settings");
  }
  if (validation.separations.empty()) throw ConfigError("validation.separations must not be empty");
  for (double s : validation.separations) {
    if (!(s > 0.0)) throw ConfigError("validation separations must be positive");
  }
  if (!(validation.tolerance > 0.0) || !(validation.slope_tolerance > 0.0)) {
    throw ConfigError("validation tolerances must be positive");
  }
  if (output.empty()) throw ConfigError("output.directory must not be empty");
}

AtomModel RunConfig::atom() const {
  AtomModel a;
  a.static_polarizability = atom_polarizability;
  a.resonance = ev_to_sim_frequency(atom_resonance_ev, length_unit_nm);
  a.linewidth = ev_to_sim_frequency(atom_linewidth_ev, length_unit_nm);
  const double n = atom_axis.norm();
  if (!(n > 0.0)) throw ConfigError("atom.axis must be non-zero");
  a.axis = (1.0 / n) * atom_axis;
  return a;
}

std::optional<DrudeParameters> RunConfig::drude() const {
  const auto p = find_material_preset(material.preset, length_unit_nm);
  if (p.perfect_conductor) {
    if (material.eps_inf || material.plasma_ev || material.collision_ev) {
      throw ConfigError("Drude overrides do not apply to a perfect conductor");
    }
    return std::nullopt;
  }
  DrudeParameters d = p.drude;
  if (material.eps_inf) d.eps_inf = *material.eps_inf;
  if (material.plasma_ev) d.plasma_frequency = ev_to_sim_frequency(*material.plasma_ev, length_unit_nm);
  if (material.collision_ev) d.collision_rate = ev_to_sim_frequency(*material.collision_ev, length_unit_nm);
  return d;
}

bool RunConfig::perfect_conductor() const { return !drude().has_value(); }

EvaluatorSettings RunConfig::evaluator() const {
  EvaluatorSettings s;
  s.simulation = simulation;
  if (s.simulation.steps == 0) s.simulation.steps = s.simulation.steps_for_duration(duration);
  s.atom = atom();
  s.source_cutoff = source_cutoff;
  s.source_amplitude = source_amplitude;
  s.kernel.omega_max = kernel_omega_max;
  s.kernel.frequency_samples = kernel_samples;
  s.kernel.linewidth_floor = kernel_linewidth_floor;
  s.kernel.window_frequency = kernel_window_cells > 0.0 ? kernel_window_cells / simulation.dx() : 0.0;
  s.kernel.taper_fraction = kernel_taper;
  return s;
}

Vec3 RunConfig::structure_center() const { return atom_position + Vec3{geometry.separation, 0.0, 0.0}; }

LevelSetField RunConfig::initial_geometry() const {
  const auto sim = evaluator().simulation;
  if (geometry.shape == "cylinder") return init_cylinder(sim, geometry.radius, geometry.height, structure_center(), 0);
  if (geometry.shape == "disk") return init_disk(sim, geometry.radius, structure_center());
  const FieldFile f = read_field(geometry.file);
  const Lattice lat = sim.lattice();
  if (!(f.lattice.shape == lat.shape) || std::abs(f.lattice.dx - lat.dx) > 1e-12) {
    throw ConfigError("level-set file " + geometry.file + " does not match the simulation lattice");
  }
  LevelSetField out;
  out.lattice = lat;
  out.phi = f.data;
  return out;
}

DesignProblem RunConfig::design_problem() const {
  validate();
  const auto d = drude();
  if (!d) throw ConfigError("optimization needs a dispersive material; perfect conductors have no fill sensitivity");
  DesignProblem p;
  p.evaluator = evaluator();
  p.material = *d;
  p.atom = atom_position;
  p.initial = initial_geometry();
  p.optimizer = optimizer;
  p.config_hash = hash();
  return p;
}

std::uint64_t RunConfig::hash() const {
  ContentHasher h;
  h.update(serialize_config(*this, false));
  return h.digest64();
}

std::string serialize_config(const RunConfig& config, bool include_output) {
  std::string out;
  std::string section;
  for (const auto& e : schema()) {
    if (!include_output && std::string_view(e.section) == "output") continue;
    const auto v = e.get(config);
    if (section != e.section) {
      if (!section.empty()) out += "\n";
      section = e.section;
      out += "[" + section + "]\n";
    }
    if (v) out += std::string(e.key) + " = " + *v + "\n";
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax error: ") + e.what());
  }
  RunConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' is outside any section");
    bool known = false;
    for (const auto& e : schema()) known = known || section == e.section;
    if (!known) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [key, value] : body) {
      const Entry* found = nullptr;
      for (const auto& e : schema()) {
        if (section == e.section && key == e.key) found = &e;
      }
      if (!found) throw ConfigError("unknown config key [" + section + "] " + key);
      // trailing `; unit` or `# note`
      std::string v = value.data();
      v = trim(v.substr(0, v.find_first_of(";#")));
      found->set(c, section + "." + key, v);
    }
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

}  // namespace cpd
