#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "cpdesign/config.hpp"

using namespace cpd;

namespace {

const char* kSample = R"(# comment line
[simulation]
dimensions = 2
resolution = 12       ; cells per L0
duration = 40

[atom]
position = -0.5, 0.1, 0

[material]
preset = gold
collision_ev = 0.02

[geometry]
shape = disk
radius = 0.7
separation = 1.2

[optimizer]
max_iterations = 7
time_convention = direct-source
memory_mb = 64

[validation]
separations = 0.8, 1.2

[output]
directory = runs/sample
lean = true
)";

RunConfig with(const std::string& section, const std::string& line) {
  return parse_config("[" + section + "]\n" + line + "\n");
}

}  // namespace

TEST(Config, ParsesValuesAndInlineComments) {
  const auto c = parse_config(kSample);
  EXPECT_EQ(c.simulation.dimensions, 2);
  EXPECT_EQ(c.simulation.resolution, 12);
  EXPECT_DOUBLE_EQ(c.duration, 40.0);
  EXPECT_DOUBLE_EQ(c.atom_position.y, 0.1);
  EXPECT_EQ(c.geometry.shape, "disk");
  ASSERT_TRUE(c.material.collision_ev.has_value());
  EXPECT_DOUBLE_EQ(*c.material.collision_ev, 0.02);
  EXPECT_FALSE(c.material.plasma_ev.has_value());
  EXPECT_EQ(c.optimizer.stopping.max_iterations, 7);
  EXPECT_EQ(c.optimizer.adjoint.time, TimeConvention::DirectSource);
  EXPECT_EQ(c.optimizer.adjoint.memory_budget, std::size_t{64} << 20);
  EXPECT_EQ(c.validation.separations, (std::vector<double>{0.8, 1.2}));
  EXPECT_EQ(c.output, std::filesystem::path("runs/sample"));
  EXPECT_TRUE(c.lean);
  // untouched keys keep their defaults
  EXPECT_DOUBLE_EQ(c.simulation.pml_thickness, RunConfig{}.simulation.pml_thickness);
}

TEST(Config, RoundTripIsIdentity) {
  const auto a = parse_config(kSample);
  const auto text = serialize_config(a);
  const auto b = parse_config(text);
  EXPECT_EQ(serialize_config(b), text);
  EXPECT_EQ(a.hash(), b.hash());
  const auto d = parse_config(serialize_config(RunConfig{}));
  EXPECT_EQ(serialize_config(d), serialize_config(RunConfig{}));
}

TEST(Config, FullPrecisionSurvives) {
  auto c = RunConfig{};
  c.geometry.separation = 1.1 + 1e-15;
  const auto back = parse_config(serialize_config(c));
  EXPECT_EQ(back.geometry.separation, c.geometry.separation);
}

TEST(Config, UnknownKeysAndSectionsRejected) {
  EXPECT_THROW(with("simulation", "resolutoin = 10"), ConfigError);
  EXPECT_THROW(with("simulations", "resolution = 10"), ConfigError);
  EXPECT_THROW(parse_config("resolution = 10\n"), ConfigError);
  EXPECT_THROW(parse_config("[simulation\nresolution = 10\n"), ConfigError);
}

TEST(Config, InvalidValuesRejected) {
  EXPECT_THROW(with("simulation", "resolution = ten"), ConfigError);
  EXPECT_THROW(with("simulation", "resolution = 10.5"), ConfigError);
  EXPECT_THROW(with("simulation", "resolution = 2"), ConfigError);
  EXPECT_THROW(with("simulation", "duration = -1"), ConfigError);
  EXPECT_THROW(with("units", "length_nm = 0"), ConfigError);
  EXPECT_THROW(with("atom", "position = 1,2"), ConfigError);
  EXPECT_THROW(with("geometry", "radius = 0"), ConfigError);
  EXPECT_THROW(with("geometry", "shape = cone"), ConfigError);
  EXPECT_THROW(with("geometry", "shape = file"), ConfigError);
  EXPECT_THROW(with("optimizer", "gradient = steepest"), ConfigError);
  EXPECT_THROW(with("optimizer", "memory_mb = 0"), ConfigError);
  EXPECT_THROW(with("output", "lean = maybe"), ConfigError);
  EXPECT_THROW(with("validation", "separations = 1, -1"), ConfigError);
  EXPECT_THROW(with("material", "preset = unobtainium"), ConfigError);
  EXPECT_THROW(with("source", "cutoff = 0"), ConfigError);
}

TEST(Config, PerfectConductorTakesNoDrudeOverrides) {
  EXPECT_THROW(parse_config("[material]\npreset = pec\nplasma_ev = 9\n").drude(), ConfigError);
  const auto c = parse_config("[material]\npreset = pec\n");
  EXPECT_TRUE(c.perfect_conductor());
  EXPECT_THROW(c.design_problem(), ConfigError);
}

TEST(Config, HashIgnoresOutputSection) {
  auto a = parse_config(kSample);
  auto b = a;
  b.output = "elsewhere";
  b.lean = false;
  EXPECT_EQ(a.hash(), b.hash());
  b.geometry.radius = 0.71;
  EXPECT_NE(a.hash(), b.hash());
  b = a;
  b.simulation.resolution = 14;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, DerivedModels) {
  const auto c = parse_config(kSample);
  const auto atom = c.atom();
  EXPECT_NEAR(atom.resonance, 0.81084, 1e-4);
  EXPECT_DOUBLE_EQ(atom.axis.x, 1.0);
  const auto d = c.drude();
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(d->collision_rate, 0.02 / 1.6 * 0.81084, 1e-5);
  const Vec3 centre = c.structure_center();
  EXPECT_DOUBLE_EQ(centre.x, -0.5 + 1.2);
  EXPECT_DOUBLE_EQ(centre.y, 0.1);
  const auto e = c.evaluator();
  EXPECT_EQ(e.simulation.steps, e.simulation.steps_for_duration(40.0));
  const auto p = c.design_problem();
  EXPECT_EQ(p.config_hash, c.hash());
  EXPECT_TRUE(p.initial.has_interior());
}

TEST(Config, ShippedConfigsLoad) {
  const std::filesystem::path dir = CPDESIGN_CONFIG_DIR;
  int count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 4);
  EXPECT_EQ(load_config(dir / "cylinder3d.ini").simulation.resolution, 8);
}
