#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cpdesign/levelset.hpp"
#include "cpdesign/potential.hpp"
#include "support.hpp"

using namespace cpd;
using namespace cpd::testing;

namespace {

const Vec3 kAtom{-0.55, 0.0, 0.0};

double wall_potential(const EvaluatorSettings& e, double face) {
  CasimirPolderEvaluator ev(e);
  return ev.potential(pec_wall(e.simulation.lattice(), face), kAtom).potential;
}

// First time |series| reaches `fraction` of its own peak.
double arrival(const std::vector<double>& s, double dt, double fraction) {
  double peak = 0.0;
  for (double v : s) peak = std::max(peak, std::abs(v));
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (std::abs(s[n]) >= fraction * peak) return n * dt;
  }
  return -1.0;
}

MediaMap gold_disks(const SimulationConfig& s, const std::vector<std::pair<Vec3, double>>& disks) {
  auto f = LevelSetField::from_function(s.lattice(), [&](const Vec3& p) {
    double d = 1e3;
    for (const auto& [c, r] : disks) d = std::min(d, (p - c).norm() - r);
    return d;
  });
  return to_media(f, gold_preset());
}

}  // namespace

TEST(Potential, VacuumBelowNoiseFloor) {
  const auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  const double vac = ev.potential(MediaMap::vacuum(e.simulation.lattice()), kAtom).potential;
  const double wall = wall_potential(e, kAtom.x + 1.0);
  EXPECT_LT(std::abs(vac), 1e-3 * std::abs(wall));
  EXPECT_EQ(ev.merit(MediaMap::vacuum(e.simulation.lattice()), kAtom), 0.0);
}

TEST(Potential, WallAttractiveAndMonotone) {
  const auto e = evaluator_2d();
  double previous = -1e300;
  for (double d : {0.6, 0.8, 1.0, 1.3}) {
    const double u = wall_potential(e, kAtom.x + d);
    EXPECT_LT(u, 0.0) << d;
    EXPECT_GT(u, previous) << d;
    previous = u;
  }
}

TEST(Potential, ScatteredSignalArrivesAfterRoundTrip) {
  // the wall's echo looks like the free field of an image a distance 2d away
  auto e = evaluator_2d(10, 6.0);
  CasimirPolderEvaluator ev(e);
  const double face = kAtom.x + 1.0;
  const auto resp = ev.evaluate(pec_wall(e.simulation.lattice(), face), kAtom);
  const Vec3 a = ev.snap_atom(kAtom);
  // first conducting node
  const double wall = std::ceil((face - 1e-9) / e.simulation.dx()) * e.simulation.dx();
  const ProbePosition image{{a.x + 2.0 * (wall - a.x), a.y, 0}, ev.atom_component()};
  Simulation sim(e.simulation, MediaMap::vacuum(e.simulation.lattice()));
  const auto free = run_with_source(sim, ev.atom_source(kAtom), std::span(&image, 1))[0];
  const double dt = e.simulation.dt();
  for (double fraction : {0.02, 0.1, 0.5}) {
    EXPECT_NEAR(arrival(resp.scattered.series, dt, fraction), arrival(free.series, dt, fraction),
                e.simulation.dx())
        << fraction;
  }
}

TEST(Potential, SourceAmplitudeCancels) {
  auto e = evaluator_2d();
  const double u1 = wall_potential(e, kAtom.x + 1.0);
  e.source_amplitude = 2.0;
  const double u2 = wall_potential(e, kAtom.x + 1.0);
  EXPECT_NEAR(u2, u1, 1e-9 * std::abs(u1));
}

TEST(Potential, FrequencyRefinementBelowOnePercent) {
  auto e = evaluator_2d();
  const double u1 = wall_potential(e, kAtom.x + 1.0);
  e.kernel.frequency_samples *= 2;
  const double u2 = wall_potential(e, kAtom.x + 1.0);
  EXPECT_LT(std::abs(u2 - u1), 0.01 * std::abs(u1));
}

TEST(Potential, BroadeningInsensitive) {
  // default linewidth floor against one ten times narrower, resolved by a ten times finer grid
  auto e = evaluator_2d();
  const double u1 = wall_potential(e, kAtom.x + 1.0);
  e.kernel.frequency_samples *= 10;
  const double floor = CasimirPolderEvaluator(evaluator_2d()).kernel().effective_linewidth;
  EXPECT_NEAR(CasimirPolderEvaluator(e).kernel().effective_linewidth, 0.1 * floor, 1e-12);
  const double u2 = wall_potential(e, kAtom.x + 1.0);
  EXPECT_LT(std::abs(u2 - u1), 0.02 * std::abs(u1));
}

TEST(Potential, ResolutionConvergence) {
  // the finer lattice has no atom site at the coarse one; interpolate between its two neighbours
  const double face = 0.5;
  const double u10 = wall_potential(evaluator_2d(10), face);
  auto e20 = evaluator_2d(20);
  CasimirPolderEvaluator ev(e20);
  const auto wall = pec_wall(e20.simulation.lattice(), face);
  const double left = ev.potential(wall, {kAtom.x - 0.025, 0, 0}).potential;
  const double right = ev.potential(wall, {kAtom.x + 0.025, 0, 0}).potential;
  EXPECT_NEAR(ev.snap_atom({kAtom.x - 0.025, 0, 0}).x, kAtom.x - 0.025, 1e-12);
  const double u20 = 0.5 * (left + right);
  EXPECT_LT(std::abs(u20 - u10), 0.05 * std::abs(u20));
}

TEST(Potential, RingingSeriesIsFlagged) {
  // a Drude disk keeps ringing at its plasmon frequency; a conducting wall echo dies out
  auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  EXPECT_TRUE(ev.potential(gold_disks(e.simulation, {{{0.6, 0, 0}, 0.8}}), kAtom).flagged);
  e.simulation.steps = e.simulation.steps_for_duration(100.0);
  CasimirPolderEvaluator longer(e);
  EXPECT_FALSE(longer.potential(pec_wall(e.simulation.lattice(), kAtom.x + 1.0), kAtom).flagged);
}

TEST(Potential, AtomInsideStructureRejected) {
  const auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  EXPECT_THROW(ev.potential(pec_wall(e.simulation.lattice(), kAtom.x - 0.5), kAtom), ConfigError);
}

TEST(Force, DisplacementContract) {
  const auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  const auto media = gold_disks(e.simulation, {{{0.6, 0, 0}, 0.8}});
  EXPECT_THROW(ev.force_x(media, kAtom, 0.5 * e.simulation.dx()), ConfigError);
  // displaced atom would sit inside the disk
  EXPECT_THROW(ev.force_x(media, {-0.25, 0, 0}, 0.4), ConfigError);
}

TEST(Force, WallPullsAtomTowardIt) {
  const auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  const auto media = pec_wall(e.simulation.lattice(), kAtom.x + 1.0);
  EXPECT_GT(ev.force_x(media, kAtom, 2.0 * e.simulation.dx()), 0.0);
  EXPECT_GT(ev.merit(media, kAtom), 0.0);
}

TEST(Force, MirrorSymmetricStructureGivesNoForce) {
  const auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  const Vec3 a = ev.snap_atom(kAtom);
  const double one = ev.merit(gold_disks(e.simulation, {{a + Vec3{1.0, 0, 0}, 0.5}}), a);
  const double both =
      ev.merit(gold_disks(e.simulation, {{a + Vec3{1.0, 0, 0}, 0.5}, {a - Vec3{1.0, 0, 0}, 0.5}}), a);
  EXPECT_LT(std::abs(both), 1e-2 * std::abs(one));
}

TEST(Force, MeritSignMatchesPotentialGradient) {
  const auto e = evaluator_2d();
  CasimirPolderEvaluator ev(e);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> radius(0.3, 0.8), gap(0.3, 0.7), lateral(-0.6, 0.6), side(0.0, 1.0);
  int agree = 0;
  const int cases = 10;
  for (int c = 0; c < cases; ++c) {
    const double r = radius(rng);
    const double dir = side(rng) < 0.7 ? 1.0 : -1.0;
    const Vec3 centre{kAtom.x + dir * (r + gap(rng)), lateral(rng), 0};
    std::vector<std::pair<Vec3, double>> disks{{centre, r}};
    if (c % 3 == 2) disks.push_back({{kAtom.x - dir * 0.9, 0.4, 0}, 0.3});
    const auto media = gold_disks(e.simulation, disks);
    const double merit = ev.merit(media, kAtom);
    const double force = ev.force_x(media, kAtom, 2.0 * e.simulation.dx());
    if ((merit > 0) == (force > 0)) ++agree;
    else ADD_FAILURE() << "case " << c << ": merit " << merit << " force " << force;
  }
  EXPECT_EQ(agree, cases);
}
