#include <gtest/gtest.h>

#include <cmath>

#include "cpdesign/adjoint.hpp"
#include "cpdesign/levelset.hpp"
#include "support.hpp"

using namespace cpd;
using namespace cpd::testing;

namespace {

const Vec3 kAtom{-0.55, 0.0, 0.0};
const Vec3 kCentre{0.85, 0.0, 0.0};
constexpr double kRadius = 0.8;

struct Fixture {
  EvaluatorSettings settings = evaluator_2d();
  LevelSetField disk;
  GridBand band;
  MediaMap media;

  Fixture() {
    disk = init_disk(settings.simulation, kRadius, kCentre);
    reinitialize(disk);
    band = make_band(disk);
    media = to_media(disk, gold_preset());
  }

  OverlapField sensitivity(const AdjointOptions& options = {}) {
    CasimirPolderEvaluator ev(settings);
    return merit_sensitivity(ev, media, kAtom, band, options).overlap;
  }
};

double relative_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += (a[i] - b[i]) * (a[i] - b[i]);
    n += b[i] * b[i];
  }
  return std::sqrt(d / n);
}

}  // namespace

TEST(ReverseTime, IsAnInvolution) {
  VolumeRecord r;
  r.band = {{4, 4, 1}, {1, 5, 9}};
  r.samples = 7;
  r.dt = 0.05;
  r.stride = 2;
  for (std::size_t i = 0; i < r.samples * 9; ++i) r.data.push_back(std::sin(0.37 * i) + 0.01 * i);
  const auto once = reverse_time(r);
  EXPECT_EQ(once.at(0, 2)[1], r.at(6, 2)[1]);
  EXPECT_EQ(once.at(4, 0)[2], r.at(2, 0)[2]);
  EXPECT_EQ(reverse_time(once).data, r.data);
  EXPECT_EQ(once.stride, r.stride);
}

TEST(Overlap, SymmetricInItsArguments) {
  VolumeRecord a, b;
  a.band = b.band = {{4, 4, 1}, {0, 3}};
  a.samples = b.samples = 5;
  a.dt = b.dt = 0.1;
  for (std::size_t i = 0; i < 30; ++i) {
    a.data.push_back(std::cos(0.2 * i));
    b.data.push_back(std::sin(0.5 * i + 1.0));
  }
  EXPECT_EQ(overlap_integral(a, b), overlap_integral(b, a));
  b.samples = 4;
  b.data.resize(24);
  EXPECT_THROW(overlap_integral(a, b), ConfigError);
}

TEST(Sensitivity, NullAtomGivesZeroVelocity) {
  Fixture f;
  f.settings.atom.static_polarizability = 0.0;
  const auto o = f.sensitivity();
  ASSERT_EQ(o.values.size(), f.band.nodes.size());
  for (double v : o.values) ASSERT_EQ(v, 0.0);
}

TEST(Sensitivity, PerfectConductorRejected) {
  Fixture f;
  f.media = to_media(f.disk, {}, true);
  EXPECT_THROW(f.sensitivity(), ConfigError);
}

TEST(Sensitivity, ScalesLinearlyWithKernel) {
  // the forward field does not see the kernel; the adjoint source carries it once
  Fixture f;
  const auto base = f.sensitivity();
  f.settings.atom.static_polarizability *= 3.0;
  const auto scaled = f.sensitivity();
  double worst = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < base.values.size(); ++i) {
    worst = std::max(worst, std::abs(scaled.values[i] - 3.0 * base.values[i]));
    peak = std::max(peak, std::abs(base.values[i]));
  }
  EXPECT_GT(peak, 0.0);
  EXPECT_LT(worst, 1e-9 * 3.0 * peak);
  const auto v = base.velocity();
  for (std::size_t i = 0; i < v.size(); ++i) ASSERT_EQ(v[i], -base.values[i]);
}

TEST(Sensitivity, StrideTwoMatchesStrideOne) {
  Fixture f;
  AdjointOptions one;
  one.stride = 1;
  const auto a = f.sensitivity(one);
  const auto b = f.sensitivity();
  EXPECT_LT(relative_l2(b.values, a.values), 0.05);
}

TEST(Sensitivity, ConcurrentRunsAreIdentical) {
  Fixture f;
  AdjointOptions two;
  two.threads = 2;
  EXPECT_EQ(f.sensitivity(two).values, f.sensitivity().values);
}

TEST(Sensitivity, AdjointRingsDown) {
  // kernel drive in forward time, then 20 L0/c source-free. The kernel has a nonzero mean, so a static
  // dipole field stays behind; the changing part of the field is what must die out. Without the
  // Drude plasmon, which rings for ~2/collision_rate.
  Fixture f;
  CasimirPolderEvaluator ev(f.settings);
  AdjointOptions direct;
  direct.time = TimeConvention::DirectSource;
  auto cfg = f.settings.simulation;
  const int drive = cfg.steps;
  cfg.steps = drive + cfg.steps_for_duration(20.0);
  RunRequest req;
  req.sources = make_adjoint_source(ev, kAtom, direct).sources;
  for (auto& s : req.sources) s.waveform.resize(static_cast<std::size_t>(cfg.steps), 0.0);
  req.probes = {{{-1.0, 0.5, 0}, Component::Ex}, {{0.0, 1.2, 0}, Component::Ey}};
  Simulation sim(cfg, MediaMap::vacuum(cfg.lattice()));
  const auto out = execute(sim, req);
  const int lag = cfg.steps_for_duration(2.0);
  for (const auto& r : out.probes) {
    double peak = 0.0;
    for (std::size_t n = lag; n < r.series.size(); ++n) peak = std::max(peak, std::abs(r.series[n] - r.series[n - lag]));
    const std::size_t last = r.series.size() - 1;
    EXPECT_LT(std::abs(r.series[last] - r.series[last - lag]), 1e-3 * peak);
  }
}

TEST(Sensitivity, PredictsBumpResponse) {
  Fixture f;
  CasimirPolderEvaluator ev(f.settings);
  const auto sens = merit_sensitivity(ev, f.media, kAtom, f.band, {});
  std::vector<double> predicted, measured;
  for (const auto& g : disk_bumps(f.disk, kCentre, kRadius, 10)) {
    predicted.push_back(predicted_change(sens.overlap, f.disk, g));
    measured.push_back(ev.merit(to_media(g, gold_preset()), kAtom) - sens.forward.merit);
  }
  EXPECT_GE(sign_agreements(predicted, measured), 9);
  EXPECT_GT(correlation(predicted, measured), 0.7);
}

TEST(Sensitivity, DefaultConventionTracksBumpsBest) {
  // freezes the pairing of forward and adjoint time and the choice of forward field;
  // ranks, since the few bumps facing the atom dominate a linear correlation
  Fixture f;
  CasimirPolderEvaluator ev(f.settings);
  const double f0 = ev.merit(f.media, kAtom);
  const auto bumps = disk_bumps(f.disk, kCentre, kRadius, 10);
  std::vector<double> measured;
  for (const auto& g : bumps) measured.push_back(ev.merit(to_media(g, gold_preset()), kAtom) - f0);

  struct Score {
    int signs;
    double rank;
  };
  auto score = [&](const AdjointOptions& o) {
    const auto s = f.sensitivity(o);
    std::vector<double> predicted;
    for (const auto& g : bumps) predicted.push_back(predicted_change(s, f.disk, g));
    return Score{sign_agreements(predicted, measured), rank_correlation(predicted, measured)};
  };
  const Score best = score({});
  EXPECT_EQ(best.signs, 10);
  AdjointOptions scattered, direct, derivative;
  scattered.forward = ForwardField::Scattered;
  direct.time = TimeConvention::DirectSource;
  derivative.form = GradientForm::OverlapDerivative;
  for (const auto& o : {scattered, direct, derivative}) {
    const Score other = score(o);
    EXPECT_GE(best.signs, other.signs);
    EXPECT_GT(best.rank, other.rank);
  }
}
