#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numbers>

#include "cpdesign/kernel.hpp"
#include "cpdesign/potential.hpp"
#include "support.hpp"

using namespace cpd;
using namespace cpd::testing;

TEST(SourceWaveform, StartsAtZeroWithFlatDerivatives) {
  const double dt = 0.05;
  const auto w = build_source_waveform(2.5, 1.0, dt, 1200);
  EXPECT_EQ(w.samples[0], 0.0);
  const double peak = *std::max_element(w.samples.begin(), w.samples.end());
  const double d1 = (w.samples[1] - w.samples[0]) / dt;
  const double d2 = (w.samples[2] - 2.0 * w.samples[1] + w.samples[0]) / (dt * dt);
  // leading behaviour 4 J0 (g t)^3
  EXPECT_LT(std::abs(d1), 10.0 * peak * std::pow(2.5 * dt, 3) / dt);
  EXPECT_LT(std::abs(d2), 50.0 * peak * std::pow(2.5 * dt, 3) / (dt * dt));
}

TEST(SourceWaveform, PeakAtTwoOverGamma) {
  // dJ/dx = x^2 (12 - 8x + x^2) e^-x: maximum at x = 2, minimum at x = 6
  const double g = 2.5;
  const auto w = build_source_waveform(g, 1.0, 1e-4, 200000);
  const auto mx = std::max_element(w.samples.begin(), w.samples.end()) - w.samples.begin();
  const auto mn = std::min_element(w.samples.begin(), w.samples.end()) - w.samples.begin();
  EXPECT_NEAR(g * mx * 1e-4, 2.0, 1e-3);
  EXPECT_NEAR(g * mn * 1e-4, 6.0, 1e-3);
}

TEST(SourceWaveform, DecaysBelowThresholdByDecayTime) {
  const double g = 2.5;
  const auto w = build_source_waveform(g, 1.0, 0.01, 6000);
  double peak = 0.0;
  for (double v : w.samples) peak = std::max(peak, std::abs(v));
  double last_above = 0.0;
  for (std::size_t n = 0; n < w.samples.size(); ++n) {
    if (std::abs(w.samples[n]) >= 1e-6 * peak) last_above = n * 0.01;
  }
  // crossing sits just past 25/gamma
  EXPECT_GT(last_above, 25.0 / g);
  EXPECT_LT(last_above, kSourceDecayTimes / g);
  EXPECT_THROW(build_source_waveform(g, 1.0, 0.01, static_cast<int>(25.5 / g / 0.01)), ConfigError);
}

TEST(SourceWaveform, ShortWindowRejected) {
  EXPECT_THROW(build_source_waveform(2.5, 1.0, 0.05, 100), ConfigError);
  EXPECT_THROW(build_source_waveform(0.0, 1.0, 0.05, 1000), ConfigError);
}

TEST(SourceWaveform, IntegratesToZero) {
  SourceWaveform w{1.0, 2.5, 0.0, {}};
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double t) { return w.at(t); }, 0.0, 40.0);
  EXPECT_NEAR(integral, 0.0, 1e-10);
  EXPECT_EQ(std::abs(source_spectrum(2.5, 1.0, 0.0)), 0.0);
}

TEST(SourceSpectrum, MatchesDirectQuadrature) {
  SourceWaveform w{1.3, 2.5, 0.0, {}};
  for (double omega : {0.3, 1.0, 2.5, 7.0, 20.0}) {
    auto part = [&](bool imag) {
      return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double t) { return w.at(t) * (imag ? std::sin(omega * t) : std::cos(omega * t)); }, 0.0, 40.0, 15,
          1e-13);
    };
    const std::complex<double> direct(part(false), part(true));
    const auto closed = source_spectrum(2.5, 1.3, omega);
    EXPECT_LT(std::abs(direct - closed), 1e-8 * std::abs(closed)) << omega;
  }
}

TEST(SourceSpectrum, DecaysLikeInverseFourthPower) {
  const double a = std::abs(source_spectrum(2.5, 1.0, 1e4));
  const double b = std::abs(source_spectrum(2.5, 1.0, 2e4));
  EXPECT_NEAR(a / b, 16.0, 0.01);
}

TEST(Kernel, NullAtomGivesNullKernel) {
  auto atom = rubidium_preset();
  atom.static_polarizability = 0.0;
  const auto src = build_source_waveform(2.5, 1.0, 0.05, 1200);
  const auto k = build_kernel(atom, src, {});
  for (double v : k.samples) EXPECT_EQ(v, 0.0);
}

TEST(Kernel, MatchesIndependentInverseTransform) {
  AtomModel atom{1.0, 0.81, 0.05, {1, 0, 0}};
  const auto src = build_source_waveform(2.5, 1.0, 0.05, 1200);
  KernelOptions opt;
  opt.window_frequency = 15.0;
  const auto k = build_kernel(atom, src, opt);
  double kmax = 0.0;
  for (double v : k.samples) kmax = std::max(kmax, std::abs(v));
  // K(t) = Im (1/2pi) int_0^wmax g(w) W(w) e^{iwt} dw on the untapered part of the window
  for (int n : {0, 1, 5, 20, 80, 300}) {
    const double t = n * 0.05;
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double w) {
          using namespace std::complex_literals;
          const std::complex<double> d = 2.5 - 1i * w;
          const std::complex<double> g = atom_polarizability(w, atom) * d * d * d * d * d / (24.0 * 2.5 * 2.5 * 2.5);
          return (g * std::exp(-(w / 15.0) * (w / 15.0)) * std::exp(1i * w * t)).imag();
        },
        0.0, 25.0, 20, 1e-12);
    EXPECT_NEAR(k.samples[static_cast<std::size_t>(n)], integral / (2.0 * std::numbers::pi), 2e-3 * kmax) << n;
  }
}

TEST(Kernel, InsufficientBandwidthRejected) {
  const auto src = build_source_waveform(2.5, 1.0, 0.05, 1200);
  KernelOptions opt;
  opt.omega_max = 5.0;
  EXPECT_THROW(build_kernel(rubidium_preset(), src, opt), ConfigError);
  KernelOptions coarse;
  coarse.frequency_samples = 64;
  coarse.linewidth_floor = 10.0;
  EXPECT_THROW(build_kernel(rubidium_preset(), src, coarse), ConfigError);
}

TEST(Kernel, BroadeningFloorApplied) {
  const auto src = build_source_waveform(2.5, 1.0, 0.05, 1200);
  const auto k = build_kernel(rubidium_preset(), src, {});
  EXPECT_NEAR(k.effective_linewidth, 10.0 * 25.0 / 16384, 1e-12);
}

TEST(ScatteredSeries, DifferenceAndContracts) {
  ProbeRecord a{{}, 0.05, {1.0, 2.0, 3.0}};
  ProbeRecord b = a;
  const auto z = scattered_series(a, b);
  for (double v : z.series) EXPECT_EQ(v, 0.0);
  b.dt = 0.04;
  EXPECT_THROW(scattered_series(a, b), ConfigError);
  b = a;
  b.series.pop_back();
  EXPECT_THROW(scattered_series(a, b), ConfigError);
}

TEST(CpPotential, ConvolutionSum) {
  ConvolutionKernel k;
  k.dt = 0.5;
  k.samples = {1.0, -2.0, 0.5, 4.0};
  ProbeRecord e{{}, 0.5, {0.0, 1.0, 2.0}};
  EXPECT_DOUBLE_EQ(cp_potential(k, e).potential, -(-2.0 + 1.0) * 0.5);
  ProbeRecord g{{}, 0.5, {3.0, 1.0, 0.0}};
  EXPECT_DOUBLE_EQ(merit_force(k, g), (3.0 - 2.0) * 0.5);
}
