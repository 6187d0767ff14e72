#include <gtest/gtest.h>

#include <cmath>
#include <complex>

#include "cpdesign/config.hpp"
#include "cpdesign/materials.hpp"

using namespace cpd;

namespace {

// CODATA 2018 exact / recommended values, SI.
constexpr double kElectronVolt = 1.602176634e-19;
constexpr double kHbar = 1.054571817e-34;
constexpr double kLight = 299792458.0;

double by_hand(double ev, double length_nm) { return ev * kElectronVolt / kHbar * (length_nm * 1e-9) / kLight; }

}  // namespace

TEST(Drude, HighFrequencyAsymptote) {
  DrudeParameters p{2.5, 4.0, 0.1};
  const auto eps = drude_permittivity(1e6, p);
  EXPECT_NEAR(eps.real(), 2.5, 1e-9);
  EXPECT_NEAR(eps.imag(), 0.0, 1e-9);
}

TEST(Drude, VanishesAtPlasmaFrequency) {
  DrudeParameters p{1.0, 3.0, 0.0};
  const auto eps = drude_permittivity(3.0, p);
  EXPECT_NEAR(std::abs(eps), 0.0, 1e-14);
}

TEST(Drude, GoldAtHalfMatchesDirectFormula) {
  const auto gold = gold_preset(100.0);
  const double wp = by_hand(9.026, 100.0);
  const double g = by_hand(0.02666, 100.0);
  const double w = 0.5;
  const std::complex<double> expected = 1.0 - wp * wp / std::complex<double>(w * w, g * w);
  const auto eps = drude_permittivity(w, gold);
  EXPECT_NEAR(eps.real(), expected.real(), 1e-9 * std::abs(expected));
  EXPECT_NEAR(eps.imag(), expected.imag(), 1e-9 * std::abs(expected));
}

TEST(Drude, LossIsNonNegative) {
  const auto gold = gold_preset();
  for (double w = 0.01; w < 20.0; w *= 1.3) EXPECT_GE(drude_permittivity(w, gold).imag(), 0.0);
}

TEST(Drude, GoldIsMetallicAtLowFrequency) { EXPECT_LT(drude_permittivity(0.05, gold_preset()).real(), -1000.0); }

TEST(Drude, InvalidParametersRejected) {
  EXPECT_THROW((DrudeParameters{1.0, 0.0, 0.1}.validate()), ConfigError);
  EXPECT_THROW((DrudeParameters{1.0, 1.0, -0.1}.validate()), ConfigError);
  EXPECT_THROW((DrudeParameters{0.5, 1.0, 0.1}.validate()), ConfigError);
  EXPECT_NO_THROW(gold_preset().validate());
}

TEST(Units, ElectronVoltConversionMatchesDimensionalAnalysis) {
  EXPECT_NEAR(ev_to_sim_frequency(1.6, 100.0), by_hand(1.6, 100.0), 1e-12);
  EXPECT_NEAR(ev_to_sim_frequency(1.6, 100.0), 0.810, 1e-3);
  EXPECT_NEAR(ev_to_sim_frequency(2.5e-8, 100.0), 1.27e-8, 5e-11);
  EXPECT_NEAR(sim_frequency_to_ev(ev_to_sim_frequency(1.6, 37.0), 37.0), 1.6, 1e-14);
}

TEST(Units, GoldPlasmaFrequencyUsesSameConversion) {
  EXPECT_NEAR(gold_preset(100.0).plasma_frequency, by_hand(9.026, 100.0), 1e-12);
  EXPECT_NEAR(gold_preset(50.0).plasma_frequency, 0.5 * gold_preset(100.0).plasma_frequency, 1e-12);
}

TEST(Atom, StaticLimitAndResonancePeak) {
  AtomModel a{2.0, 0.8, 1e-3, {1, 0, 0}};
  EXPECT_NEAR(std::abs(atom_polarizability(0.0, a) - 2.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(atom_polarizability(0.8, a)), 2.0 * 0.8 / 1e-3, 1e-6);
}

TEST(Atom, ImaginaryAxisIsRealPositive) {
  const auto a = rubidium_preset();
  for (double xi : {0.0, 0.1, 1.0, 10.0}) {
    const double expected = a.static_polarizability * a.resonance * a.resonance /
                            (a.resonance * a.resonance + xi * xi + a.linewidth * xi);
    EXPECT_NEAR(atom_polarizability_imaginary(xi, a), expected, 1e-14);
    EXPECT_GT(atom_polarizability_imaginary(xi, a), 0.0);
  }
}

TEST(Atom, InvalidModelsRejected) {
  EXPECT_THROW((AtomModel{1.0, 0.0, 1e-3, {1, 0, 0}}.validate()), ConfigError);
  EXPECT_THROW((AtomModel{1.0, 0.8, 0.0, {1, 0, 0}}.validate()), ConfigError);
  EXPECT_THROW((AtomModel{1.0, 0.8, 1e-3, {1, 1, 0}}.validate()), ConfigError);
}

TEST(Presets, LookupAndOverride) {
  EXPECT_TRUE(find_material_preset("pec").perfect_conductor);
  EXPECT_EQ(find_material_preset("gold").drude, gold_preset());
  EXPECT_THROW(find_material_preset("unobtainium"), ConfigError);

  RunConfig c;
  c.material.eps_inf = 9.5;
  c.material.plasma_ev = 8.0;
  c.material.collision_ev = 0.05;
  const auto d = c.drude().value();
  EXPECT_DOUBLE_EQ(d.eps_inf, 9.5);
  EXPECT_NEAR(d.plasma_frequency, by_hand(8.0, 100.0), 1e-12);
  EXPECT_NEAR(d.collision_rate, by_hand(0.05, 100.0), 1e-12);
}

TEST(Presets, SecondGoldSetNearTabulatedPermittivity) {
  // tabulated gold near 775 nm: eps ~ -20.6 + 1.3i
  const auto jc = find_material_preset("gold-jc");
  EXPECT_FALSE(jc.perfect_conductor);
  EXPECT_NO_THROW(jc.drude.validate());
  const auto eps = drude_permittivity(ev_to_sim_frequency(1.6, 100.0), jc.drude);
  EXPECT_NEAR(eps.real(), -20.6, 2.0);
  EXPECT_GT(eps.imag(), 0.0);
  EXPECT_NE(jc.drude, gold_preset());
}
