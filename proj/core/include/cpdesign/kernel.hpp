#pragma once

#include <complex>
#include <vector>

#include "cpdesign/materials.hpp"

namespace cpd {

/// Smooth-start current pulse J(t) = J0 [4 (g t)^3 - (g t)^4] exp(-g t) for t >= 0, sampled at n * dt.
/// J, dJ/dt and d2J/dt2 all vanish at t = 0, and the pulse integrates to zero.
struct SourceWaveform {
  double amplitude = 1.0;
  double cutoff_rate = 2.5;  // g, c/L0
  double dt = 0.0;
  std::vector<double> samples;

  /// Closed-form value at continuous time t.
  double at(double t) const;
};

/// Time after which |J(t)| stays below 1e-6 of its peak, in units of 1/g.
inline constexpr double kSourceDecayTimes = 26.0;

SourceWaveform build_source_waveform(double cutoff_rate, double amplitude, double dt, int steps);

/// Continuous transform J(w) = int J(t) e^{+iwt} dt = 24 J0 g^3 (-iw) / (g - iw)^5.
std::complex<double> source_spectrum(double cutoff_rate, double amplitude, double omega);

struct KernelOptions {
  double omega_max = 0.0;       // 0 selects 10 g
  int frequency_samples = 16384;
  double linewidth_floor = 10.0;  // broadened linewidth = max(ga, floor * omega_max / samples)
  double window_frequency = 0.0;  // Gaussian roll-off exp(-(w/wc)^2); 0 disables
  double taper_fraction = 0.15;   // cos^2 roll-off over the final part of the time window
};

/// K(t_n) = Im g(-t_n), with g(w) = -i a(w) w / J(w) for w >= 0 and zero otherwise, so that
/// U = -sum_n K(t_n) E1(t_n) dt.
struct ConvolutionKernel {
  double dt = 0.0;
  std::vector<double> samples;
  double omega_max = 0.0;
  int frequency_samples = 0;
  double effective_linewidth = 0.0;
  double window_frequency = 0.0;
};

/// g(w) for w >= 0 using the (possibly broadened) atom model, before windowing.
std::complex<double> kernel_spectrum(const AtomModel& atom, double cutoff_rate, double amplitude, double omega);

/// Inverse-transforms g on [0, omega_max] by trapezoidal quadrature for every sample time of the
/// source waveform. Throws ConfigError when omega_max misses the source band or the resonance, or
/// when the broadened linewidth smears the resonance.
ConvolutionKernel build_kernel(const AtomModel& atom, const SourceWaveform& source, const KernelOptions& options);

/// Window roll-off tied to the lattice spacing: features finer than a few cells are not resolved.
double default_window_frequency(double dx);

}  // namespace cpd
