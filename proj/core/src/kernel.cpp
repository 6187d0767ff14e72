#include "cpdesign/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cpd {

double SourceWaveform::at(double t) const {
  if (t < 0.0) return 0.0;
  const double x = cutoff_rate * t;
  return amplitude * (4.0 * x * x * x - x * x * x * x) * std::exp(-x);
}

SourceWaveform build_source_waveform(double cutoff_rate, double amplitude, double dt, int steps) {
  if (!(cutoff_rate > 0.0)) throw ConfigError("source cut-off rate must be positive");
  if (!(dt > 0.0) || steps < 1) throw ConfigError("source sampling must have positive dt and steps");
  if (steps * dt < kSourceDecayTimes / cutoff_rate) {
    throw ConfigError("source window too short: the pulse has not decayed by the final step");
  }
  SourceWaveform w{amplitude, cutoff_rate, dt, {}};
  w.samples.resize(static_cast<std::size_t>(steps));
  for (int n = 0; n < steps; ++n) w.samples[static_cast<std::size_t>(n)] = w.at(n * dt);
  return w;
}

std::complex<double> source_spectrum(double cutoff_rate, double amplitude, double omega) {
  using namespace std::complex_literals;
  const double g = cutoff_rate;
  const std::complex<double> d = g - 1i * omega;
  return 24.0 * amplitude * g * g * g * (-1i * omega) / (d * d * d * d * d);
}

std::complex<double> kernel_spectrum(const AtomModel& atom, double cutoff_rate, double amplitude, double omega) {
  using namespace std::complex_literals;
  // -i a w / J(w) with the removable zero of J at w = 0 cancelled analytically.
  const double g = cutoff_rate;
  const std::complex<double> d = g - 1i * omega;
  return atom_polarizability(omega, atom) * (d * d * d * d * d) / (24.0 * amplitude * g * g * g);
}

double default_window_frequency(double dx) { return 0.75 / dx; }

ConvolutionKernel build_kernel(const AtomModel& atom, const SourceWaveform& source, const KernelOptions& options) {
  if (source.samples.empty()) throw ConfigError("kernel needs a sampled source waveform");
  if (options.frequency_samples < 16) throw ConfigError("too few frequency samples for the kernel");
  const double omega_max = options.omega_max > 0.0 ? options.omega_max : 10.0 * source.cutoff_rate;
  if (omega_max < 10.0 * source.cutoff_rate - 1e-12) {
    throw ConfigError("kernel omega_max does not cover the source bandwidth (needs >= 10 g)");
  }
  if (omega_max <= atom.resonance) throw ConfigError("kernel omega_max does not cover the atomic resonance");

  const int m = options.frequency_samples;
  const double dw = omega_max / m;
  AtomModel broadened = atom;
  broadened.linewidth = std::max(atom.linewidth, options.linewidth_floor * dw);
  if (broadened.linewidth > 0.25 * atom.resonance) {
    throw ConfigError("unresolved resonance: broadened linewidth exceeds a quarter of the resonance frequency");
  }

  std::vector<std::complex<double>> weighted(static_cast<std::size_t>(m) + 1);
  for (int k = 0; k <= m; ++k) {
    const double w = k * dw;
    double window = 1.0;
    if (options.window_frequency > 0.0) {
      const double r = w / options.window_frequency;
      window = std::exp(-r * r);
    }
    const double trap = (k == 0 || k == m) ? 0.5 : 1.0;
    weighted[static_cast<std::size_t>(k)] =
        kernel_spectrum(broadened, source.cutoff_rate, source.amplitude, w) * (window * trap * dw / (2.0 * std::numbers::pi));
  }

  ConvolutionKernel kernel;
  kernel.dt = source.dt;
  kernel.omega_max = omega_max;
  kernel.frequency_samples = m;
  kernel.effective_linewidth = broadened.linewidth;
  kernel.window_frequency = options.window_frequency;

  const std::size_t nt = source.samples.size();
  kernel.samples.resize(nt);
  const double t_end = source.dt * static_cast<double>(nt - 1);
  const double t_taper = t_end * (1.0 - options.taper_fraction);
  constexpr int kResync = 256;
  for (std::size_t n = 0; n < nt; ++n) {
    const double t = source.dt * static_cast<double>(n);
    const std::complex<double> rot = std::polar(1.0, dw * t);
    std::complex<double> phase = 1.0;
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
      if (k % kResync == 0) phase = std::polar(1.0, k * dw * t);
      const auto z = weighted[static_cast<std::size_t>(k)] * phase;
      acc += z.imag();
      phase *= rot;
    }
    double taper = 1.0;
    if (options.taper_fraction > 0.0 && t > t_taper) {
      const double s = (t - t_taper) / (t_end - t_taper);
      const double c = std::cos(0.5 * std::numbers::pi * s);
      taper = c * c;
    }
    kernel.samples[n] = acc * taper;
  }
  return kernel;
}

}  // namespace cpd
