#include "cpdesign/plane_oracle.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>

namespace cpd {

namespace {

// xi^2 times the mirror's scattering Green tensor at coincident points, imaginary frequency.
double weighted_mirror_green(double xi, double z, bool perpendicular) {
  const double pref = -std::exp(-2.0 * xi * z) / (8.0 * std::numbers::pi * z);
  const double a = xi / (2.0 * z);
  const double b = 1.0 / (4.0 * z * z);
  if (perpendicular) return pref * 2.0 * (a + b);
  return pref * (xi * xi + a + b);
}

}  // namespace

double plane_potential(const AtomModel& atom, double z, bool perpendicular) {
  if (!(z > 0.0)) throw ConfigError("plane distance must be positive");
  atom.validate();
  auto f = [&](double xi) {
    return atom_polarizability_imaginary(xi, atom) * weighted_mirror_green(xi, z, perpendicular);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double integral = integrator.integrate(f, 0.0, std::numeric_limits<double>::infinity());
  return integral / (2.0 * std::numbers::pi);
}

double plane_potential_nonretarded(const AtomModel& atom, double z, bool perpendicular) {
  const double w = perpendicular ? 2.0 : 1.0;
  return -w * atom.static_polarizability * atom.resonance / (128.0 * std::numbers::pi * z * z * z);
}

double loglog_slope(const double* z, const double* u, int n) {
  if (n < 2) throw ConfigError("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double x = std::log(z[i]);
    const double y = std::log(std::abs(u[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace cpd
