#include "cpdesign/validation.hpp"

#include <cmath>

#include "cpdesign/io.hpp"
#include "cpdesign/plane_oracle.hpp"

namespace cpd {

PlaneReport validate_plane(const RunConfig& config, const std::function<void(const PlanePoint&)>& progress) {
  config.validate();
  const EvaluatorSettings settings = config.evaluator();
  if (settings.simulation.dimensions != 3) throw ConfigError("plane validation needs a 3D simulation");
  const auto& v = config.validation;
  const AtomModel atom = settings.atom;
  const double along_normal = std::abs(atom.axis.z);
  if (along_normal > 1e-12 && along_normal < 1.0 - 1e-12) throw ConfigError("plane validation needs the atom axis along or across the normal");
  const bool perpendicular = along_normal > 0.5;

  CasimirPolderEvaluator evaluator(settings);
  const Lattice lat = settings.simulation.lattice();
  MediaMap media = MediaMap::vacuum(lat);
  for (std::size_t n = 0; n < lat.shape.size(); ++n) {
    if (lat.position(n).z >= v.plane_offset - 1e-9) media.pec[n] = 1;
  }

  PlaneReport report;
  report.resolution = settings.simulation.resolution;
  report.pass = true;
  std::vector<double> z, u;
  for (double d : v.separations) {
    PlanePoint p;
    p.requested = d;
    const auto response = evaluator.evaluate(media, {0.0, 0.0, v.plane_offset - d});
    const auto& sample = response.potential;
    p.scattered = response.scattered;
    p.separation = v.plane_offset - sample.atom.z;
    p.potential = sample.potential;
    p.flagged = sample.flagged;
    p.oracle = plane_potential(atom, p.separation, perpendicular);
    p.relative_error = std::abs(p.potential - p.oracle) / std::abs(p.oracle);
    p.pass = p.relative_error <= v.tolerance;
    report.pass = report.pass && p.pass;
    z.push_back(p.separation);
    u.push_back(p.potential);
    report.points.push_back(p);
    if (progress) progress(p);
  }
  if (z.size() >= 2) {
    report.slope = loglog_slope(z.data(), u.data(), static_cast<int>(z.size()));
    report.slope_pass = std::abs(report.slope - v.slope_target) <= v.slope_tolerance;
  }
  report.pass = report.pass && report.slope_pass;
  return report;
}

std::string plane_report_table(const PlaneReport& report, std::uint64_t config_hash) {
  std::string out = provenance_line(config_hash);
  out += "# resolution " + std::to_string(report.resolution) + " slope " + format_number(report.slope) +
         (report.slope_pass ? " pass" : " fail") + "\n";
  out += "separation,U,oracle,relative_error,flagged,pass\n";
  for (const auto& p : report.points) {
    out += format_number(p.separation) + "," + format_number(p.potential) + "," + format_number(p.oracle) + "," +
           format_number(p.relative_error) + "," + (p.flagged ? "1" : "0") + "," + (p.pass ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace cpd
