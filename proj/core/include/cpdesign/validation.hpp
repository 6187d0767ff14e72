#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cpdesign/config.hpp"

namespace cpd {

struct PlanePoint {
  double requested = 0.0;
  double separation = 0.0;  // after snapping to the lattice
  double potential = 0.0;
  double oracle = 0.0;
  double relative_error = 0.0;
  bool flagged = false;
  bool pass = false;
  ProbeRecord scattered;
};

struct PlaneReport {
  int resolution = 0;
  std::vector<PlanePoint> points;
  double slope = 0.0;
  bool slope_pass = false;
  bool pass = false;
};

/// Perfectly conducting half-space z >= plane_offset, atom on the z axis at each requested separation.
/// Compares against the imaginary-frequency oracle for the configured atom axis.
PlaneReport validate_plane(const RunConfig& config, const std::function<void(const PlanePoint&)>& progress = {});

std::string plane_report_table(const PlaneReport& report, std::uint64_t config_hash);

}  // namespace cpd
