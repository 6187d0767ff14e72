#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include "cpdesign/adjoint.hpp"
#include "cpdesign/levelset.hpp"
#include "cpdesign/potential.hpp"

namespace cpd::testing {

// Small 2D box for fast end-to-end runs.
inline SimulationConfig small_2d(int resolution = 10, double domain = 4.0) {
  SimulationConfig s;
  s.dimensions = 2;
  s.domain_size = domain;
  s.resolution = resolution;
  s.pml_thickness = 1.0;
  s.courant = 0.5;
  s.steps = s.steps_for_duration(60.0);
  return s;
}

inline EvaluatorSettings evaluator_2d(int resolution = 10, double domain = 4.0) {
  EvaluatorSettings e;
  e.simulation = small_2d(resolution, domain);
  e.atom = rubidium_preset(100.0);
  e.kernel.window_frequency = default_window_frequency(e.simulation.dx());
  return e;
}

// Perfect conductor filling x >= face.
inline MediaMap pec_wall(const Lattice& lat, double face) {
  MediaMap m = MediaMap::vacuum(lat);
  for (std::size_t n = 0; n < lat.shape.size(); ++n) {
    if (lat.position(n).x >= face - 1e-9) m.pec[n] = 1;
  }
  return m;
}

inline double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Zero crossings of Phi along lattice edges, by linear interpolation.
inline std::vector<Vec3> contour_points(const LevelSetField& f) {
  const auto& sh = f.lattice.shape;
  std::vector<Vec3> out;
  for (int k = 0; k < sh.nz; ++k)
    for (int j = 0; j < sh.ny; ++j)
      for (int i = 0; i < sh.nx; ++i) {
        const double a = f.phi[sh.index(i, j, k)];
        const int next[3][3] = {{i + 1, j, k}, {i, j + 1, k}, {i, j, k + 1}};
        for (const auto& n : next) {
          if (!sh.contains(n[0], n[1], n[2])) continue;
          const double b = f.phi[sh.index(n[0], n[1], n[2])];
          if ((a < 0) == (b < 0)) continue;
          const double t = a / (a - b);
          const Vec3 p = f.lattice.position(i, j, k), q = f.lattice.position(n[0], n[1], n[2]);
          out.push_back(p + t * (q - p));
        }
      }
  return out;
}

inline double mean_radius(const LevelSetField& f, const Vec3& centre) {
  const auto pts = contour_points(f);
  double sum = 0.0;
  for (const auto& p : pts) sum += (p - centre).norm();
  return sum / static_cast<double>(pts.size());
}

// Largest ||grad Phi| - 1| over nodes within `cells` cells of the contour, central differences.
inline double gradient_error(const LevelSetField& f, double cells = 3.0,
                             const std::function<bool(const Vec3&)>& skip = {}) {
  const auto& sh = f.lattice.shape;
  const double dx = f.lattice.dx;
  double worst = 0.0;
  for (int k = 0; k < sh.nz; ++k)
    for (int j = 0; j < sh.ny; ++j)
      for (int i = 0; i < sh.nx; ++i) {
        if (std::abs(f.phi[sh.index(i, j, k)]) > cells * dx) continue;
        if (skip && skip(f.lattice.position(i, j, k))) continue;
        const int c[3] = {i, j, k};
        double g2 = 0.0;
        bool inside = true;
        for (int axis = 0; axis < 3; ++axis) {
          if (!sh.active(axis)) continue;
          int lo[3] = {i, j, k}, hi[3] = {i, j, k};
          lo[axis] = c[axis] - 1;
          hi[axis] = c[axis] + 1;
          if (!sh.contains(lo[0], lo[1], lo[2]) || !sh.contains(hi[0], hi[1], hi[2])) {
            inside = false;
            break;
          }
          const double d = (f.phi[sh.index(hi[0], hi[1], hi[2])] - f.phi[sh.index(lo[0], lo[1], lo[2])]) / (2 * dx);
          g2 += d * d;
        }
        if (inside) worst = std::max(worst, std::abs(std::sqrt(g2) - 1.0));
      }
  return worst;
}

// Material area (2D) or volume (3D) from the fill fractions.
inline double material_volume(const LevelSetField& f) {
  const auto m = interior_mask(f);
  const double cell = std::pow(f.lattice.dx, f.lattice.shape.dims());
  return std::accumulate(m.begin(), m.end(), 0.0) * cell;
}

// Smoothed boundary bumps on a disk, each pushing the contour by at most a quarter cell,
// alternately inwards and outwards.
inline std::vector<LevelSetField> disk_bumps(const LevelSetField& disk, const Vec3& centre, double radius, int count,
                                             unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double dx = disk.lattice.dx;
  std::vector<LevelSetField> out;
  for (int t = 0; t < count; ++t) {
    const double a = angle(rng);
    const double sign = (t % 2) ? 1.0 : -1.0;
    const Vec3 p = centre + Vec3{radius * std::cos(a), radius * std::sin(a), 0};
    LevelSetField g = disk;
    for (std::size_t n = 0; n < g.phi.size(); ++n) {
      const Vec3 d = g.lattice.position(n) - p;
      g.phi[n] -= sign * 0.25 * dx * std::exp(-(d.x * d.x + d.y * d.y + d.z * d.z) / (8.0 * dx * dx));
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Predicted merit change sum_node sensitivity * d(fill) over the band.
inline double predicted_change(const OverlapField& overlap, const LevelSetField& before, const LevelSetField& after) {
  const auto f0 = interior_mask(before), f1 = interior_mask(after);
  double sum = 0.0;
  for (std::size_t b = 0; b < overlap.band.nodes.size(); ++b) {
    const auto n = overlap.band.nodes[b];
    sum += overlap.values[b] * (f1[n] - f0[n]);
  }
  return sum;
}

inline double rank_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) r[order[i]] = static_cast<double>(i);
    return r;
  };
  return correlation(ranks(a), ranks(b));
}

inline int sign_agreements(const std::vector<double>& a, const std::vector<double>& b) {
  int n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] > 0) == (b[i] > 0);
  return n;
}

}  // namespace cpd::testing
