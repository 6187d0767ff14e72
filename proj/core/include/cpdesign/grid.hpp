#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cpd {

/// Simulation units: c = 1, lengths in L0, times in L0/c, angular frequencies in c/L0.
struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline Vec3 unit_vector(int axis) {
  Vec3 v;
  v[axis] = 1.0;
  return v;
}

/// Node counts of a lattice, x fastest. Two-dimensional lattices have nz == 1.
struct GridShape {
  int nx = 1;
  int ny = 1;
  int nz = 1;

  int extent(int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  bool active(int axis) const { return extent(axis) > 1; }
  int dims() const { return nz > 1 ? 3 : 2; }
  std::size_t size() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) * static_cast<std::size_t>(nz);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * static_cast<std::size_t>(ny) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(nx) +
           static_cast<std::size_t>(i);
  }
  std::array<int, 3> unflatten(std::size_t idx) const {
    const auto sx = static_cast<std::size_t>(nx);
    const auto sy = static_cast<std::size_t>(ny);
    return {static_cast<int>(idx % sx), static_cast<int>((idx / sx) % sy), static_cast<int>(idx / (sx * sy))};
  }
  /// Flat-index stride along an axis; zero on an inactive axis so that differences vanish there.
  std::ptrdiff_t stride(int axis) const {
    if (!active(axis)) return 0;
    if (axis == 0) return 1;
    if (axis == 1) return nx;
    return static_cast<std::ptrdiff_t>(nx) * ny;
  }
  bool contains(int i, int j, int k) const { return i >= 0 && j >= 0 && k >= 0 && i < nx && j < ny && k < nz; }

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

/// Uniform node lattice: node (i, j, k) sits at origin + dx * (i, j, k).
struct Lattice {
  GridShape shape;
  double dx = 1.0;
  Vec3 origin;

  Vec3 position(int i, int j, int k) const {
    return {origin.x + dx * i, origin.y + dx * j, origin.z + dx * k};
  }
  Vec3 position(std::size_t idx) const {
    const auto c = shape.unflatten(idx);
    return position(c[0], c[1], c[2]);
  }
  /// Continuous lattice coordinate of a point along an axis (node units).
  double coordinate(const Vec3& p, int axis) const { return (p[axis] - origin[axis]) / dx; }

  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.shape == b.shape && a.dx == b.dx && a.origin == b.origin;
  }
};

/// Raised for invalid configurations or contract violations on inputs.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a run produces non-finite values or otherwise fails numerically.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cpd
