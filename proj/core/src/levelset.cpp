#include "cpdesign/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include "cpdesign/hash.hpp"

namespace cpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Neighbour of node `idx` one step along `axis` in direction `dir`, or -1 off the lattice.
inline long neighbour(const GridShape& s, const std::array<int, 3>& c, std::size_t idx, int axis, int dir) {
  if (!s.active(axis)) return -1;
  const int v = c[axis] + dir;
  if (v < 0 || v >= s.extent(axis)) return -1;
  return static_cast<long>(idx) + dir * s.stride(axis);
}

void check_inside(const SimulationConfig& config, const Vec3& lo, const Vec3& hi) {
  const double half = 0.5 * config.domain_size;
  for (int a = 0; a < config.dimensions; ++a) {
    if (lo[a] < -half || hi[a] > half) throw ConfigError("initial shape intersects the absorbing layer");
  }
}

struct Term {
  double c;
  double b;
};

// Solves sum c (T - b)^2 = 1 using the smallest b first, adding terms while they stay upwind.
double solve_eikonal(std::vector<Term>& terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& x, const Term& y) { return x.b < y.b; });
  double best = kInf;
  double a = 0.0, b = 0.0, c = 0.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    a += terms[k].c;
    b += terms[k].c * terms[k].b;
    c += terms[k].c * terms[k].b * terms[k].b;
    const double disc = b * b - a * (c - 1.0);
    if (disc < 0.0) break;
    const double t = (b + std::sqrt(disc)) / a;
    if (t < terms[k].b) break;
    best = t;
    if (k + 1 == terms.size() || t <= terms[k + 1].b) break;
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------------------------

LevelSetField LevelSetField::from_function(const Lattice& lattice, const std::function<double(const Vec3&)>& f) {
  LevelSetField out;
  out.lattice = lattice;
  out.phi.resize(lattice.shape.size());
  for (std::size_t n = 0; n < out.phi.size(); ++n) out.phi[n] = f(lattice.position(n));
  return out;
}

LevelSetField LevelSetField::empty(const Lattice& lattice, double limit) {
  LevelSetField out;
  out.lattice = lattice;
  out.phi.assign(lattice.shape.size(), limit);
  return out;
}

bool LevelSetField::has_interior() const {
  return std::any_of(phi.begin(), phi.end(), [](double v) { return v < 0.0; });
}

std::uint64_t LevelSetField::hash() const {
  ContentHasher h;
  h.add(lattice.shape.nx).add(lattice.shape.ny).add(lattice.shape.nz).add(lattice.dx);
  h.add(std::span<const double>(phi));
  return h.digest64();
}

LevelSetField init_cylinder(const SimulationConfig& config, double radius, double height, const Vec3& center,
                            int axis) {
  config.validate();
  if (!(radius > 0.0) || !(height > 0.0)) throw ConfigError("cylinder radius and height must be positive");
  if (axis < 0 || axis >= config.dimensions) throw ConfigError("cylinder axis must be an active axis");
  Vec3 ext;
  for (int a = 0; a < 3; ++a) ext[a] = a == axis ? 0.5 * height : radius;
  check_inside(config, center - ext, center + ext);
  return LevelSetField::from_function(config.lattice(), [&](const Vec3& p) {
    const Vec3 d = p - center;
    double rho2 = 0.0;
    for (int a = 0; a < config.dimensions; ++a) {
      if (a != axis) rho2 += d[a] * d[a];
    }
    const double dr = std::sqrt(rho2) - radius;
    const double da = std::abs(d[axis]) - 0.5 * height;
    const double outside = std::hypot(std::max(dr, 0.0), std::max(da, 0.0));
    return outside + std::min(std::max(dr, da), 0.0);
  });
}

LevelSetField init_disk(const SimulationConfig& config, double radius, const Vec3& center) {
  config.validate();
  if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
  Vec3 ext;
  for (int a = 0; a < config.dimensions; ++a) ext[a] = radius;
  check_inside(config, center - ext, center + ext);
  return LevelSetField::from_function(config.lattice(), [&](const Vec3& p) {
    Vec3 d = p - center;
    if (config.dimensions == 2) d.z = 0.0;
    return d.norm() - radius;
  });
}

bool reinitialize(LevelSetField& field) {
  if (!field.has_interior()) return false;
  const GridShape& s = field.lattice.shape;
  const double dx = field.lattice.dx;
  const auto& phi = field.phi;
  const std::size_t count = phi.size();

  std::vector<double> t(count, kInf);
  std::vector<std::uint8_t> done(count, 0);
  auto gradient = [&](std::size_t n) {
    const auto c = s.unflatten(n);
    double g2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (!s.active(a)) continue;
      const long lo = neighbour(s, c, n, a, -1), hi = neighbour(s, c, n, a, 1);
      const double up = hi >= 0 ? phi[static_cast<std::size_t>(hi)] : phi[n];
      const double down = lo >= 0 ? phi[static_cast<std::size_t>(lo)] : phi[n];
      const double g = (up - down) / (((hi >= 0) + (lo >= 0)) * dx);
      g2 += g * g;
    }
    return std::sqrt(g2);
  };

  bool any = false;
  for (std::size_t n = 0; n < count; ++n) {
    if (phi[n] == 0.0) {
      t[n] = 0.0;
      done[n] = 1;
      any = true;
      continue;
    }
    const auto c = s.unflatten(n);
    double inv2 = 0.0, nearest = kInf;
    double grad = gradient(n);
    int across = 1;
    for (int a = 0; a < 3; ++a) {
      if (!s.active(a)) continue;
      double dmin = kInf;
      for (int dir : {-1, 1}) {
        const long m = neighbour(s, c, n, a, dir);
        if (m < 0) continue;
        const double q = phi[static_cast<std::size_t>(m)];
        if (phi[n] * q < 0.0) {
          dmin = std::min(dmin, phi[n] / (phi[n] - q) * dx);
          grad += gradient(static_cast<std::size_t>(m));
          ++across;
        }
      }
      if (dmin < kInf) inv2 += 1.0 / std::max(dmin * dmin, 1e-24);
      nearest = std::min(nearest, dmin);
    }
    if (inv2 > 0.0) {
      // distance-like values are kept as they are, so the contour does not drift on repeated calls;
      // otherwise |phi| over the gradient at the contour (mean over both sides), and the crossing
      // estimate at kinks
      grad /= across;
      if (std::abs(grad - 1.0) <= 0.05) {
        t[n] = std::min(std::abs(phi[n]), nearest);
      } else {
        t[n] = grad > 0.5 ? std::min(std::abs(phi[n]) / grad, nearest) : 1.0 / std::sqrt(inv2);
      }
      done[n] = 1;
      any = true;
    }
  }
  if (!any) return false;

  const double c1 = 1.0 / (dx * dx);
  const double c2 = 2.25 / (dx * dx);
  auto update = [&](std::size_t n) {
    const auto c = s.unflatten(n);
    std::vector<Term> terms;
    std::vector<Term> first;
    for (int a = 0; a < 3; ++a) {
      double t1 = kInf;
      int best = 0;
      for (int dir : {-1, 1}) {
        const long m = neighbour(s, c, n, a, dir);
        if (m >= 0 && done[static_cast<std::size_t>(m)] && t[static_cast<std::size_t>(m)] < t1) {
          t1 = t[static_cast<std::size_t>(m)];
          best = dir;
        }
      }
      if (best == 0) continue;
      first.push_back({c1, t1});
      auto c_next = c;
      c_next[a] += best;
      const auto m1 = n + static_cast<std::size_t>(best * s.stride(a));
      const long m2 = neighbour(s, c_next, m1, a, best);
      // across the contour the distance continues with the opposite sign
      const auto u2 = static_cast<std::size_t>(m2 < 0 ? 0 : m2);
      const double d2 = m2 >= 0 && phi[u2] * phi[n] < 0.0 ? -t[u2] : t[u2];
      if (m2 >= 0 && done[u2] && d2 <= t1 && phi[m1] * phi[n] > 0.0) {
        terms.push_back({c2, (4.0 * t1 - d2) / 3.0});
      } else {
        terms.push_back({c1, t1});
      }
    }
    if (first.empty()) return kInf;
    double v = solve_eikonal(terms);
    if (!(v < kInf)) v = solve_eikonal(first);
    return v;
  };

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  auto push_neighbours = [&](std::size_t n) {
    const auto c = s.unflatten(n);
    for (int a = 0; a < 3; ++a) {
      for (int dir : {-1, 1}) {
        const long m = neighbour(s, c, n, a, dir);
        if (m < 0 || done[static_cast<std::size_t>(m)]) continue;
        const auto mu = static_cast<std::size_t>(m);
        const double v = update(mu);
        if (v < t[mu]) {
          t[mu] = v;
          heap.push({v, mu});
        }
      }
    }
  };
  for (std::size_t n = 0; n < count; ++n) {
    if (done[n]) push_neighbours(n);
  }
  while (!heap.empty()) {
    const auto [v, n] = heap.top();
    heap.pop();
    if (done[n] || v > t[n]) continue;
    done[n] = 1;
    push_neighbours(n);
  }

  for (std::size_t n = 0; n < count; ++n) {
    if (t[n] < kInf) field.phi[n] = std::copysign(t[n], phi[n]);
  }
  field.reinit_age = 0;
  return true;
}

std::vector<double> extend_velocity(const LevelSetField& field, const GridBand& band, const std::vector<double>& seed) {
  const GridShape& s = field.lattice.shape;
  if (!(band.shape == s)) throw ConfigError("band does not belong to this level set");
  if (seed.size() != band.nodes.size()) throw ConfigError("band values do not match the band");
  const auto& phi = field.phi;
  const std::size_t count = phi.size();
  std::vector<double> v(count, 0.0);
  std::vector<std::uint8_t> set(count, 0);

  auto on_contour = [&](std::size_t n) {
    const auto c = s.unflatten(n);
    if (phi[n] == 0.0) return true;
    for (int a = 0; a < 3; ++a) {
      for (int dir : {-1, 1}) {
        const long m = neighbour(s, c, n, a, dir);
        if (m >= 0 && phi[n] * phi[static_cast<std::size_t>(m)] <= 0.0) return true;
      }
    }
    return false;
  };
  bool any = false;
  for (std::size_t b = 0; b < band.nodes.size(); ++b) {
    const std::size_t n = band.nodes[b];
    if (on_contour(n)) {
      v[n] = seed[b];
      set[n] = 1;
      any = true;
    }
  }
  if (!any) throw ConfigError("velocity band does not intersect the zero contour");

  std::vector<std::size_t> order;
  order.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    if (!set[n]) order.push_back(n);
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(phi[a]) < std::abs(phi[b]); });
  for (std::size_t n : order) {
    const auto c = s.unflatten(n);
    const double tn = std::abs(phi[n]);
    double num = 0.0, den = 0.0, plain = 0.0;
    int plain_count = 0;
    for (int a = 0; a < 3; ++a) {
      long pick = -1;
      double tp = kInf;
      for (int dir : {-1, 1}) {
        const long m = neighbour(s, c, n, a, dir);
        if (m < 0 || !set[static_cast<std::size_t>(m)]) continue;
        const double tm = std::abs(phi[static_cast<std::size_t>(m)]);
        if (tm < tp) {
          tp = tm;
          pick = m;
        }
      }
      if (pick < 0) continue;
      const double w = std::max(tn - tp, 0.0);
      num += w * v[static_cast<std::size_t>(pick)];
      den += w;
      plain += v[static_cast<std::size_t>(pick)];
      ++plain_count;
    }
    if (plain_count == 0) continue;
    v[n] = den > 0.0 ? num / den : plain / plain_count;
    set[n] = 1;
  }
  return v;
}

std::vector<double> pair_across_interface(const LevelSetField& field, const GridBand& band,
                                          const std::vector<double>& values) {
  const GridShape& s = field.lattice.shape;
  if (!(band.shape == s) || values.size() != band.nodes.size()) throw ConfigError("band values do not match");
  const auto& phi = field.phi;
  const auto& nodes = band.nodes;
  std::vector<double> out(values);
  for (std::size_t b = 0; b < nodes.size(); ++b) {
    const std::size_t n = nodes[b];
    const auto c = s.unflatten(n);
    double sum = 0.0;
    int count = 0;
    for (int a = 0; a < 3; ++a) {
      for (int dir : {-1, 1}) {
        const long m = neighbour(s, c, n, a, dir);
        if (m < 0 || (phi[n] < 0.0) == (phi[static_cast<std::size_t>(m)] < 0.0)) continue;
        const auto it = std::lower_bound(nodes.begin(), nodes.end(), static_cast<std::size_t>(m));
        if (it == nodes.end() || *it != static_cast<std::size_t>(m)) continue;
        sum += values[static_cast<std::size_t>(it - nodes.begin())];
        ++count;
      }
    }
    if (count > 0) out[b] += sum / count;
  }
  return out;
}

void advect(LevelSetField& field, const std::vector<double>& velocity, double dtau,
            const std::vector<std::uint8_t>* frozen) {
  const GridShape& s = field.lattice.shape;
  const double dx = field.lattice.dx;
  if (velocity.size() != field.phi.size()) throw ConfigError("velocity field does not match the level set");
  if (frozen != nullptr && frozen->size() != field.phi.size()) throw ConfigError("freeze mask does not match");
  double vmax = 0.0;
  for (double v : velocity) vmax = std::max(vmax, std::abs(v));
  if (vmax * std::abs(dtau) > 0.5 * dx * (1.0 + 1e-9)) {
    throw ConfigError("advection step violates the CFL limit of half a cell");
  }
  if (dtau == 0.0 || vmax == 0.0) return;

  const auto& phi = field.phi;
  std::vector<double> next(phi);
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double v = velocity[n];
    if (v == 0.0 || (frozen != nullptr && (*frozen)[n])) continue;
    const auto c = s.unflatten(n);
    double grow = 0.0, shrink = 0.0;
    for (int a = 0; a < 3; ++a) {
      if (!s.active(a)) continue;
      const long lo = neighbour(s, c, n, a, -1);
      const long hi = neighbour(s, c, n, a, 1);
      const double dm = lo >= 0 ? (phi[n] - phi[static_cast<std::size_t>(lo)]) / dx : 0.0;
      const double dp = hi >= 0 ? (phi[static_cast<std::size_t>(hi)] - phi[n]) / dx : 0.0;
      grow += std::pow(std::max(dm, 0.0), 2) + std::pow(std::min(dp, 0.0), 2);
      shrink += std::pow(std::min(dm, 0.0), 2) + std::pow(std::max(dp, 0.0), 2);
    }
    const double g = (v * dtau) > 0.0 ? std::sqrt(grow) : std::sqrt(shrink);
    next[n] = phi[n] - dtau * v * g;
  }
  field.phi = std::move(next);
  field.tau += dtau;
  ++field.reinit_age;
}

void advect_substepped(LevelSetField& field, const std::vector<double>& velocity, double dtau,
                       const std::vector<std::uint8_t>* frozen) {
  double vmax = 0.0;
  for (double v : velocity) vmax = std::max(vmax, std::abs(v));
  if (vmax == 0.0 || dtau == 0.0) return;
  const double limit = 0.5 * field.lattice.dx / vmax;
  const int parts = std::max(1, static_cast<int>(std::ceil(std::abs(dtau) / limit - 1e-9)));
  for (int p = 0; p < parts; ++p) advect(field, velocity, dtau / parts, frozen);
}

std::vector<double> interior_mask(const LevelSetField& field) {
  std::vector<double> f(field.phi.size());
  const double dx = field.lattice.dx;
  for (std::size_t n = 0; n < f.size(); ++n) f[n] = std::clamp(0.5 - field.phi[n] / dx, 0.0, 1.0);
  return f;
}

MediaMap to_media(const LevelSetField& field, const DrudeParameters& drude, bool perfect_conductor) {
  MediaMap m = MediaMap::vacuum(field.lattice);
  const auto fill = interior_mask(field);
  if (perfect_conductor) {
    for (std::size_t n = 0; n < fill.size(); ++n) m.pec[n] = fill[n] >= 0.5 ? 1 : 0;
  } else {
    drude.validate();
    m.drude = drude;
    m.fill = fill;
  }
  return m;
}

GridBand make_band(const LevelSetField& field, double width_cells) {
  GridBand band;
  band.shape = field.lattice.shape;
  const double w = width_cells * field.lattice.dx;
  for (std::size_t n = 0; n < field.phi.size(); ++n) {
    if (std::abs(field.phi[n]) <= w) band.nodes.push_back(n);
  }
  return band;
}

std::vector<std::uint8_t> freeze_mask(const Lattice& lattice, const std::vector<Vec3>& points, double cells) {
  std::vector<std::uint8_t> mask(lattice.shape.size(), 0);
  const double r = cells * lattice.dx;
  for (std::size_t n = 0; n < mask.size(); ++n) {
    const Vec3 p = lattice.position(n);
    for (const auto& q : points) {
      Vec3 d = p - q;
      if (!lattice.shape.active(2)) d.z = 0.0;
      if (d.norm() <= r + 1e-12) {
        mask[n] = 1;
        break;
      }
    }
  }
  return mask;
}

void apply_constraints(LevelSetField& field, const SimulationConfig& config) {
  const double dx = field.lattice.dx;
  for (std::size_t n = 0; n < field.phi.size(); ++n) {
    if (!config.in_interior(field.lattice.position(n))) field.phi[n] = std::max(field.phi[n], dx);
  }
}

TopologyStats topology_stats(const LevelSetField& field) {
  const GridShape& s = field.lattice.shape;
  const auto& phi = field.phi;
  const std::size_t count = phi.size();
  const bool three = s.dims() == 3;
  auto solid = [&](int i, int j, int k) { return phi[s.index(i, j, k)] < 0.0; };

  TopologyStats st;
  // Components of the solid, face connectivity.
  std::vector<int> label(count, -1);
  std::vector<std::size_t> stack;
  for (std::size_t n = 0; n < count; ++n) {
    if (phi[n] >= 0.0 || label[n] >= 0) continue;
    label[n] = st.components;
    stack.push_back(n);
    while (!stack.empty()) {
      const std::size_t m = stack.back();
      stack.pop_back();
      const auto c = s.unflatten(m);
      for (int a = 0; a < 3; ++a) {
        for (int dir : {-1, 1}) {
          const long q = neighbour(s, c, m, a, dir);
          if (q < 0) continue;
          const auto qu = static_cast<std::size_t>(q);
          if (phi[qu] < 0.0 && label[qu] < 0) {
            label[qu] = st.components;
            stack.push_back(qu);
          }
        }
      }
    }
    ++st.components;
  }

  // Euler characteristic of the cubical complex spanned by solid nodes.
  long v = 0, e = 0, f = 0, cubes = 0;
  for (int k = 0; k < s.nz; ++k) {
    for (int j = 0; j < s.ny; ++j) {
      for (int i = 0; i < s.nx; ++i) {
        if (!solid(i, j, k)) continue;
        ++v;
        const bool xi = i + 1 < s.nx && solid(i + 1, j, k);
        const bool yj = j + 1 < s.ny && solid(i, j + 1, k);
        const bool zk = three && k + 1 < s.nz && solid(i, j, k + 1);
        e += xi + yj + zk;
        const bool xy = xi && yj && solid(i + 1, j + 1, k);
        const bool xz = xi && zk && solid(i + 1, j, k + 1);
        const bool yz = yj && zk && solid(i, j + 1, k + 1);
        f += xy + xz + yz;
        if (xy && xz && yz && solid(i + 1, j + 1, k + 1)) ++cubes;
      }
    }
  }
  st.euler = static_cast<int>(v - e + f - cubes);

  if (!three) {
    st.holes = st.components - st.euler;
    return st;
  }
  // Enclosed voids: pieces of the complement (full 26-neighbourhood) not touching the lattice edge.
  std::vector<std::uint8_t> seen(count, 0);
  for (std::size_t n = 0; n < count; ++n) {
    if (phi[n] < 0.0 || seen[n]) continue;
    bool open = false;
    seen[n] = 1;
    stack.push_back(n);
    while (!stack.empty()) {
      const std::size_t m = stack.back();
      stack.pop_back();
      const auto c = s.unflatten(m);
      if (c[0] == 0 || c[1] == 0 || c[2] == 0 || c[0] == s.nx - 1 || c[1] == s.ny - 1 || c[2] == s.nz - 1) open = true;
      for (int dk = -1; dk <= 1; ++dk) {
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            const int a = c[0] + di, b = c[1] + dj, d = c[2] + dk;
            if (!s.contains(a, b, d)) continue;
            const std::size_t q = s.index(a, b, d);
            if (phi[q] >= 0.0 && !seen[q]) {
              seen[q] = 1;
              stack.push_back(q);
            }
          }
        }
      }
    }
    if (!open) ++st.cavities;
  }
  st.holes = st.components + st.cavities - st.euler;
  return st;
}

double axis_thickness(const LevelSetField& field, const Vec3& point) {
  const Lattice& lat = field.lattice;
  const GridShape& s = lat.shape;
  const int j = s.active(1) ? static_cast<int>(std::lround(lat.coordinate(point, 1))) : 0;
  const int k = s.active(2) ? static_cast<int>(std::lround(lat.coordinate(point, 2))) : 0;
  if (!s.contains(0, j, k)) throw ConfigError("axis line outside the lattice");
  double sum = 0.0;
  for (int i = 0; i < s.nx; ++i) {
    sum += std::clamp(0.5 - field.phi[s.index(i, j, k)] / lat.dx, 0.0, 1.0);
  }
  return sum * lat.dx;
}

}  // namespace cpd
