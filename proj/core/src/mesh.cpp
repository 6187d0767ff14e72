#include "cpdesign/mesh.hpp"

#include <map>
#include <ostream>
#include <utility>

namespace cpd {

namespace {

Vec3 cross(const Vec3& a, const Vec3& b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

class VertexPool {
 public:
  VertexPool(const LevelSetField& f, ContourMesh& m) : field_(f), mesh_(m) {}

  int on_edge(std::size_t a, std::size_t b) {
    if (a > b) std::swap(a, b);
    auto [it, fresh] = ids_.try_emplace({a, b}, static_cast<int>(mesh_.vertices.size()));
    if (fresh) {
      const double pa = field_.phi[a], pb = field_.phi[b];
      const double t = pa / (pa - pb);
      const Vec3 xa = field_.lattice.position(a), xb = field_.lattice.position(b);
      mesh_.vertices.push_back(xa + t * (xb - xa));
    }
    return it->second;
  }

 private:
  const LevelSetField& field_;
  ContourMesh& mesh_;
  std::map<std::pair<std::size_t, std::size_t>, int> ids_;
};

void squares(const LevelSetField& f, ContourMesh& mesh) {
  const GridShape& s = f.lattice.shape;
  VertexPool pool(f, mesh);
  for (int j = 0; j + 1 < s.ny; ++j) {
    for (int i = 0; i + 1 < s.nx; ++i) {
      // corners counter-clockwise
      const std::size_t c[4] = {s.index(i, j, 0), s.index(i + 1, j, 0), s.index(i + 1, j + 1, 0), s.index(i, j + 1, 0)};
      bool in[4];
      int mask = 0;
      for (int q = 0; q < 4; ++q) {
        in[q] = f.phi[c[q]] < 0.0;
        mask |= in[q] << q;
      }
      if (mask == 0 || mask == 15) continue;
      std::vector<int> cut;  // edges q -> q+1 with a sign change
      for (int q = 0; q < 4; ++q) {
        if (in[q] != in[(q + 1) % 4]) cut.push_back(q);
      }
      auto vert = [&](int q) { return pool.on_edge(c[q], c[(q + 1) % 4]); };
      if (cut.size() == 2) {
        mesh.segments.push_back({vert(cut[0]), vert(cut[1])});
      } else {
        // saddle: decide by the cell-centre average
        double centre = 0.0;
        for (auto n : c) centre += 0.25 * f.phi[n];
        const bool centre_in = centre < 0.0;
        // pair each edge with a neighbour so that the centre region stays connected if it matches corner 0
        if (in[0] == centre_in) {
          mesh.segments.push_back({vert(0), vert(1)});
          mesh.segments.push_back({vert(2), vert(3)});
        } else {
          mesh.segments.push_back({vert(3), vert(0)});
          mesh.segments.push_back({vert(1), vert(2)});
        }
      }
    }
  }
}

void tetrahedra(const LevelSetField& f, ContourMesh& mesh) {
  static constexpr int kTets[6][4] = {{0, 1, 3, 7}, {0, 3, 2, 7}, {0, 2, 6, 7}, {0, 6, 4, 7}, {0, 4, 5, 7}, {0, 5, 1, 7}};
  const GridShape& s = f.lattice.shape;
  VertexPool pool(f, mesh);
  for (int k = 0; k + 1 < s.nz; ++k) {
    for (int j = 0; j + 1 < s.ny; ++j) {
      for (int i = 0; i + 1 < s.nx; ++i) {
        std::size_t corner[8];
        int inside = 0;
        for (int q = 0; q < 8; ++q) {
          corner[q] = s.index(i + (q & 1), j + ((q >> 1) & 1), k + ((q >> 2) & 1));
          inside += f.phi[corner[q]] < 0.0;
        }
        if (inside == 0 || inside == 8) continue;
        for (const auto& tet : kTets) {
          std::vector<std::size_t> in, out;
          for (int q : tet) (f.phi[corner[q]] < 0.0 ? in : out).push_back(corner[q]);
          if (in.empty() || out.empty()) continue;
          Vec3 ci, co;
          for (auto n : in) ci = ci + (1.0 / in.size()) * f.lattice.position(n);
          for (auto n : out) co = co + (1.0 / out.size()) * f.lattice.position(n);
          const Vec3 outward = co - ci;
          auto emit = [&](int a, int b, int c) {
            const Vec3 n = cross(mesh.vertices[b] - mesh.vertices[a], mesh.vertices[c] - mesh.vertices[a]);
            if (dot(n, outward) < 0.0) std::swap(b, c);
            mesh.triangles.push_back({a, b, c});
          };
          if (in.size() == 1 || out.size() == 1) {
            const auto& lone = in.size() == 1 ? in : out;
            const auto& rest = in.size() == 1 ? out : in;
            emit(pool.on_edge(lone[0], rest[0]), pool.on_edge(lone[0], rest[1]), pool.on_edge(lone[0], rest[2]));
          } else {
            const int a = pool.on_edge(in[0], out[0]);
            const int b = pool.on_edge(in[0], out[1]);
            const int c = pool.on_edge(in[1], out[1]);
            const int d = pool.on_edge(in[1], out[0]);
            emit(a, b, c);
            emit(a, c, d);
          }
        }
      }
    }
  }
}

}  // namespace

ContourMesh extract_contour(const LevelSetField& field) {
  if (!field.has_interior()) throw ConfigError("level set has no interior to export");
  ContourMesh mesh;
  if (field.lattice.shape.dims() == 2) {
    squares(field, mesh);
  } else {
    tetrahedra(field, mesh);
  }
  return mesh;
}

int euler_characteristic(const ContourMesh& mesh) {
  std::map<std::pair<int, int>, int> edges;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const int a = t[e], b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  }
  if (mesh.triangles.empty()) {
    return static_cast<int>(mesh.vertices.size()) - static_cast<int>(mesh.segments.size());
  }
  return static_cast<int>(mesh.vertices.size()) - static_cast<int>(edges.size()) +
         static_cast<int>(mesh.triangles.size());
}

bool is_closed(const ContourMesh& mesh) {
  if (!mesh.triangles.empty()) {
    std::map<std::pair<int, int>, int> edges;
    for (const auto& t : mesh.triangles) {
      for (int e = 0; e < 3; ++e) {
        const int a = t[e], b = t[(e + 1) % 3];
        ++edges[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& [key, n] : edges) {
      if (n != 2) return false;
    }
    return true;
  }
  std::vector<int> degree(mesh.vertices.size(), 0);
  for (const auto& s : mesh.segments) {
    ++degree[static_cast<std::size_t>(s[0])];
    ++degree[static_cast<std::size_t>(s[1])];
  }
  for (int d : degree) {
    if (d != 2) return false;
  }
  return !mesh.segments.empty();
}

void write_obj(std::ostream& out, const ContourMesh& mesh, const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out.precision(9);
  for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const auto& s : mesh.segments) out << "l " << s[0] + 1 << ' ' << s[1] + 1 << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace cpd
