#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfrd/mesh.hpp"

namespace surfrd {

// ASCII OFF, 0-based indices, triangles only.
inline void write_off(const SurfaceMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "OFF\n" << mesh.n_vertices() << ' ' << mesh.n_triangles() << " 0\n";
  out.precision(17);
  for (const Vec3& v : mesh.vertices()) out << v.x << ' ' << v.y << ' ' << v.z << '\n';
  for (const Triangle& t : mesh.triangles())
    out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  if (!out) throw std::runtime_error("write error on " + path);
}

inline SurfaceMesh read_off(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  int line_no = 0;
  auto next_content_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& msg) -> std::runtime_error {
    return std::runtime_error(path + ":" + std::to_string(line_no) + ": " + msg);
  };

  std::string line;
  if (!next_content_line(line)) throw fail("empty file");
  {
    std::istringstream ss(line);
    std::string magic;
    ss >> magic;
    if (magic != "OFF") throw fail("expected OFF header");
  }
  if (!next_content_line(line)) throw fail("missing counts line");
  int nv = 0, nf = 0, ne = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf >> ne) || nv < 0 || nf < 0) throw fail("bad counts line");
  }
  std::vector<Vec3> verts(nv);
  for (int i = 0; i < nv; ++i) {
    if (!next_content_line(line)) throw fail("unexpected end of file in vertex block");
    std::istringstream ss(line);
    if (!(ss >> verts[i].x >> verts[i].y >> verts[i].z)) throw fail("bad vertex line");
  }
  std::vector<Triangle> tris(nf);
  for (int i = 0; i < nf; ++i) {
    if (!next_content_line(line)) throw fail("unexpected end of file in face block");
    std::istringstream ss(line);
    int k = 0;
    if (!(ss >> k)) throw fail("bad face line");
    if (k != 3) throw fail("only triangular faces are supported");
    if (!(ss >> tris[i].v[0] >> tris[i].v[1] >> tris[i].v[2])) throw fail("bad face line");
  }
  return SurfaceMesh(std::move(verts), std::move(tris));
}

}  // namespace surfrd
