#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfrd/assembly.hpp"
#include "surfrd/mesh.hpp"

namespace surfrd {

inline std::string vtk_component_name(int k, int r) {
  if (r <= 3) {
    const char* names[3] = {"u", "v", "w"};
    return names[k];
  }
  return "u" + std::to_string(k);
}

// Legacy ASCII VTK polydata with one SCALARS block per field component.
inline void write_vtk(const SurfaceMesh& mesh, const NodalField& field, const std::string& path) {
  if (field.n_nodes != mesh.n_vertices()) {
    throw std::invalid_argument("write_vtk: field does not match mesh");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(17);
  out << "# vtk DataFile Version 3.0\n";
  out << "surfrd nodal field\n";
  out << "ASCII\n";
  out << "DATASET POLYDATA\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const Vec3& p : mesh.vertices()) out << p.x << ' ' << p.y << ' ' << p.z << '\n';
  out << "POLYGONS " << mesh.n_triangles() << ' ' << 4 * mesh.n_triangles() << '\n';
  for (const Triangle& t : mesh.triangles())
    out << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
  out << "POINT_DATA " << mesh.n_vertices() << '\n';
  for (int k = 0; k < field.n_components; ++k) {
    out << "SCALARS " << vtk_component_name(k, field.n_components) << " double 1\n";
    out << "LOOKUP_TABLE default\n";
    const auto xi = field.component(k);
    for (int i = 0; i < field.n_nodes; ++i) out << xi[i] << '\n';
  }
  if (!out) throw std::runtime_error("write error on " + path);
}

// Reads back the POINTS block of a legacy VTK polydata file (used by tests
// and round-trip checks; not a general VTK parser).
inline std::vector<Vec3> read_vtk_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  int n = -1;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "POINTS") {
      if (!(ss >> n)) throw std::runtime_error(path + ": malformed POINTS line");
      break;
    }
  }
  if (n < 0) throw std::runtime_error(path + ": no POINTS block");
  std::vector<Vec3> pts(n);
  for (int i = 0; i < n; ++i) {
    if (!(in >> pts[i].x >> pts[i].y >> pts[i].z)) {
      throw std::runtime_error(path + ": truncated POINTS block");
    }
  }
  return pts;
}

}  // namespace surfrd
