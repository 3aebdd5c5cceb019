// Copyright 2026 The Facet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "facet/mesh.hpp"

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "facet/error.hpp"

namespace facet {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedContainer: return "MalformedContainer";
    case ErrorCode::UnsupportedFeature: return "UnsupportedFeature";
    case ErrorCode::SerializationOverflow: return "SerializationOverflow";
    case ErrorCode::DegenerateCamera: return "DegenerateCamera";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::EmptyCloud: return "EmptyCloud";
    case ErrorCode::DegenerateSource: return "DegenerateSource";
    case ErrorCode::UndecodableImage: return "UndecodableImage";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::NoDepthInMask: return "NoDepthInMask";
    case ErrorCode::NoFeatures: return "NoFeatures";
    case ErrorCode::EmptyQuery: return "EmptyQuery";
    case ErrorCode::CatalogEmpty: return "CatalogEmpty";
    case ErrorCode::StalePlan: return "StalePlanError";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::DirectoryUnreadable: return "DirectoryUnreadable";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::NothingToUndo: return "NothingToUndo";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Aabb bounds(const TriangleMesh& mesh) {
  Aabb box;
  for (const auto& tri : mesh.indices) {
    for (auto v : tri) box.extend(mesh.positions[v]);
  }
  return box;
}

Sphere bounding_sphere(const TriangleMesh& mesh) {
  const Aabb box = bounds(mesh);
  Sphere s;
  if (!box.valid) return s;
  s.center = box.center();
  for (const auto& tri : mesh.indices) {
    for (auto v : tri) s.radius = std::max(s.radius, (mesh.positions[v] - s.center).norm());
  }
  return s;
}

double triangle_area(const TriangleMesh& mesh, std::size_t face) {
  const auto& t = mesh.indices[face];
  const Vec3& a = mesh.positions[t[0]];
  return 0.5 * (mesh.positions[t[1]] - a).cross(mesh.positions[t[2]] - a).norm();
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (std::size_t f = 0; f < mesh.indices.size(); ++f) area += triangle_area(mesh, f);
  return area;
}

Vec3 face_normal(const TriangleMesh& mesh, std::size_t face) {
  const auto& t = mesh.indices[face];
  const Vec3& a = mesh.positions[t[0]];
  const Vec3 n = (mesh.positions[t[1]] - a).cross(mesh.positions[t[2]] - a);
  const double len = n.norm();
  return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh) {
  std::vector<Vec3> acc(mesh.positions.size(), Vec3::Zero());
  for (const auto& t : mesh.indices) {
    const Vec3& a = mesh.positions[t[0]];
    const Vec3 n = (mesh.positions[t[1]] - a).cross(mesh.positions[t[2]] - a);
    for (auto v : t) acc[v] += n;
  }
  for (Vec3& n : acc) {
    const double len = n.norm();
    n = len > 0.0 && std::isfinite(len) ? Vec3(n / len) : Vec3::UnitY();
  }
  return acc;
}

void append_mesh(TriangleMesh& mesh, const TriangleMesh& other) {
  const bool first = mesh.positions.empty() && mesh.indices.empty();
  const auto base = static_cast<std::uint32_t>(mesh.positions.size());
  const std::size_t old_faces = mesh.indices.size();

  const bool keep_normals = first ? other.has_normals() : mesh.has_normals() && other.has_normals();
  const bool keep_uvs = first ? other.has_uvs() : mesh.has_uvs() && other.has_uvs();
  const bool any_slots = mesh.has_material_slots() || other.has_material_slots();

  mesh.positions.insert(mesh.positions.end(), other.positions.begin(), other.positions.end());
  if (keep_normals) {
    mesh.normals.insert(mesh.normals.end(), other.normals.begin(), other.normals.end());
  } else {
    mesh.normals.clear();
  }
  if (keep_uvs) {
    mesh.uvs.insert(mesh.uvs.end(), other.uvs.begin(), other.uvs.end());
  } else {
    mesh.uvs.clear();
  }
  for (const auto& t : other.indices) mesh.indices.push_back({t[0] + base, t[1] + base, t[2] + base});
  if (any_slots) {
    mesh.material_slot.resize(old_faces, 0);
    if (other.has_material_slots()) {
      mesh.material_slot.insert(mesh.material_slot.end(), other.material_slot.begin(), other.material_slot.end());
    } else {
      mesh.material_slot.resize(mesh.indices.size(), 0);
    }
  }
}

TriangleMesh transformed(const TriangleMesh& mesh, const Mat4& transform) {
  TriangleMesh out = mesh;
  const Mat3 linear = transform.topLeftCorner<3, 3>();
  const Vec3 offset = transform.topRightCorner<3, 1>();
  for (Vec3& p : out.positions) p = linear * p + offset;
  if (out.has_normals()) {
    // Cofactor matrix = det(A) * A^-T, defined even when A is singular.
    Mat3 cof;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        const int r1 = (r + 1) % 3, r2 = (r + 2) % 3, c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        cof(r, c) = linear(r1, c1) * linear(r2, c2) - linear(r1, c2) * linear(r2, c1);
      }
    }
    if (linear.determinant() < 0.0) cof = -cof;
    for (Vec3& n : out.normals) {
      const Vec3 m = cof * n;
      const double len = m.norm();
      n = len > 1e-300 ? Vec3(m / len) : Vec3::UnitY();
    }
  }
  return out;
}

}  // namespace facet
