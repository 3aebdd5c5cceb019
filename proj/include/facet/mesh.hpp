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

#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace facet {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle geometry in meters (right-handed, Y-up).
///
/// Attribute arrays are either empty or parallel to `positions`;
/// `material_slot` is either empty or parallel to `indices`.
/// Positions are held in double precision; values read from a GLB are exact
/// float32 values and survive a write unchanged.
struct TriangleMesh {
  std::vector<Vec3> positions;
  std::vector<Triangle> indices;
  std::vector<Vec3> normals;
  std::vector<Vec2> uvs;
  std::vector<std::uint32_t> material_slot;

  std::size_t vertex_count() const noexcept { return positions.size(); }
  std::size_t face_count() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
  bool has_normals() const noexcept { return !normals.empty(); }
  bool has_uvs() const noexcept { return !uvs.empty(); }
  bool has_material_slots() const noexcept { return !material_slot.empty(); }

  bool operator==(const TriangleMesh&) const = default;
};

struct Aabb {
  Vec3 min = Vec3::Constant(0.0);
  Vec3 max = Vec3::Constant(0.0);
  bool valid = false;

  void extend(const Vec3& p) {
    if (!valid) {
      min = max = p;
      valid = true;
    } else {
      min = min.cwiseMin(p);
      max = max.cwiseMax(p);
    }
  }
  Vec3 center() const { return 0.5 * (min + max); }
};

Aabb bounds(const TriangleMesh& mesh);

/// Bounding sphere of the referenced vertices: AABB center and the largest
/// distance from it. Radius 0 for an empty mesh.
struct Sphere {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};
Sphere bounding_sphere(const TriangleMesh& mesh);

double triangle_area(const TriangleMesh& mesh, std::size_t face);
double surface_area(const TriangleMesh& mesh);

/// Unit face normal; zero vector for degenerate triangles.
Vec3 face_normal(const TriangleMesh& mesh, std::size_t face);

/// Area-weighted vertex normals. Vertices without non-degenerate incident
/// faces get +Y.
std::vector<Vec3> compute_vertex_normals(const TriangleMesh& mesh);

/// Appends `other` to `mesh`, offsetting indices. Attributes present on only
/// one side are dropped (normals, uvs) or zero-filled (material slots).
void append_mesh(TriangleMesh& mesh, const TriangleMesh& other);

/// Applies an affine transform; normals are transformed by the cofactor
/// matrix and renormalized.
TriangleMesh transformed(const TriangleMesh& mesh, const Mat4& transform);

}  // namespace facet
