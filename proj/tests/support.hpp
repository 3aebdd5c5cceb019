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

// Shared helpers for the unit and acceptance tests: independent oracles
// (ray casting, analytic boxes) and small fixture builders.

#include <atomic>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "facet/asset_io.hpp"
#include "facet/camera.hpp"
#include "facet/fixtures.hpp"
#include "facet/mesh.hpp"

namespace facet::test {

/// Scratch directory removed when the object dies.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("facet-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline TriangleMesh single_triangle() {
  TriangleMesh m;
  m.positions = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.indices = {{0, 1, 2}};
  return m;
}

/// Closed box with 12 outward-wound triangles and 8 shared vertices.
inline TriangleMesh box_mesh(const Vec3& center, const Vec3& half, const Mat3& rotation = Mat3::Identity()) {
  TriangleMesh m;
  for (int k = 0; k < 8; ++k) {
    const Vec3 local((k & 1 ? 1 : -1) * half.x(), (k & 2 ? 1 : -1) * half.y(), (k & 4 ? 1 : -1) * half.z());
    m.positions.push_back(center + rotation * local);
  }
  m.indices = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
               {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Camera-space depth of the nearest triangle hit by the ray through the
/// continuous image point (px, py), or nullopt. Plain Moller-Trumbore in
/// camera space, independent of the rasterizer's edge-function setup.
inline std::optional<double> raycast_depth(const TriangleMesh& mesh, const Camera& cam, double px, double py) {
  const Vec3 dir((px - cam.cx) / cam.fx, (py - cam.cy) / cam.fy, 1.0);
  std::optional<double> best;
  for (const auto& tri : mesh.indices) {
    const Vec3 a = cam.to_camera(mesh.positions[tri[0]]);
    const Vec3 b = cam.to_camera(mesh.positions[tri[1]]);
    const Vec3 c = cam.to_camera(mesh.positions[tri[2]]);
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-15) continue;
    const double inv = 1.0 / det;
    const Vec3 s = -a;
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = dir.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) continue;
    const double t = e2.dot(q) * inv;  // dir.z == 1, so t is the depth
    if (t <= 1e-4) continue;
    if (!best || t < *best) best = t;
  }
  return best;
}

/// Smallest distance from (px, py) to any projected triangle edge of a
/// triangle in front of the camera; infinity when there is none.
inline double distance_to_projected_edges(const TriangleMesh& mesh, const Camera& cam, double px, double py) {
  double best = std::numeric_limits<double>::infinity();
  const Vec2 p(px, py);
  for (const auto& tri : mesh.indices) {
    Vec2 q[3];
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      const Vec3 c = cam.to_camera(mesh.positions[tri[i]]);
      if (c.z() <= 1e-4) ok = false;
      else q[i] = cam.project_camera(c);
    }
    if (!ok) return 0.0;  // clipped triangles: treat every pixel as near an edge
    for (int i = 0; i < 3; ++i) {
      const Vec2 a = q[i], b = q[(i + 1) % 3];
      const Vec2 ab = b - a;
      const double len2 = ab.squaredNorm();
      const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      best = std::min(best, (a + t * ab - p).norm());
    }
  }
  return best;
}

/// Random triangles scattered in a unit-ish volume around the origin.
inline TriangleMesh random_mesh(std::mt19937_64& rng, int triangles) {
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> size(0.1, 0.8);
  TriangleMesh m;
  for (int t = 0; t < triangles; ++t) {
    const Vec3 c(pos(rng), pos(rng), pos(rng));
    const double s = size(rng);
    for (int i = 0; i < 3; ++i) m.positions.push_back(c + s * Vec3(pos(rng), pos(rng), pos(rng)));
    const auto base = static_cast<std::uint32_t>(3 * t);
    m.indices.push_back({base, base + 1, base + 2});
  }
  return m;
}

/// Ten structurally different GLB fixtures: bare triangles, attributes,
/// material slots, multi-mesh node hierarchies, generated components and
/// the fixture house.
inline std::vector<std::vector<std::uint8_t>> glb_fixtures() {
  std::vector<std::vector<std::uint8_t>> out;
  out.push_back(write_glb(make_scene(single_triangle(), "triangle")));
  out.push_back(write_glb(SceneAsset{}));
  TriangleMesh cube = box_mesh(Vec3(0, 0, 0), Vec3(0.5, 0.5, 0.5));
  out.push_back(write_glb(make_scene(cube, "cube")));
  TriangleMesh with_attrs = box_mesh(Vec3(1, 2, 3), Vec3(0.3, 0.2, 0.1));
  with_attrs.normals = compute_vertex_normals(with_attrs);
  for (std::size_t i = 0; i < with_attrs.positions.size(); ++i) {
    with_attrs.uvs.emplace_back(0.125 * static_cast<double>(i), 1.0 - 0.125 * static_cast<double>(i));
  }
  with_attrs.material_slot.assign(with_attrs.indices.size(), 0);
  for (std::size_t f = 6; f < with_attrs.indices.size(); ++f) with_attrs.material_slot[f] = 1;
  out.push_back(write_glb(make_scene(with_attrs, "attributes")));
  {
    SceneAsset scene;
    scene.meshes.push_back({"a", single_triangle()});
    scene.meshes.push_back({"b", cube});
    SceneNode root{"root", Mat4::Identity(), std::nullopt, {1, 2}};
    root.transform(0, 0) = 2.0;
    root.transform(1, 1) = 2.0;
    root.transform(2, 2) = 2.0;
    SceneNode child_a{"child_a", Mat4::Identity(), 0, {}};
    child_a.transform(1, 3) = 1.0;
    SceneNode child_b{"child_b", Mat4::Identity(), 1, {}};
    child_b.transform(0, 3) = -3.0;
    scene.nodes = {root, child_a, child_b};
    scene.roots = {0};
    out.push_back(write_glb(scene));
  }
  const auto specs = component_suite(4, 11);
  for (const auto& spec : specs) out.push_back(write_glb(make_scene(make_component(spec), spec.kind)));
  out.push_back(write_glb(make_scene(make_fixture_house(0, 64).mesh, "house")));
  return out;
}

}  // namespace facet::test
