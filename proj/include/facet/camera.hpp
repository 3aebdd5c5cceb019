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

#include <optional>

#include <json.hpp>

#include "facet/mesh.hpp"

namespace facet {

/// Pinhole camera. Camera-from-world: x_cam = rotation * x_world + translation.
/// The camera looks along +Z; image origin is top-left with x right, y down.
/// Pixel (u, v) has its center at continuous coordinates (u + 0.5, v + 0.5).
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 to_world(const Vec3& cam) const { return rotation.transpose() * (cam - translation); }
  Vec3 center() const { return -(rotation.transpose() * translation); }
  /// Viewing direction (+Z of the camera frame) in world coordinates.
  Vec3 forward() const { return rotation.row(2).transpose(); }

  /// Continuous image coordinates of a camera-space point with z > 0.
  Vec2 project_camera(const Vec3& cam) const {
    return {fx * cam.x() / cam.z() + cx, fy * cam.y() / cam.z() + cy};
  }

  bool operator==(const Camera&) const = default;
};

/// Throws Error{DegenerateCamera} when the rotation is not orthonormal with
/// det +1 (tolerance 1e-9) or the intrinsics are out of range.
void check_camera(const Camera& camera);

/// Camera at `eye` aimed at `target`, with world +Y mapping to image-up.
/// Falls back to -Z as the up hint when looking straight up or down.
Camera look_at(const Vec3& eye, const Vec3& target, int width, int height, double vertical_fov_deg);

/// Camera on a sphere around `center`: yaw 0 looks down -Z from the +Z side,
/// positive yaw orbits toward +X, positive elevation raises the eye.
Camera orbit_camera(const Vec3& center, double distance, double yaw_deg, double elevation_deg, int width,
                    int height, double vertical_fov_deg);

/// Front elevation camera framing the mesh: looks along world -Z at the AABB
/// center from 2.5x the bounding radius.
Camera default_front_camera(const TriangleMesh& mesh, int width, int height);

inline constexpr double kDefaultFovDeg = 50.0;

nlohmann::json to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& j);

}  // namespace facet
