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

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "facet/camera.hpp"
#include "facet/mesh.hpp"

namespace facet {

inline constexpr float kDepthSentinel = std::numeric_limits<float>::infinity();
inline constexpr std::uint32_t kNoFace = std::numeric_limits<std::uint32_t>::max();

/// Metric camera-space Z per pixel, row-major. Background is +infinity.
struct DepthBuffer {
  int width = 0;
  int height = 0;
  std::vector<float> values;

  DepthBuffer() = default;
  DepthBuffer(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h, kDepthSentinel) {}

  float at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  float& at(int u, int v) { return values[static_cast<std::size_t>(v) * width + u]; }
  bool has_depth(int u, int v) const { return at(u, v) != kDepthSentinel; }

  bool operator==(const DepthBuffer&) const = default;
};

/// Depth plus the id of the nearest triangle per pixel (kNoFace on background).
struct RasterResult {
  DepthBuffer depth;
  std::vector<std::uint32_t> face_ids;

  std::uint32_t face_at(int u, int v) const { return face_ids[static_cast<std::size_t>(v) * depth.width + u]; }
};

/// Near clipping plane in camera-space meters.
inline constexpr double kNearPlane = 1e-4;

/// Rasterizes every triangle (both windings) with the top-left rule at pixel
/// centers. Triangles are clipped against the near plane.
/// Throws Error{DegenerateCamera}.
RasterResult rasterize(const TriangleMesh& mesh, const Camera& camera);

DepthBuffer render_depth(const TriangleMesh& mesh, const Camera& camera);

struct TurntableView {
  double yaw_deg = 0.0;
  Camera camera;
  DepthBuffer depth;
};

/// Evenly spaced yaws 360*k/n about the bounding-sphere center at
/// distance_factor * radius. Throws Error{EmptyMesh}, Error{InvalidArgument}.
std::vector<TurntableView> render_turntable(const TriangleMesh& mesh, int n_views, double elevation_deg,
                                            double distance_factor, int width = 256, int height = 256);

struct Pixel {
  int u = 0;
  int v = 0;
  bool operator==(const Pixel&) const = default;
  auto operator<=>(const Pixel&) const = default;
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Pixel> source_pixels;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
};

/// Lifts pixels with depth to world space through pixel centers; sentinel
/// pixels are skipped. Throws Error{InvalidArgument} for out-of-bounds pixels.
PointCloud back_project(const DepthBuffer& depth, std::span<const Pixel> pixels, const Camera& camera);

/// World point to continuous image coordinates plus camera-space depth;
/// nullopt when the point is at or behind the near plane.
std::optional<std::pair<Vec2, double>> project(const Camera& camera, const Vec3& world);

/// Raw float32 grid (row-major, little-endian) and its JSON header.
/// The sentinel is written as the +inf bit pattern 0x7F800000.
std::vector<std::uint8_t> depth_to_bytes(const DepthBuffer& depth);
nlohmann::json depth_header(const DepthBuffer& depth);
DepthBuffer depth_from_bytes(const nlohmann::json& header, std::span<const std::uint8_t> bytes);

}  // namespace facet
