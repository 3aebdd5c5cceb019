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

#include "facet/raster.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <tuple>

#include "facet/error.hpp"
#include "facet/simd.hpp"

namespace facet {
namespace {

// Sutherland-Hodgman against z >= kNearPlane. At most 4 output vertices.
int clip_near(const std::array<Vec3, 3>& in, std::array<Vec3, 4>& out) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const Vec3& a = in[i];
    const Vec3& b = in[(i + 1) % 3];
    const bool a_in = a.z() >= kNearPlane;
    const bool b_in = b.z() >= kNearPlane;
    if (a_in) out[n++] = a;
    if (a_in != b_in) {
      const double t = (kNearPlane - a.z()) / (b.z() - a.z());
      Vec3 p = a + t * (b - a);
      p.z() = kNearPlane;
      out[n++] = p;
    }
  }
  return n;
}

// Edge function coefficients computed from a canonical endpoint order so the
// two triangles sharing an edge get exactly negated coefficients.
void edge_coefficients(const Vec2& p, const Vec2& q, double& a, double& b, double& c) {
  const bool swap = std::tie(q.x(), q.y()) < std::tie(p.x(), p.y());
  const Vec2& s = swap ? q : p;
  const Vec2& e = swap ? p : q;
  const double dx = e.x() - s.x();
  const double dy = e.y() - s.y();
  a = -dy;
  b = dx;
  c = dy * s.x() - dx * s.y();
  if (swap) {
    a = -a;
    b = -b;
    c = -c;
  }
}

void raster_triangle(const std::array<Vec2, 3>& screen, const std::array<double, 3>& inv_z, std::uint32_t face,
                     int width, int height, double* depth, std::uint32_t* face_ids, const simd::Kernels& k) {
  std::array<Vec2, 3> p = screen;
  std::array<double, 3> w = inv_z;
  double area2 = (p[1].x() - p[0].x()) * (p[2].y() - p[0].y()) - (p[1].y() - p[0].y()) * (p[2].x() - p[0].x());
  if (!(std::abs(area2) > 0.0) || !std::isfinite(area2)) return;
  if (area2 < 0.0) {
    std::swap(p[1], p[2]);
    std::swap(w[1], w[2]);
    area2 = -area2;
  }

  simd::TriangleSetup t{};
  t.face = face;
  // Edge e runs from vertex e to e+1 and is opposite vertex e+2.
  for (int e = 0; e < 3; ++e) {
    edge_coefficients(p[e], p[(e + 1) % 3], t.edge_a[e], t.edge_b[e], t.edge_c[e]);
    t.edge_inclusive[e] = t.edge_a[e] > 0.0 || (t.edge_a[e] == 0.0 && t.edge_b[e] > 0.0);
  }
  t.inv_z_a = t.inv_z_b = t.inv_z_c = 0.0;
  for (int e = 0; e < 3; ++e) {
    const double wo = w[(e + 2) % 3] / area2;
    t.inv_z_a += t.edge_a[e] * wo;
    t.inv_z_b += t.edge_b[e] * wo;
    t.inv_z_c += t.edge_c[e] * wo;
  }

  const double min_x = std::min({p[0].x(), p[1].x(), p[2].x()});
  const double max_x = std::max({p[0].x(), p[1].x(), p[2].x()});
  const double min_y = std::min({p[0].y(), p[1].y(), p[2].y()});
  const double max_y = std::max({p[0].y(), p[1].y(), p[2].y()});
  const int x0 = static_cast<int>(std::max(0.0, std::ceil(min_x - 0.5)));
  const int x1 = static_cast<int>(std::min(static_cast<double>(width - 1), std::floor(max_x - 0.5)));
  const int y0 = static_cast<int>(std::max(0.0, std::ceil(min_y - 0.5)));
  const int y1 = static_cast<int>(std::min(static_cast<double>(height - 1), std::floor(max_y - 0.5)));
  if (x0 > x1 || y0 > y1) return;
  for (int y = y0; y <= y1; ++y) {
    const std::size_t row = static_cast<std::size_t>(y) * width;
    k.raster_span(t, y, x0, x1 + 1, depth + row, face_ids + row);
  }
}

}  // namespace

RasterResult rasterize(const TriangleMesh& mesh, const Camera& camera) {
  check_camera(camera);
  const int w = camera.width;
  const int h = camera.height;
  std::vector<double> depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
  RasterResult out;
  out.face_ids.assign(depth.size(), kNoFace);
  const simd::Kernels& k = simd::active();

  for (std::size_t f = 0; f < mesh.indices.size(); ++f) {
    const auto& tri = mesh.indices[f];
    const std::array<Vec3, 3> cam = {camera.to_camera(mesh.positions[tri[0]]),
                                     camera.to_camera(mesh.positions[tri[1]]),
                                     camera.to_camera(mesh.positions[tri[2]])};
    if (cam[0].z() < kNearPlane && cam[1].z() < kNearPlane && cam[2].z() < kNearPlane) continue;
    std::array<Vec3, 4> poly;
    const int n = clip_near(cam, poly);
    for (int i = 1; i + 1 < n; ++i) {
      std::array<Vec2, 3> screen;
      std::array<double, 3> inv_z;
      const std::array<int, 3> ids = {0, i, i + 1};
      for (int j = 0; j < 3; ++j) {
        screen[j] = camera.project_camera(poly[ids[j]]);
        inv_z[j] = 1.0 / poly[ids[j]].z();
      }
      raster_triangle(screen, inv_z, static_cast<std::uint32_t>(f), w, h, depth.data(), out.face_ids.data(), k);
    }
  }

  out.depth = DepthBuffer(w, h);
  for (std::size_t i = 0; i < depth.size(); ++i) {
    if (out.face_ids[i] != kNoFace) out.depth.values[i] = static_cast<float>(depth[i]);
  }
  return out;
}

DepthBuffer render_depth(const TriangleMesh& mesh, const Camera& camera) {
  return rasterize(mesh, camera).depth;
}

std::vector<TurntableView> render_turntable(const TriangleMesh& mesh, int n_views, double elevation_deg,
                                            double distance_factor, int width, int height) {
  if (n_views < 1) fail(ErrorCode::InvalidArgument, "n_views must be >= 1");
  if (mesh.empty()) fail(ErrorCode::EmptyMesh, "turntable of an empty mesh");
  const Sphere sphere = bounding_sphere(mesh);
  const double radius = sphere.radius > 0.0 ? sphere.radius : 1.0;
  std::vector<TurntableView> views;
  views.reserve(n_views);
  for (int k = 0; k < n_views; ++k) {
    TurntableView view;
    view.yaw_deg = 360.0 * k / n_views;
    view.camera = orbit_camera(sphere.center, distance_factor * radius, view.yaw_deg, elevation_deg, width, height,
                               kDefaultFovDeg);
    view.depth = render_depth(mesh, view.camera);
    views.push_back(std::move(view));
  }
  return views;
}

PointCloud back_project(const DepthBuffer& depth, std::span<const Pixel> pixels, const Camera& camera) {
  PointCloud cloud;
  cloud.points.reserve(pixels.size());
  cloud.source_pixels.reserve(pixels.size());
  for (const Pixel& px : pixels) {
    if (px.u < 0 || px.v < 0 || px.u >= depth.width || px.v >= depth.height) {
      fail(ErrorCode::InvalidArgument, "pixel out of bounds");
    }
    const float z = depth.at(px.u, px.v);
    if (z == kDepthSentinel) continue;
    const Vec3 cam(z * (px.u + 0.5 - camera.cx) / camera.fx, z * (px.v + 0.5 - camera.cy) / camera.fy, z);
    cloud.points.push_back(camera.to_world(cam));
    cloud.source_pixels.push_back(px);
  }
  return cloud;
}

std::optional<std::pair<Vec2, double>> project(const Camera& camera, const Vec3& world) {
  const Vec3 cam = camera.to_camera(world);
  if (cam.z() < kNearPlane) return std::nullopt;
  return std::make_pair(camera.project_camera(cam), cam.z());
}

std::vector<std::uint8_t> depth_to_bytes(const DepthBuffer& depth) {
  std::vector<std::uint8_t> out(depth.values.size() * 4);
  std::memcpy(out.data(), depth.values.data(), out.size());
  return out;
}

nlohmann::json depth_header(const DepthBuffer& depth) {
  return {{"width", depth.width},
          {"height", depth.height},
          {"dtype", "float32le"},
          {"layout", "row-major"},
          {"units", "meters"},
          {"sentinel", "0x7F800000"}};
}

DepthBuffer depth_from_bytes(const nlohmann::json& header, std::span<const std::uint8_t> bytes) {
  const int w = header.at("width").get<int>();
  const int h = header.at("height").get<int>();
  if (w <= 0 || h <= 0 || bytes.size() != static_cast<std::size_t>(w) * h * 4) {
    fail(ErrorCode::MalformedContainer, "depth grid size does not match header");
  }
  DepthBuffer d(w, h);
  std::memcpy(d.values.data(), bytes.data(), bytes.size());
  return d;
}

}  // namespace facet
