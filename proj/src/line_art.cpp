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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "facet/raster.hpp"
#include "facet/sketch.hpp"

namespace facet {

std::size_t SketchImage::ink_count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

SketchImage sketch_from_image(const GrayImage& image) {
  SketchImage s(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) s.bits[i] = image.pixels[i] > 127 ? 1 : 0;
  return s;
}

GrayImage sketch_to_image(const SketchImage& sketch) {
  GrayImage img(sketch.width, sketch.height);
  for (std::size_t i = 0; i < sketch.bits.size(); ++i) img.pixels[i] = sketch.bits[i] ? 255 : 0;
  return img;
}

SketchImage render_line_art(const TriangleMesh& mesh, const Camera& camera, double depth_threshold,
                            double normal_threshold_deg) {
  check_camera(camera);
  SketchImage out(camera.width, camera.height);
  if (mesh.empty()) return out;

  const RasterResult raster = rasterize(mesh, camera);
  const int w = camera.width;
  const int h = camera.height;

  // Triangles are two-sided, so compare normals after turning each one
  // toward the eye.
  const Vec3 eye = camera.center();
  std::vector<Vec3> facing(mesh.face_count());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    Vec3 n = face_normal(mesh, f);
    if (n.dot(eye - mesh.positions[mesh.indices[f][0]]) < 0.0) n = -n;
    facing[f] = n;
  }
  const double cos_limit = std::cos(normal_threshold_deg * std::numbers::pi / 180.0);
  auto crease = [&](std::uint32_t a, std::uint32_t b) {
    if (b == kNoFace || a == b) return false;
    return facing[a].dot(facing[b]) < cos_limit;
  };

  // A plane has (almost) no second difference in depth, however steeply it
  // is seen, while an occlusion edge shows the full jump.
  const auto& depth = raster.depth;
  auto depth_break = [&](int u, int v, int du, int dv, float d) {
    const int u0 = u - du, v0 = v - dv, u1 = u + du, v1 = v + dv;
    const bool has0 = u0 >= 0 && v0 >= 0, has1 = u1 < w && v1 < h;
    const float d0 = has0 ? depth.at(u0, v0) : d;
    const float d1 = has1 ? depth.at(u1, v1) : d;
    if (d0 == kDepthSentinel || d1 == kDepthSentinel) return true;
    if (!has0 || !has1) return false;
    return std::abs(static_cast<double>(d0) - 2.0 * d + d1) > depth_threshold;
  };
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const std::uint32_t f = raster.face_at(u, v);
      if (f == kNoFace) continue;
      const float d = depth.at(u, v);
      bool ink = depth_break(u, v, 1, 0, d) || depth_break(u, v, 0, 1, d);
      if (!ink && u + 1 < w) ink = crease(f, raster.face_at(u + 1, v));
      if (!ink && v + 1 < h) ink = crease(f, raster.face_at(u, v + 1));
      if (ink) out.set(u, v, true);
    }
  }
  return out;
}

}  // namespace facet
