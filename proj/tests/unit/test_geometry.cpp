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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "facet/camera.hpp"
#include "facet/error.hpp"
#include "facet/obb.hpp"
#include "facet/raster.hpp"
#include "support.hpp"

using namespace facet;

namespace {

/// Camera at the origin looking down +Z (identity extrinsics).
Camera identity_camera(int w, int h, double f) {
  Camera c;
  c.width = w;
  c.height = h;
  c.fx = c.fy = f;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  return c;
}

TriangleMesh quad_at_z(double z, double half) {
  TriangleMesh m;
  m.positions = {{-half, -half, z}, {half, -half, z}, {half, half, z}, {-half, half, z}};
  m.indices = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

bool same_vertex_set(const std::array<Vec3, 8>& a, const std::array<Vec3, 8>& b, double tol) {
  for (const Vec3& p : a) {
    if (std::none_of(b.begin(), b.end(), [&](const Vec3& q) { return (p - q).norm() <= tol; })) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("camera validation rejects non-orthonormal rotations") {
  Camera c = identity_camera(8, 8, 8.0);
  CHECK_NOTHROW(check_camera(c));
  c.rotation(0, 0) = 1.1;
  CHECK_THROWS_AS(render_depth(test::single_triangle(), c), Error);
  c = identity_camera(8, 8, 8.0);
  c.rotation = -Mat3::Identity();  // det -1
  CHECK_THROWS_AS(check_camera(c), Error);
}

TEST_CASE("camera JSON round trip is exact") {
  const Camera c = orbit_camera(Vec3(1, 2, 3), 7.5, 33.0, 12.0, 320, 200, kDefaultFovDeg);
  CHECK(camera_from_json(to_json(c)) == c);
}

TEST_CASE("fronto-parallel triangle at z = 5 gives depth 5 at the principal point") {
  const Camera cam = identity_camera(64, 64, 64.0);
  const auto depth = render_depth(quad_at_z(5.0, 1.0), cam);
  CHECK(std::abs(depth.at(32, 32) - 5.0f) <= 1e-5f);
  CHECK(std::abs(depth.at(31, 31) - 5.0f) <= 1e-5f);
}

TEST_CASE("empty mesh leaves every pixel at the sentinel") {
  const auto depth = render_depth(TriangleMesh{}, identity_camera(16, 16, 16.0));
  CHECK(std::all_of(depth.values.begin(), depth.values.end(), [](float v) { return v == kDepthSentinel; }));
}

TEST_CASE("nearest surface wins regardless of draw order") {
  TriangleMesh m = quad_at_z(5.0, 1.0);
  append_mesh(m, quad_at_z(2.0, 1.0));
  const auto depth = render_depth(m, identity_camera(32, 32, 32.0));
  CHECK(depth.at(16, 16) == doctest::Approx(2.0));
}

TEST_CASE("back faces are rasterized too") {
  TriangleMesh m = quad_at_z(3.0, 1.0);
  for (auto& t : m.indices) std::swap(t[1], t[2]);
  CHECK(render_depth(m, identity_camera(16, 16, 16.0)).has_depth(8, 8));
}

TEST_CASE("triangles crossing the near plane are clipped, not dropped") {
  TriangleMesh m;
  m.positions = {{-1, -1, -1}, {1, -1, 3}, {0, 1, 3}};
  m.indices = {{0, 1, 2}};
  const Camera cam = identity_camera(32, 32, 16.0);
  const auto depth = render_depth(m, cam);
  bool any = false;
  for (float v : depth.values) {
    if (v != kDepthSentinel) {
      any = true;
      CHECK(v >= kNearPlane);
    }
  }
  CHECK(any);
}

TEST_CASE("rasterizer agrees with an independent ray caster away from edges") {
  std::mt19937_64 rng(1234);
  int compared = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const TriangleMesh mesh = test::random_mesh(rng, 1 + trial * 5);
    const Camera cam = orbit_camera(Vec3::Zero(), 5.0, 20.0 * trial, 10.0, 64, 64, kDefaultFovDeg);
    const auto depth = render_depth(mesh, cam);
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        const double px = u + 0.5, py = v + 0.5;
        if (test::distance_to_projected_edges(mesh, cam, px, py) < 0.5) continue;
        const auto hit = test::raycast_depth(mesh, cam, px, py);
        if (!hit) {
          CHECK(!depth.has_depth(u, v));
        } else {
          REQUIRE(depth.has_depth(u, v));
          CHECK(std::abs(depth.at(u, v) - *hit) <= 1e-4 * *hit);
          ++compared;
        }
      }
    }
  }
  CHECK(compared > 1000);
}

TEST_CASE("turntable views") {
  const TriangleMesh cube = test::box_mesh(Vec3::Zero(), Vec3::Constant(0.5));
  SUBCASE("four views sit at 0, 90, 180 and 270 degrees") {
    const auto views = render_turntable(cube, 4, 0.0, 2.5, 32, 32);
    REQUIRE(views.size() == 4);
    CHECK(views[0].yaw_deg == 0.0);
    CHECK(views[1].yaw_deg == 90.0);
    CHECK(views[2].yaw_deg == 180.0);
    CHECK(views[3].yaw_deg == 270.0);
  }
  SUBCASE("one view is the front camera") {
    const auto views = render_turntable(cube, 1, 0.0, 2.5, 32, 32);
    REQUIRE(views.size() == 1);
    CHECK(views[0].camera.forward().isApprox(Vec3(0, 0, -1), 1e-12));
  }
  SUBCASE("unit cube depth lies within distance +- sqrt(3)") {
    const double distance = 2.5 * bounding_sphere(cube).radius;
    for (const auto& view : render_turntable(cube, 6, 15.0, 2.5, 48, 48)) {
      bool found = false;
      for (float d : view.depth.values) {
        if (d == kDepthSentinel) continue;
        found = true;
        CHECK(d >= distance - std::sqrt(3.0) - 1e-9);
        CHECK(d <= distance + std::sqrt(3.0) + 1e-9);
      }
      CHECK(found);
    }
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(render_turntable(cube, 0, 0.0, 2.5), Error);
    CHECK_THROWS_AS(render_turntable(TriangleMesh{}, 4, 0.0, 2.5), Error);
  }
}

TEST_CASE("back projection") {
  const Camera cam = orbit_camera(Vec3(0.3, -0.2, 0.1), 4.0, 25.0, -10.0, 40, 30, kDefaultFovDeg);
  SUBCASE("principal point at depth z lies z along the viewing axis") {
    Camera c = identity_camera(9, 9, 9.0);  // principal point at the center of pixel (4, 4)
    DepthBuffer depth(9, 9);
    depth.at(4, 4) = 3.0f;
    const Pixel px{4, 4};
    const auto cloud = back_project(depth, std::span(&px, 1), c);
    REQUIRE(cloud.size() == 1);
    CHECK((cloud.points[0] - c.center()).norm() == doctest::Approx(3.0));
    CHECK((cloud.points[0] - c.center()).normalized().isApprox(c.forward(), 1e-12));
  }
  SUBCASE("sentinel pixels produce an empty cloud") {
    DepthBuffer depth(cam.width, cam.height);
    std::vector<Pixel> all;
    for (int v = 0; v < cam.height; ++v)
      for (int u = 0; u < cam.width; ++u) all.push_back({u, v});
    CHECK(back_project(depth, all, cam).empty());
  }
  SUBCASE("out-of-bounds pixels are rejected") {
    DepthBuffer depth(cam.width, cam.height);
    const Pixel bad{cam.width, 0};
    CHECK_THROWS_AS(back_project(depth, std::span(&bad, 1), cam), Error);
  }
  SUBCASE("project -> rasterize -> back_project returns the point") {
    const TriangleMesh box = test::box_mesh(Vec3(0.3, -0.2, 0.1), Vec3(0.6, 0.4, 0.5));
    const auto raster = rasterize(box, cam);
    int checked = 0;
    for (int v = 0; v < cam.height; ++v) {
      for (int u = 0; u < cam.width; ++u) {
        if (!raster.depth.has_depth(u, v)) continue;
        const Pixel px{u, v};
        const Vec3 world = back_project(raster.depth, std::span(&px, 1), cam).points[0];
        const auto proj = project(cam, world);
        REQUIRE(proj);
        CHECK(std::abs(proj->first.x() - (u + 0.5)) < 1e-6);
        CHECK(std::abs(proj->first.y() - (v + 0.5)) < 1e-6);
        CHECK(std::abs(proj->second - raster.depth.at(u, v)) < 1e-6);
        ++checked;
      }
    }
    CHECK(checked > 50);
  }
}

TEST_CASE("depth bytes round trip with the +inf sentinel pattern") {
  DepthBuffer d(3, 2);
  d.at(1, 0) = 2.5f;
  const auto bytes = depth_to_bytes(d);
  REQUIRE(bytes.size() == 24);
  std::uint32_t first = 0;
  std::memcpy(&first, bytes.data(), 4);
  CHECK(first == 0x7F800000u);
  CHECK(depth_from_bytes(depth_header(d), bytes) == d);
}

TEST_CASE("fit_obb examples") {
  SUBCASE("unit cube corners") {
    std::vector<Vec3> pts;
    for (int k = 0; k < 8; ++k) pts.emplace_back(k & 1, (k >> 1) & 1, (k >> 2) & 1);
    const auto obb = fit_obb(pts);
    CHECK(obb.center.isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
    CHECK(obb.half_extents.isApprox(Vec3(0.5, 0.5, 0.5), 1e-12));
    const Mat3 abs_axes = obb.axes.cwiseAbs();
    CHECK((abs_axes * abs_axes.transpose()).isApprox(Mat3::Identity(), 1e-12));
    CHECK(std::abs(abs_axes.sum() - 3.0) < 1e-12);
  }
  SUBCASE("rotated copies rotate the axes and keep the extents") {
    std::mt19937_64 rng(9);
    const TriangleMesh box = test::box_mesh(Vec3(0, 0, 0), Vec3(2.0, 1.0, 0.5));
    const auto base = fit_obb(box.positions);
    for (int i = 0; i < 20; ++i) {
      const Mat3 q = test::random_rotation(rng);
      std::vector<Vec3> rotated;
      for (const auto& p : box.positions) rotated.push_back(q * p);
      const auto fitted = fit_obb(rotated);
      CHECK((fitted.half_extents - base.half_extents).cwiseAbs().maxCoeff() < 1e-6);
      for (int a = 0; a < 3; ++a) CHECK(std::abs(std::abs(fitted.axis(a).dot(q * base.axis(a))) - 1.0) < 1e-6);
    }
  }
  SUBCASE("planar rectangle has a zero third extent") {
    std::vector<Vec3> pts = {{0, 0, 2}, {3, 0, 2}, {3, 1, 2}, {0, 1, 2}};
    const auto obb = fit_obb(pts);
    CHECK(obb.half_extents.z() == doctest::Approx(0.0));
    CHECK(obb.half_extents.x() == doctest::Approx(1.5));
  }
  SUBCASE("empty cloud") { CHECK_THROWS_AS(fit_obb(std::vector<Vec3>{}), Error); }
}

TEST_CASE("fit_obb properties") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 500; ++i) pts.emplace_back(3 * n(rng), n(rng), 0.3 * n(rng));
  const auto obb = fit_obb(pts);
  CHECK(obb.axes.determinant() == doctest::Approx(1.0));
  CHECK(obb.half_extents.x() >= obb.half_extents.y());
  CHECK(obb.half_extents.y() >= obb.half_extents.z());
  for (const auto& p : pts) {
    const Vec3 l = obb.local(p);
    for (int a = 0; a < 3; ++a) CHECK(std::abs(l[a]) <= obb.half_extents[a] + 1e-9);
  }
  const Vec3 d(10, -4, 2.5);
  std::vector<Vec3> shifted;
  for (const auto& p : pts) shifted.push_back(p + d);
  const auto moved = fit_obb(shifted);
  CHECK((moved.center - (obb.center + d)).norm() < 1e-9);
  CHECK((moved.axes - obb.axes).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((moved.half_extents - obb.half_extents).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("obb_vertices") {
  OrientedBoundingBox unit;
  unit.half_extents = Vec3::Constant(0.5);
  const auto v = obb_vertices(unit);
  CHECK(v[0].isApprox(Vec3(-0.5, -0.5, -0.5)));
  CHECK(v[7].isApprox(Vec3(0.5, 0.5, 0.5)));
  std::array<Vec3, 8> expect;
  for (int k = 0; k < 8; ++k) expect[k] = Vec3(k & 1 ? 0.5 : -0.5, k & 2 ? 0.5 : -0.5, k & 4 ? 0.5 : -0.5);
  CHECK(same_vertex_set(v, expect, 0.0));

  OrientedBoundingBox flat;
  flat.center = Vec3(1, 2, 3);
  for (const auto& p : obb_vertices(flat)) CHECK(p == flat.center);
}

TEST_CASE("compute_alignment examples") {
  OrientedBoundingBox src;
  src.center = Vec3(1, 2, 3);
  src.axes = Eigen::AngleAxisd(0.3, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  src.half_extents = Vec3(2.0, 1.0, 0.5);

  SUBCASE("identical boxes give the identity") {
    const auto m = compute_alignment(src, src, ScalingMode::PerAxis);
    CHECK((m.linear - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(m.translation.norm() < 1e-9);
  }
  SUBCASE("pure translation") {
    OrientedBoundingBox dst = src;
    dst.center += Vec3(0.5, -1.0, 2.0);
    const auto m = compute_alignment(src, dst, ScalingMode::PerAxis);
    CHECK((m.linear - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((m.translation - Vec3(0.5, -1.0, 2.0)).norm() < 1e-9);
  }
  SUBCASE("uniform doubling maps corners onto corners") {
    OrientedBoundingBox dst = src;
    dst.half_extents *= 2.0;
    const auto m = compute_alignment(src, dst, ScalingMode::Uniform);
    const Mat3 rotation_free = dst.axes.transpose() * m.linear * src.axes;
    CHECK((rotation_free - 2.0 * Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    std::array<Vec3, 8> mapped;
    const auto corners = obb_vertices(src);
    for (int k = 0; k < 8; ++k) mapped[k] = m.apply(corners[k]);
    CHECK(same_vertex_set(mapped, obb_vertices(dst), 1e-9));
  }
  SUBCASE("per-axis maps corners onto the corners of an arbitrary target") {
    std::mt19937_64 rng(3);
    OrientedBoundingBox dst;
    dst.center = Vec3(-4, 0.5, 9);
    dst.axes = test::random_rotation(rng);
    dst.half_extents = Vec3(3.0, 0.7, 0.2);
    const auto m = compute_alignment(src, dst, ScalingMode::PerAxis);
    CHECK(m.linear.determinant() > 0.0);
    std::array<Vec3, 8> mapped;
    const auto corners = obb_vertices(src);
    for (int k = 0; k < 8; ++k) mapped[k] = m.apply(corners[k]);
    CHECK(same_vertex_set(mapped, obb_vertices(dst), 1e-9));
  }
  SUBCASE("a flat source cannot fill a thick target") {
    OrientedBoundingBox flat = src;
    flat.half_extents.z() = 0.0;
    CHECK_THROWS_AS(compute_alignment(flat, src, ScalingMode::PerAxis), Error);
  }
  SUBCASE("placement JSON round trip") {
    const auto m = compute_alignment(src, src, ScalingMode::Uniform);
    CHECK(placement_from_json(to_json(m)) == m);
    CHECK(obb_from_json(to_json(src)) == src);
  }
}

TEST_CASE("obb_contains honours inflation") {
  OrientedBoundingBox b;
  b.half_extents = Vec3(1, 1, 0);
  CHECK(obb_contains(b, Vec3(1.04, 0, 0), 0.05));
  CHECK(!obb_contains(b, Vec3(1.06, 0, 0), 0.05));
  CHECK(obb_contains(b, Vec3(0, 0, 5e-5), 0.0));
  CHECK(!obb_contains(b, Vec3(0, 0, 1e-3), 0.0));
}
