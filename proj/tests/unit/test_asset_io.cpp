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

#include <cmath>
#include <cstring>
#include <limits>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "support.hpp"

using namespace facet;

namespace {

ErrorCode code_of(const std::vector<std::uint8_t>& bytes) {
  try {
    parse_glb(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("single triangle parses to one mesh with three positions") {
  const auto scene = parse_glb(write_glb(make_scene(test::single_triangle(), "tri")));
  REQUIRE(scene.meshes.size() == 1);
  CHECK(scene.meshes[0].mesh.positions.size() == 3);
  CHECK(scene.meshes[0].mesh.indices.size() == 1);
  CHECK(scene.meshes[0].mesh == test::single_triangle());
}

TEST_CASE("zero meshes is an empty scene, not an error") {
  const auto bytes = write_glb(SceneAsset{});
  const auto scene = parse_glb(bytes);
  CHECK(scene.meshes.empty());
  CHECK(flatten_scene(scene).empty());
}

TEST_CASE("short inputs and bad framing are MalformedContainer") {
  CHECK(code_of(std::vector<std::uint8_t>(8, 0)) == ErrorCode::MalformedContainer);
  auto bytes = write_glb(make_scene(test::single_triangle()));
  auto bad_magic = bytes;
  bad_magic[0] = 'x';
  CHECK(code_of(bad_magic) == ErrorCode::MalformedContainer);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 5);
  CHECK(code_of(truncated) == ErrorCode::MalformedContainer);
  auto bad_length = bytes;
  const std::uint32_t huge = 0x7fffffff;
  std::memcpy(bad_length.data() + 8, &huge, 4);
  CHECK(code_of(bad_length) == ErrorCode::MalformedContainer);
}

TEST_CASE("two meshes are listed in the structure chunk") {
  SceneAsset scene;
  scene.meshes.push_back({"a", test::single_triangle()});
  scene.meshes.push_back({"b", test::box_mesh(Vec3::Zero(), Vec3::Constant(1.0))});
  const auto bytes = write_glb(scene);
  std::uint32_t json_len = 0;
  std::memcpy(&json_len, bytes.data() + 12, 4);
  const auto j = nlohmann::json::parse(bytes.begin() + 20, bytes.begin() + 20 + json_len);
  CHECK(j.at("meshes").size() == 2);
  CHECK(j.at("asset").at("version") == "2.0");
  CHECK(parse_glb(bytes).meshes.size() == 2);
}

TEST_CASE("every fixture survives parse -> write -> parse unchanged") {
  for (const auto& bytes : test::glb_fixtures()) {
    const SceneAsset first = parse_glb(bytes);
    const SceneAsset second = parse_glb(write_glb(first));
    CHECK(first == second);
    CHECK(flatten_scene(first) == flatten_scene(second));
  }
}

TEST_CASE("written files are 4-byte aligned with a consistent header length") {
  for (const auto& bytes : test::glb_fixtures()) {
    CHECK(bytes.size() % 4 == 0);
    std::uint32_t total = 0;
    std::memcpy(&total, bytes.data() + 8, 4);
    CHECK(total == bytes.size());
  }
}

TEST_CASE("positions are stored as float32 and read back exactly") {
  TriangleMesh m = test::single_triangle();
  m.positions[1] = Vec3(0.1, 0.2, 0.3);  // not representable in float32
  const TriangleMesh back = flatten_scene(parse_glb(write_glb(make_scene(m))));
  CHECK(back.positions[1].x() == static_cast<double>(0.1f));
  CHECK(back.positions[1].y() == static_cast<double>(0.2f));
}

TEST_CASE("flatten_scene applies node transforms") {
  SUBCASE("identity leaves coordinates unchanged") {
    const auto flat = flatten_scene(make_scene(test::single_triangle()));
    CHECK(flat.positions == test::single_triangle().positions);
  }
  SUBCASE("translation shifts x by one") {
    SceneAsset scene = make_scene(test::single_triangle());
    scene.nodes[0].transform(0, 3) = 1.0;
    const auto flat = flatten_scene(scene);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(flat.positions[i].x() == test::single_triangle().positions[i].x() + 1.0);
    }
  }
  SUBCASE("nested scale 2 then translate (0,1,0) matches the manual product") {
    SceneAsset scene;
    scene.meshes.push_back({"m", test::single_triangle()});
    SceneNode parent{"parent", Mat4::Identity(), std::nullopt, {1}};
    parent.transform.topLeftCorner<3, 3>() *= 2.0;
    SceneNode child{"child", Mat4::Identity(), 0, {}};
    child.transform(1, 3) = 1.0;
    scene.nodes = {parent, child};
    scene.roots = {0};
    Mat4 manual = Mat4::Identity();
    manual.topLeftCorner<3, 3>() *= 2.0;
    Mat4 t = Mat4::Identity();
    t(1, 3) = 1.0;
    manual = manual * t;
    const auto flat = flatten_scene(scene);
    for (std::size_t i = 0; i < 3; ++i) {
      const Vec3 expect = (manual * test::single_triangle().positions[i].homogeneous()).head<3>();
      CHECK((flat.positions[i] - expect).norm() < 1e-12);
    }
  }
}

TEST_CASE("validate_mesh") {
  SUBCASE("a valid triangle reports nothing") {
    const auto r = validate_mesh(test::single_triangle());
    CHECK(r.ok());
    CHECK(r.warnings.empty());
  }
  SUBCASE("index 99 of three vertices is IndexOutOfRange") {
    TriangleMesh m = test::single_triangle();
    m.indices[0][2] = 99;
    const auto r = validate_mesh(m);
    REQUIRE(!r.ok());
    CHECK(r.errors[0].code == IssueCode::IndexOutOfRange);
  }
  SUBCASE("NaN is NonFiniteCoordinate") {
    TriangleMesh m = test::single_triangle();
    m.positions[1].y() = std::numeric_limits<double>::quiet_NaN();
    const auto r = validate_mesh(m);
    REQUIRE(!r.ok());
    CHECK(r.errors[0].code == IssueCode::NonFiniteCoordinate);
    CHECK(r.errors[0].location == 1);
  }
  SUBCASE("attribute counts must match") {
    TriangleMesh m = test::single_triangle();
    m.normals = {Vec3::UnitZ()};
    CHECK(validate_mesh(m).errors[0].code == IssueCode::NormalCountMismatch);
  }
  SUBCASE("degenerate faces are warnings only") {
    TriangleMesh m = test::single_triangle();
    m.indices.push_back({0, 0, 1});
    const auto r = validate_mesh(m);
    CHECK(r.ok());
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].code == IssueCode::DegenerateTriangle);
  }
}

TEST_CASE("out-of-range indices in a file are rejected on read") {
  TriangleMesh m = test::single_triangle();
  m.indices[0][1] = 7;
  // Index out of range in the file must not be accepted on the way back in.
  bool rejected = false;
  try {
    parse_glb(write_glb(make_scene(m)));
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::MalformedContainer;
  }
  CHECK(rejected);
}
