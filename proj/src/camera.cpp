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

#include "facet/camera.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "facet/error.hpp"

namespace facet {

void check_camera(const Camera& c) {
  const Mat3 gram = c.rotation * c.rotation.transpose();
  if (!c.rotation.allFinite() || (gram - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(c.rotation.determinant() - 1.0) > 1e-9) {
    fail(ErrorCode::DegenerateCamera, "camera rotation is not a proper orthonormal matrix");
  }
  if (!c.translation.allFinite()) fail(ErrorCode::DegenerateCamera, "camera translation is not finite");
  if (!(c.fx > 0.0) || !(c.fy > 0.0) || c.width <= 0 || c.height <= 0 || !(c.cx >= 0.0) || c.cx >= c.width ||
      !(c.cy >= 0.0) || c.cy >= c.height) {
    fail(ErrorCode::DegenerateCamera, "camera intrinsics out of range");
  }
}

Camera look_at(const Vec3& eye, const Vec3& target, int width, int height, double vertical_fov_deg) {
  Vec3 forward = target - eye;
  if (forward.norm() == 0.0) forward = -Vec3::UnitZ();
  forward.normalize();
  Vec3 up = Vec3::UnitY();
  if (std::abs(forward.dot(up)) > 1.0 - 1e-12) up = -Vec3::UnitZ();
  // Image y points down, so the camera's +Y is world "down" projected off the
  // view direction; x = y cross z keeps the frame right-handed.
  const Vec3 y_axis = -(up - up.dot(forward) * forward).normalized();
  const Vec3 x_axis = y_axis.cross(forward).normalized();

  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fy = 0.5 * height / std::tan(0.5 * vertical_fov_deg * std::numbers::pi / 180.0);
  cam.fx = cam.fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.rotation.row(0) = x_axis.transpose();
  cam.rotation.row(1) = y_axis.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -(cam.rotation * eye);
  return cam;
}

Camera orbit_camera(const Vec3& center, double distance, double yaw_deg, double elevation_deg, int width,
                    int height, double vertical_fov_deg) {
  const double yaw = yaw_deg * std::numbers::pi / 180.0;
  const double elev = elevation_deg * std::numbers::pi / 180.0;
  const Vec3 dir(std::sin(yaw) * std::cos(elev), std::sin(elev), std::cos(yaw) * std::cos(elev));
  return look_at(center + distance * dir, center, width, height, vertical_fov_deg);
}

Camera default_front_camera(const TriangleMesh& mesh, int width, int height) {
  const Aabb box = bounds(mesh);
  const Vec3 center = box.valid ? box.center() : Vec3::Zero();
  double radius = 0.0;
  for (const auto& t : mesh.indices) {
    for (auto v : t) radius = std::max(radius, (mesh.positions[v] - center).norm());
  }
  if (radius == 0.0) radius = 1.0;
  return orbit_camera(center, 2.5 * radius, 0.0, 0.0, width, height, kDefaultFovDeg);
}

nlohmann::json to_json(const Camera& c) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 3; ++k) rot.push_back(c.rotation(r, k));
  }
  return {{"fx", c.fx},
          {"fy", c.fy},
          {"cx", c.cx},
          {"cy", c.cy},
          {"width", c.width},
          {"height", c.height},
          {"rotation", rot},
          {"translation", {c.translation.x(), c.translation.y(), c.translation.z()}}};
}

Camera camera_from_json(const nlohmann::json& j) {
  try {
    Camera c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    const auto& rot = j.at("rotation");
    const auto& t = j.at("translation");
    if (rot.size() != 9 || t.size() != 3) fail(ErrorCode::InvalidArgument, "camera rotation/translation size");
    for (int r = 0; r < 3; ++r) {
      for (int k = 0; k < 3; ++k) c.rotation(r, k) = rot[r * 3 + k].get<double>();
    }
    c.translation = Vec3(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
    return c;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("camera JSON: ") + e.what());
  }
}

}  // namespace facet
