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

#include "facet/obb.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "facet/error.hpp"

namespace facet {
namespace {

constexpr double kTieRelative = 1e-9;
constexpr double kZeroExtentFloor = 1e-4;

void fix_sign(Vec3& axis) {
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(axis[i]) > std::abs(axis[best])) best = i;
  }
  if (axis[best] < 0.0) axis = -axis;
}

// Orthonormal basis of the plane orthogonal to `normal`, aligned with the
// world axis that has the largest in-plane component.
std::pair<Vec3, Vec3> world_aligned_plane_basis(const Vec3& normal) {
  int best = 0;
  double best_len = -1.0;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = Vec3::Unit(i);
    const double len = (e - e.dot(normal) * normal).norm();
    if (len > best_len + 1e-12) {
      best = i;
      best_len = len;
    }
  }
  const Vec3 e = Vec3::Unit(best);
  Vec3 a = (e - e.dot(normal) * normal).normalized();
  Vec3 b = normal.cross(a).normalized();
  return {a, b};
}

// Eigenvectors of the covariance as columns, ordered by eigenvalue
// descending, with near-degenerate subspaces aligned to the world axes.
Mat3 principal_axes(const Mat3& cov) {
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  const Vec3 ev_asc = solver.eigenvalues();
  const Mat3 vec_asc = solver.eigenvectors();
  Vec3 lambda(ev_asc[2], ev_asc[1], ev_asc[0]);
  Mat3 v;
  v.col(0) = vec_asc.col(2);
  v.col(1) = vec_asc.col(1);
  v.col(2) = vec_asc.col(0);

  const double scale = std::max(std::abs(lambda[0]), 0.0);
  const double tol = kTieRelative * scale;
  const bool tie01 = lambda[0] - lambda[1] < tol || scale == 0.0;
  const bool tie12 = lambda[1] - lambda[2] < tol || scale == 0.0;
  if (tie01 && tie12) return Mat3::Identity();
  if (tie01) {
    Vec3 n = v.col(2);
    fix_sign(n);
    auto [a, b] = world_aligned_plane_basis(n);
    v.col(0) = a;
    v.col(1) = b;
    v.col(2) = n;
  } else if (tie12) {
    Vec3 n = v.col(0);
    fix_sign(n);
    auto [a, b] = world_aligned_plane_basis(n);
    v.col(0) = n;
    v.col(1) = a;
    v.col(2) = b;
  }
  return v;
}

}  // namespace

OrientedBoundingBox fit_obb(std::span<const Vec3> points) {
  if (points.empty()) fail(ErrorCode::EmptyCloud, "cannot fit a box to an empty point cloud");
  const double n = static_cast<double>(points.size());
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= n;
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) {
    const Vec3 d = p - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= n;

  const Mat3 eig = principal_axes(cov);

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : points) {
    const Vec3 q = eig.transpose() * (p - mean);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const Vec3 mid = 0.5 * (lo + hi);
  const Vec3 half = 0.5 * (hi - lo);

  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return half[a] > half[b]; });

  OrientedBoundingBox box;
  box.center = mean + eig * mid;
  Vec3 a0 = eig.col(order[0]);
  Vec3 a1 = eig.col(order[1]);
  fix_sign(a0);
  fix_sign(a1);
  box.axes.col(0) = a0;
  box.axes.col(1) = a1;
  box.axes.col(2) = a0.cross(a1);
  box.half_extents = Vec3(half[order[0]], half[order[1]], half[order[2]]);
  return box;
}

OrientedBoundingBox fit_obb(const PointCloud& cloud) { return fit_obb(std::span<const Vec3>(cloud.points)); }

std::array<Vec3, 8> obb_vertices(const OrientedBoundingBox& obb) {
  std::array<Vec3, 8> out;
  for (int k = 0; k < 8; ++k) {
    Vec3 p = obb.center;
    for (int i = 0; i < 3; ++i) {
      const double s = (k >> i) & 1 ? 1.0 : -1.0;
      p += s * obb.half_extents[i] * obb.axis(i);
    }
    out[k] = p;
  }
  return out;
}

bool obb_contains(const OrientedBoundingBox& obb, const Vec3& p, double inflation) {
  const Vec3 q = obb.local(p);
  for (int i = 0; i < 3; ++i) {
    double limit = obb.half_extents[i] * (1.0 + inflation);
    if (obb.half_extents[i] == 0.0) limit = kZeroExtentFloor;
    if (!(std::abs(q[i]) <= limit)) return false;
  }
  return true;
}

std::string_view scaling_mode_name(ScalingMode mode) noexcept {
  return mode == ScalingMode::Uniform ? "uniform" : "per_axis";
}

ScalingMode parse_scaling_mode(std::string_view text) {
  if (text == "uniform") return ScalingMode::Uniform;
  if (text == "per_axis" || text == "per-axis") return ScalingMode::PerAxis;
  fail(ErrorCode::InvalidArgument, "unknown scaling mode '" + std::string(text) + "'");
}

Mat4 AffinePlacement::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = linear;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

AffinePlacement compute_alignment(const OrientedBoundingBox& source, const OrientedBoundingBox& target,
                                  ScalingMode mode) {
  const Vec3& s = source.half_extents;
  const Vec3& t = target.half_extents;
  auto tied = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max({std::abs(x), std::abs(y), 1.0}); };

  // Candidate pairings: permutations that pair the same extent values as the
  // rank pairing, i.e. that only reshuffle within tie groups.
  std::array<int, 3> best = {0, 1, 2};
  double best_score = -1.0;
  std::array<int, 3> perm = {0, 1, 2};
  do {
    bool valid = true;
    for (int i = 0; i < 3 && valid; ++i) valid = tied(s[perm[i]], s[i]) || tied(t[i], t[perm[i]]);
    if (!valid) continue;
    double score = 0.0;
    for (int i = 0; i < 3; ++i) score += std::abs(target.axis(i).dot(source.axis(perm[i])));
    if (score > best_score + 1e-12) {
      best_score = score;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Mat3 rs;
  Vec3 sp;
  for (int i = 0; i < 3; ++i) {
    rs.col(i) = source.axis(best[i]);
    sp[i] = s[best[i]];
  }
  if (rs.determinant() < 0.0) rs.col(2) = -rs.col(2);

  Vec3 scale;
  for (int i = 0; i < 3; ++i) {
    if (sp[i] == 0.0) {
      if (t[i] > 0.0) {
        fail(ErrorCode::DegenerateSource,
             "source extent " + std::to_string(i) + " is zero but the matched target extent is not");
      }
      scale[i] = 1.0;
    } else {
      scale[i] = t[i] / sp[i];
    }
  }
  if (mode == ScalingMode::Uniform) {
    double u = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      if (sp[i] > 0.0 && t[i] > 0.0) u = std::min(u, scale[i]);
    }
    if (!std::isfinite(u)) u = 0.0;
    scale = Vec3::Constant(u);
  }

  AffinePlacement out;
  out.mode = mode;
  out.linear = target.axes * scale.asDiagonal() * rs.transpose();
  out.translation = target.center - out.linear * source.center;
  return out;
}

nlohmann::json to_json(const OrientedBoundingBox& obb) {
  nlohmann::json axes = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    for (int c = 0; c < 3; ++c) axes.push_back(obb.axes(c, i));
  }
  return {{"center", {obb.center.x(), obb.center.y(), obb.center.z()}},
          {"axes", axes},
          {"half_extents", {obb.half_extents.x(), obb.half_extents.y(), obb.half_extents.z()}}};
}

OrientedBoundingBox obb_from_json(const nlohmann::json& j) {
  try {
    OrientedBoundingBox obb;
    const auto& c = j.at("center");
    const auto& a = j.at("axes");
    const auto& h = j.at("half_extents");
    if (c.size() != 3 || a.size() != 9 || h.size() != 3) fail(ErrorCode::InvalidArgument, "OBB JSON sizes");
    for (int i = 0; i < 3; ++i) {
      obb.center[i] = c[i].get<double>();
      obb.half_extents[i] = h[i].get<double>();
      for (int k = 0; k < 3; ++k) obb.axes(k, i) = a[i * 3 + k].get<double>();
    }
    return obb;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("OBB JSON: ") + e.what());
  }
}

nlohmann::json to_json(const AffinePlacement& p) {
  nlohmann::json m = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m.push_back(p.linear(r, c));
    m.push_back(p.translation[r]);
  }
  return {{"matrix", m}, {"mode", scaling_mode_name(p.mode)}};
}

AffinePlacement placement_from_json(const nlohmann::json& j) {
  try {
    AffinePlacement p;
    const auto& m = j.at("matrix");
    if (m.size() != 12) fail(ErrorCode::InvalidArgument, "placement matrix needs 12 numbers");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.linear(r, c) = m[r * 4 + c].get<double>();
      p.translation[r] = m[r * 4 + 3].get<double>();
    }
    p.mode = parse_scaling_mode(j.at("mode").get<std::string>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("placement JSON: ") + e.what());
  }
}

}  // namespace facet
