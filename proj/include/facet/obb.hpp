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
#include <span>
#include <string_view>

#include <json.hpp>

#include "facet/mesh.hpp"
#include "facet/raster.hpp"

namespace facet {

/// Box with center, orthonormal axes (matrix columns, det +1) and
/// half-extents sorted descending.
struct OrientedBoundingBox {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();
  Vec3 half_extents = Vec3::Zero();

  Vec3 axis(int i) const { return axes.col(i); }
  /// Coordinates of `p` in the box frame, relative to the center.
  Vec3 local(const Vec3& p) const { return axes.transpose() * (p - center); }

  bool operator==(const OrientedBoundingBox&) const = default;
};

/// PCA box over the raw points.
///
/// Axes are covariance eigenvectors. Within a cluster of near-equal
/// eigenvalues (gap < 1e-9 * largest) the ambiguous subspace is aligned with
/// the world axes. Axes are then ordered by half-extent (descending, stable
/// w.r.t. eigenvalue order), each of the first two is flipped so its
/// largest-magnitude component is positive, and the third is their cross
/// product. The center is the midpoint of the projection ranges.
///
/// Throws Error{EmptyCloud}.
OrientedBoundingBox fit_obb(std::span<const Vec3> points);
OrientedBoundingBox fit_obb(const PointCloud& cloud);

/// The 8 corners. Corner k uses sign (bit i of k ? + : -) on axis i, so
/// k = 0 is (-,-,-), k = 1 is (+,-,-), k = 7 is (+,+,+).
std::array<Vec3, 8> obb_vertices(const OrientedBoundingBox& obb);

/// True if every local coordinate of `p` is within the half-extent scaled by
/// (1 + inflation); zero extents get an absolute 1e-4 m floor.
bool obb_contains(const OrientedBoundingBox& obb, const Vec3& p, double inflation);

enum class ScalingMode { Uniform, PerAxis };

std::string_view scaling_mode_name(ScalingMode mode) noexcept;
ScalingMode parse_scaling_mode(std::string_view text);

struct AffinePlacement {
  Mat3 linear = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  ScalingMode mode = ScalingMode::PerAxis;

  Vec3 apply(const Vec3& p) const { return linear * p + translation; }
  Mat4 matrix() const;

  bool operator==(const AffinePlacement&) const = default;
};

/// Maps the source box frame onto the target box frame:
/// M(x) = Rt * S * Rs^T * (x - cs) + ct.
///
/// Source axis i pairs with target axis i (extent rank). Where extents tie,
/// the pairing maximizing the summed |dot| between paired axes wins. No
/// mirroring: if the pairing is an odd permutation, the last paired source
/// axis is negated. S is diag(t_i / s_i) in per-axis mode; in uniform mode it
/// is the smallest ratio over axes with a non-zero target extent.
///
/// Throws Error{DegenerateSource} when a zero source extent is paired with a
/// non-zero target extent.
AffinePlacement compute_alignment(const OrientedBoundingBox& source, const OrientedBoundingBox& target,
                                  ScalingMode mode);

nlohmann::json to_json(const OrientedBoundingBox& obb);
OrientedBoundingBox obb_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AffinePlacement& placement);
AffinePlacement placement_from_json(const nlohmann::json& j);

}  // namespace facet
