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
#include <vector>

#include <json.hpp>

#include "facet/mesh.hpp"
#include "facet/obb.hpp"

namespace facet {

inline constexpr double kDefaultInflation = 0.05;

/// Ids (ascending) of triangles whose three vertices all lie inside `obb`
/// with every half-extent scaled by (1 + inflation).
std::vector<std::uint32_t> select_faces_in_region(const TriangleMesh& mesh, const OrientedBoundingBox& obb,
                                                  double inflation = kDefaultInflation);

/// A component moved into its own OBB frame: centred at the origin with the
/// box axes on the coordinate axes. Each world axis (Y first, then Z, then
/// X) takes the box axis most parallel to it, so an upright, front-facing
/// part stays upright and front-facing.
struct CanonicalComponent {
  TriangleMesh mesh;
  OrientedBoundingBox obb;  // refit on the canonical mesh
  Mat4 from_source = Mat4::Identity();
};

/// Throws Error{EmptyMesh}.
CanonicalComponent canonicalize_component(const TriangleMesh& mesh);

/// FNV-1a over positions and indices; plans carry it to detect edits made
/// after planning.
std::uint64_t mesh_fingerprint(const TriangleMesh& mesh);

struct ReplacementPlan {
  OrientedBoundingBox target_obb;
  std::vector<std::uint32_t> faces_to_remove;  // ascending
  std::uint32_t component_id = 0;
  AffinePlacement placement;  // canonical component frame -> target
  double inflation = kDefaultInflation;
  std::uint64_t mesh_fingerprint = 0;  // 0 disables the check

  bool operator==(const ReplacementPlan&) const = default;
};

/// Selects the region's faces and aligns the canonical component's box to
/// `target`. Throws Error{DegenerateComponent} when a flat component would
/// have to be stretched along its zero extent.
ReplacementPlan plan_replacement(const TriangleMesh& mesh, const OrientedBoundingBox& target,
                                 std::uint32_t component_id, const TriangleMesh& component, ScalingMode mode,
                                 double inflation = kDefaultInflation);

struct FusionReport {
  std::size_t removed_face_count = 0;
  std::size_t added_face_count = 0;
  /// Edges of removed triangles that border exactly one remaining triangle.
  std::size_t open_boundary_edge_count = 0;
  /// Largest distance from a hole-boundary vertex to the surface of the
  /// inserted component's axis-aligned box (0 without a hole boundary).
  double bounding_gap = 0.0;

  bool operator==(const FusionReport&) const = default;
};

struct ReplacementResult {
  TriangleMesh mesh;
  FusionReport report;
};

/// Removes the planned faces, drops vertices only they used, and appends the
/// canonicalized component under plan.placement. Component material slots
/// are shifted past the building's largest slot. Normals and UVs survive
/// only when the building has them (missing component attributes are
/// computed or zero-filled).
///
/// Throws Error{StalePlan} when face ids are out of range or the mesh
/// fingerprint differs; Error{DegenerateComponent} for an empty component.
ReplacementResult apply_replacement(const TriangleMesh& mesh, const ReplacementPlan& plan,
                                    const TriangleMesh& component);

nlohmann::json to_json(const ReplacementPlan& plan);
ReplacementPlan plan_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FusionReport& report);

}  // namespace facet
