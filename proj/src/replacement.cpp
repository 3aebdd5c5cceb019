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

#include "facet/replacement.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <map>

#include "facet/error.hpp"

namespace facet {

std::vector<std::uint32_t> select_faces_in_region(const TriangleMesh& mesh, const OrientedBoundingBox& obb,
                                                  double inflation) {
  if (!(inflation >= 0.0)) fail(ErrorCode::InvalidArgument, "inflation must be non-negative");
  std::vector<std::uint8_t> inside(mesh.vertex_count());
  for (std::size_t i = 0; i < inside.size(); ++i) inside[i] = obb_contains(obb, mesh.positions[i], inflation);
  std::vector<std::uint32_t> out;
  for (std::uint32_t f = 0; f < mesh.face_count(); ++f) {
    const auto& t = mesh.indices[f];
    bool all = true;
    for (std::uint32_t v : t) all = all && v < inside.size() && inside[v];
    if (all) out.push_back(f);
  }
  return out;
}

CanonicalComponent canonicalize_component(const TriangleMesh& mesh) {
  if (mesh.positions.empty() || mesh.empty()) fail(ErrorCode::EmptyMesh, "component has no geometry");
  const OrientedBoundingBox box = fit_obb(mesh.positions);

  // Row j of the rotation is the box axis assigned to world axis j.
  Mat3 rot = Mat3::Zero();
  bool used[3] = {false, false, false};
  for (int j : {1, 2, 0}) {
    int best = -1;
    for (int i = 0; i < 3; ++i) {
      if (!used[i] && (best < 0 || std::abs(box.axes(j, i)) > std::abs(box.axes(j, best)))) best = i;
    }
    used[best] = true;
    const Vec3 a = box.axis(best);
    rot.row(j) = (a[j] < 0.0 ? -a : a).transpose();
  }
  if (rot.determinant() < 0.0) rot.row(0) *= -1.0;

  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rot;
  m.topRightCorner<3, 1>() = -rot * box.center;

  CanonicalComponent out;
  out.mesh = transformed(mesh, m);
  out.obb = fit_obb(out.mesh.positions);
  out.from_source = m;
  return out;
}

std::uint64_t mesh_fingerprint(const TriangleMesh& mesh) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ull;
    }
  };
  const std::uint64_t counts[2] = {mesh.positions.size(), mesh.indices.size()};
  feed(counts, sizeof counts);
  for (const Vec3& p : mesh.positions) feed(p.data(), 3 * sizeof(double));
  for (const Triangle& t : mesh.indices) feed(t.data(), sizeof t);
  return h;
}

ReplacementPlan plan_replacement(const TriangleMesh& mesh, const OrientedBoundingBox& target,
                                 std::uint32_t component_id, const TriangleMesh& component, ScalingMode mode,
                                 double inflation) {
  ReplacementPlan plan;
  plan.target_obb = target;
  plan.faces_to_remove = select_faces_in_region(mesh, target, inflation);
  plan.component_id = component_id;
  plan.inflation = inflation;
  plan.mesh_fingerprint = mesh_fingerprint(mesh);
  CanonicalComponent canon;
  try {
    canon = canonicalize_component(component);
  } catch (const Error& e) {
    fail(ErrorCode::DegenerateComponent, std::string("component ") + std::to_string(component_id) + ": " + e.what());
  }
  try {
    plan.placement = compute_alignment(canon.obb, target, mode);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateSource) throw;
    fail(ErrorCode::DegenerateComponent, std::string("component ") + std::to_string(component_id) + ": " + e.what());
  }
  return plan;
}

namespace {

// Distance from p to the boundary surface of an axis-aligned box.
double distance_to_box_surface(const Aabb& box, const Vec3& p) {
  const Vec3 below = (box.min - p).cwiseMax(0.0);
  const Vec3 above = (p - box.max).cwiseMax(0.0);
  const double outside = (below + above).norm();
  if (outside > 0.0) return outside;
  const Vec3 to_min = p - box.min;
  const Vec3 to_max = box.max - p;
  return std::min(to_min.minCoeff(), to_max.minCoeff());
}

}  // namespace

ReplacementResult apply_replacement(const TriangleMesh& mesh, const ReplacementPlan& plan,
                                    const TriangleMesh& component) {
  const std::size_t nf = mesh.face_count();
  std::vector<std::uint8_t> removed(nf, 0);
  for (std::uint32_t f : plan.faces_to_remove) {
    if (f >= nf) {
      fail(ErrorCode::StalePlan, "plan removes face " + std::to_string(f) + " but the mesh has " +
                                     std::to_string(nf) + " faces");
    }
    removed[f] = 1;
  }
  if (plan.mesh_fingerprint != 0 && plan.mesh_fingerprint != mesh_fingerprint(mesh)) {
    fail(ErrorCode::StalePlan, "mesh changed since the plan was made");
  }
  CanonicalComponent canon;
  try {
    canon = canonicalize_component(component);
  } catch (const Error& e) {
    fail(ErrorCode::DegenerateComponent, e.what());
  }

  ReplacementResult result;
  FusionReport& report = result.report;
  TriangleMesh& out = result.mesh;

  // Boundary edges: edges of removed faces used by exactly one kept face.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> kept_use;
  auto key = [](std::uint32_t a, std::uint32_t b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
  for (std::size_t f = 0; f < nf; ++f) {
    if (!removed[f]) continue;
    const auto& t = mesh.indices[f];
    for (int e = 0; e < 3; ++e) kept_use.emplace(key(t[e], t[(e + 1) % 3]), 0);
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (removed[f]) continue;
    const auto& t = mesh.indices[f];
    for (int e = 0; e < 3; ++e) {
      auto it = kept_use.find(key(t[e], t[(e + 1) % 3]));
      if (it != kept_use.end()) ++it->second;
    }
  }
  std::vector<std::uint32_t> boundary_vertices;
  for (const auto& [edge, uses] : kept_use) {
    if (uses != 1) continue;
    ++report.open_boundary_edge_count;
    boundary_vertices.push_back(edge.first);
    boundary_vertices.push_back(edge.second);
  }
  std::sort(boundary_vertices.begin(), boundary_vertices.end());
  boundary_vertices.erase(std::unique(boundary_vertices.begin(), boundary_vertices.end()), boundary_vertices.end());

  // Compaction: drop vertices referenced only by removed faces.
  const std::size_t nv = mesh.vertex_count();
  std::vector<std::uint8_t> used_kept(nv, 0), used_removed(nv, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::uint32_t v : mesh.indices[f]) (removed[f] ? used_removed : used_kept)[v] = 1;
  }
  constexpr std::uint32_t kDropped = ~std::uint32_t{0};
  std::vector<std::uint32_t> remap(nv, kDropped);
  const bool keep_normals = mesh.has_normals();
  const bool keep_uvs = mesh.has_uvs();
  for (std::size_t v = 0; v < nv; ++v) {
    if (used_removed[v] && !used_kept[v]) continue;
    remap[v] = static_cast<std::uint32_t>(out.positions.size());
    out.positions.push_back(mesh.positions[v]);
    if (keep_normals) out.normals.push_back(mesh.normals[v]);
    if (keep_uvs) out.uvs.push_back(mesh.uvs[v]);
  }
  std::uint32_t slot_offset = 0;
  for (std::size_t f = 0; f < nf; ++f) {
    if (mesh.has_material_slots()) slot_offset = std::max(slot_offset, mesh.material_slot[f] + 1);
    if (removed[f]) {
      ++report.removed_face_count;
      continue;
    }
    const auto& t = mesh.indices[f];
    out.indices.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
    out.material_slot.push_back(mesh.has_material_slots() ? mesh.material_slot[f] : 0);
  }
  if (!mesh.has_material_slots()) slot_offset = 1;

  // Placed component.
  TriangleMesh part = canon.mesh;
  if (keep_normals && !part.has_normals()) part.normals = compute_vertex_normals(part);
  if (!keep_normals) part.normals.clear();
  if (keep_uvs && !part.has_uvs()) part.uvs.assign(part.positions.size(), Vec2::Zero());
  if (!keep_uvs) part.uvs.clear();
  if (part.has_material_slots()) {
    for (auto& s : part.material_slot) s += slot_offset;
  } else {
    part.material_slot.assign(part.face_count(), slot_offset);
  }
  part = transformed(part, plan.placement.matrix());

  Aabb placed;
  for (const Vec3& p : part.positions) placed.extend(p);
  for (std::uint32_t v : boundary_vertices) {
    report.bounding_gap = std::max(report.bounding_gap, distance_to_box_surface(placed, mesh.positions[v]));
  }
  report.added_face_count = part.face_count();
  append_mesh(out, part);
  return result;
}

nlohmann::json to_json(const ReplacementPlan& plan) {
  char fp[17];
  std::snprintf(fp, sizeof fp, "%016" PRIx64, plan.mesh_fingerprint);
  return {{"target_obb", to_json(plan.target_obb)},
          {"faces_to_remove", plan.faces_to_remove},
          {"component_id", plan.component_id},
          {"placement", to_json(plan.placement)},
          {"inflation", plan.inflation},
          {"mesh_fingerprint", fp}};
}

ReplacementPlan plan_from_json(const nlohmann::json& j) {
  ReplacementPlan plan;
  try {
    plan.target_obb = obb_from_json(j.at("target_obb"));
    plan.faces_to_remove = j.at("faces_to_remove").get<std::vector<std::uint32_t>>();
    std::sort(plan.faces_to_remove.begin(), plan.faces_to_remove.end());
    plan.faces_to_remove.erase(std::unique(plan.faces_to_remove.begin(), plan.faces_to_remove.end()),
                               plan.faces_to_remove.end());
    plan.component_id = j.at("component_id").get<std::uint32_t>();
    plan.placement = placement_from_json(j.at("placement"));
    plan.inflation = j.value("inflation", kDefaultInflation);
    const std::string fp = j.value("mesh_fingerprint", std::string("0"));
    plan.mesh_fingerprint = std::strtoull(fp.c_str(), nullptr, 16);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("malformed plan: ") + e.what());
  }
  return plan;
}

nlohmann::json to_json(const FusionReport& r) {
  return {{"removed_face_count", r.removed_face_count},
          {"added_face_count", r.added_face_count},
          {"open_boundary_edge_count", r.open_boundary_edge_count},
          {"bounding_gap", r.bounding_gap}};
}

}  // namespace facet
