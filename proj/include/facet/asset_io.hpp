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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facet/mesh.hpp"

namespace facet {

inline constexpr std::uint32_t kGlbMagic = 0x46546C67;  // "glTF"
inline constexpr std::uint32_t kGlbVersion = 2;
inline constexpr std::uint32_t kChunkJson = 0x4E4F534A;  // "JSON"
inline constexpr std::uint32_t kChunkBin = 0x004E4942;   // "BIN\0"

struct SceneNode {
  std::string name;
  Mat4 transform = Mat4::Identity();
  std::optional<std::size_t> mesh;
  std::vector<std::size_t> children;

  bool operator==(const SceneNode&) const = default;
};

struct NamedMesh {
  std::string name;
  TriangleMesh mesh;

  bool operator==(const NamedMesh&) const = default;
};

/// Non-geometry payload carried through untouched: a JSON description plus
/// the raw bytes of its buffer view, if any (embedded images).
struct OpaqueBlob {
  nlohmann::json meta;
  std::vector<std::uint8_t> bytes;

  bool operator==(const OpaqueBlob&) const = default;
};

/// In-memory scene model. `roots` are the top-level nodes of the default
/// scene. Opaque blobs are keyed "<array>/<index>" (e.g. "images/0") for
/// array entries, or "<array>" for whole JSON arrays such as "materials".
struct SceneAsset {
  std::vector<NamedMesh> meshes;
  std::vector<SceneNode> nodes;
  std::vector<std::size_t> roots;
  std::map<std::string, OpaqueBlob> opaque_blobs;

  bool operator==(const SceneAsset&) const = default;
};

/// Parses a binary glTF 2.0 container. Throws Error{MalformedContainer} for
/// framing or reference errors and Error{UnsupportedFeature} for compressed,
/// sparse, or non-triangle content.
SceneAsset parse_glb(std::span<const std::uint8_t> bytes);

/// Serializes a scene. Throws Error{SerializationOverflow} when a chunk would
/// not fit the 32-bit length fields.
std::vector<std::uint8_t> write_glb(const SceneAsset& scene);

/// One mesh with every node transform applied. Meshes referenced by several
/// nodes are duplicated per instance. A scene with meshes but no nodes is
/// treated as one identity instance per mesh.
TriangleMesh flatten_scene(const SceneAsset& scene);

/// Wraps a single mesh in a one-node scene.
SceneAsset make_scene(const TriangleMesh& mesh, const std::string& name = "mesh");

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

// -- validation -------------------------------------------------------------

enum class IssueCode {
  IndexOutOfRange,
  NonFiniteCoordinate,
  NonUnitNormal,
  NormalCountMismatch,
  UvCountMismatch,
  MaterialSlotCountMismatch,
  DegenerateTriangle,
  UnreferencedVertex,
};

std::string_view issue_code_name(IssueCode code) noexcept;

struct Issue {
  IssueCode code;
  /// Element index the issue refers to (vertex or triangle, depending on code).
  std::size_t location;

  auto operator<=>(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;

  bool ok() const noexcept { return errors.empty(); }
};

/// Checks every TriangleMesh invariant. Errors are sorted by (code, location).
/// Degenerate triangles and unreferenced vertices are reported as warnings.
ValidationReport validate_mesh(const TriangleMesh& mesh);

nlohmann::json to_json(const ValidationReport& report);

}  // namespace facet
