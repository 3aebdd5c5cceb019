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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "facet/mesh.hpp"
#include "facet/obb.hpp"
#include "facet/retrieval.hpp"

namespace facet {

struct ComponentRecord {
  std::uint32_t id = 0;
  std::string name;
  std::string category;
  std::string file_path;  // relative to the manifest's source_root
  OrientedBoundingBox canonical_obb;
  std::vector<std::string> tags;
  std::uint32_t view_count = 0;  // views of this component in the index

  bool operator==(const ComponentRecord&) const = default;
};

struct IngestError {
  std::string path;
  std::string code;
  std::string message;
  bool operator==(const IngestError&) const = default;
};

struct CatalogManifest {
  int version = 1;
  std::string source_root;
  std::vector<ComponentRecord> records;  // sorted by id
  std::vector<IngestError> ingest_errors;

  const ComponentRecord* find(std::uint32_t id) const;
  bool operator==(const CatalogManifest&) const = default;
};

/// Category source. `sidecar` maps relative paths to {"category", "tags"};
/// files it does not cover use the part of the file name before the first
/// '_' or '-' (so "window_arched_03.glb" is a window), or "uncategorized".
struct CategoryRule {
  nlohmann::json sidecar = nlohmann::json::object();
};

/// Reads `metadata.json` from the directory when present.
CategoryRule default_category_rule(const std::filesystem::path& dir);

/// Parses every .glb below `dir` (sorted by relative path), flattens and
/// canonicalizes it. Unreadable files become ingest_errors; the rest get ids
/// 0, 1, 2, ... in path order. When `canonical_meshes` is given it receives
/// the canonical mesh of every record, in record order.
/// Throws Error{DirectoryUnreadable}.
CatalogManifest ingest_directory(const std::filesystem::path& dir, const CategoryRule& rule,
                                 std::vector<TriangleMesh>* canonical_meshes = nullptr);

/// Loads the record's GLB as one canonicalized mesh.
TriangleMesh load_component(const CatalogManifest& manifest, const ComponentRecord& record);

/// Builds the retrieval index over the manifest and fills in view counts.
/// `canonical_meshes`, when given, must be parallel to the records; otherwise
/// meshes are loaded from disk and load failures become warnings.
IndexBuild build_catalog_index(CatalogManifest& manifest, const RetrievalParams& params,
                               const std::vector<TriangleMesh>* canonical_meshes = nullptr);

nlohmann::json to_json(const CatalogManifest& manifest);
CatalogManifest manifest_from_json(const nlohmann::json& j);

/// "CMPCAT1" archive: magic, u32 format version, u32 manifest length,
/// manifest JSON, u64 index length, index bytes. Throws Error{IoFailure}.
void save_catalog(const CatalogManifest& manifest, const RetrievalIndex& index, const std::filesystem::path& path);

struct LoadedCatalog {
  CatalogManifest manifest;
  RetrievalIndex index;
  std::vector<std::string> warnings;  // "DanglingReference: <path>" per missing GLB
};

/// Throws Error{UnsupportedFormat}, Error{UnsupportedVersion}, Error{IoFailure}.
LoadedCatalog load_catalog(const std::filesystem::path& path);

}  // namespace facet
