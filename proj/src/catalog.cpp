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

#include "facet/catalog.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "facet/replacement.hpp"
#include "parallel.hpp"

namespace facet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "CMPCAT1";
constexpr std::uint32_t kFormatVersion = 1;

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string category_from_name(const std::string& stem) {
  const auto cut = stem.find_first_of("_-");
  if (cut == std::string::npos || cut == 0) return "uncategorized";
  return lowercase(stem.substr(0, cut));
}

TriangleMesh load_canonical(const fs::path& file) {
  const auto bytes = read_file_bytes(file.string());
  return canonicalize_component(flatten_scene(parse_glb(bytes))).mesh;
}

}  // namespace

const ComponentRecord* CatalogManifest::find(std::uint32_t id) const {
  auto it = std::lower_bound(records.begin(), records.end(), id,
                             [](const ComponentRecord& r, std::uint32_t v) { return r.id < v; });
  return it != records.end() && it->id == id ? &*it : nullptr;
}

CategoryRule default_category_rule(const fs::path& dir) {
  CategoryRule rule;
  const fs::path sidecar = dir / "metadata.json";
  if (fs::exists(sidecar)) {
    std::ifstream in(sidecar);
    rule.sidecar = json::parse(in, nullptr, false);
    if (rule.sidecar.is_discarded() || !rule.sidecar.is_object()) {
      fail(ErrorCode::InvalidArgument, "metadata.json in " + dir.string() + " is not a JSON object");
    }
  }
  return rule;
}

CatalogManifest ingest_directory(const fs::path& dir, const CategoryRule& rule,
                                 std::vector<TriangleMesh>* canonical_meshes) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) fail(ErrorCode::DirectoryUnreadable, "not a readable directory: " + dir.string());
  std::vector<std::string> files;
  try {
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      if (lowercase(entry.path().extension().string()) != ".glb") continue;
      files.push_back(fs::relative(entry.path(), dir).generic_string());
    }
  } catch (const fs::filesystem_error& e) {
    fail(ErrorCode::DirectoryUnreadable, e.what());
  }
  std::sort(files.begin(), files.end());

  struct Slot {
    std::optional<TriangleMesh> mesh;
    IngestError error;
  };
  std::vector<Slot> slots(files.size());
  detail::parallel_for(files.size(), [&](std::size_t i) {
    try {
      slots[i].mesh = load_canonical(dir / files[i]);
    } catch (const Error& e) {
      slots[i].error = {files[i], std::string(e.code_name()), e.what()};
    }
  });

  CatalogManifest manifest;
  manifest.source_root = fs::absolute(dir).lexically_normal().generic_string();
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!slots[i].mesh) {
      manifest.ingest_errors.push_back(slots[i].error);
      continue;
    }
    ComponentRecord rec;
    rec.id = static_cast<std::uint32_t>(manifest.records.size());
    rec.file_path = files[i];
    rec.name = fs::path(files[i]).stem().string();
    rec.category = category_from_name(rec.name);
    if (const auto it = rule.sidecar.find(files[i]); it != rule.sidecar.end() && it->is_object()) {
      rec.category = it->value("category", rec.category);
      if (it->contains("tags")) rec.tags = it->at("tags").get<std::vector<std::string>>();
    }
    rec.canonical_obb = fit_obb(slots[i].mesh->positions);
    manifest.records.push_back(std::move(rec));
    if (canonical_meshes) canonical_meshes->push_back(std::move(*slots[i].mesh));
  }
  return manifest;
}

TriangleMesh load_component(const CatalogManifest& manifest, const ComponentRecord& record) {
  return load_canonical(fs::path(manifest.source_root) / record.file_path);
}

IndexBuild build_catalog_index(CatalogManifest& manifest, const RetrievalParams& params,
                               const std::vector<TriangleMesh>* canonical_meshes) {
  if (manifest.records.empty()) fail(ErrorCode::CatalogEmpty, "catalog has no components");
  if (canonical_meshes && canonical_meshes->size() != manifest.records.size()) {
    fail(ErrorCode::InvalidArgument, "mesh list does not match the catalog records");
  }
  std::vector<TriangleMesh> loaded;
  std::vector<std::string> load_warnings;
  if (!canonical_meshes) {
    loaded.resize(manifest.records.size());
    std::vector<std::string> errors(manifest.records.size());
    detail::parallel_for(manifest.records.size(), [&](std::size_t i) {
      try {
        loaded[i] = load_component(manifest, manifest.records[i]);
      } catch (const Error& e) {
        errors[i] = std::string(e.code_name()) + ": " + manifest.records[i].file_path + ": " + e.what();
      }
    });
    for (const auto& e : errors) {
      if (!e.empty()) load_warnings.push_back(e);
    }
    canonical_meshes = &loaded;
  }
  std::vector<IndexSource> sources;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    sources.push_back({manifest.records[i].id, manifest.records[i].category, &(*canonical_meshes)[i]});
  }
  IndexBuild build = build_index(sources, params);
  build.warnings.insert(build.warnings.begin(), load_warnings.begin(), load_warnings.end());
  for (auto& rec : manifest.records) {
    rec.view_count = 0;
    for (const auto& c : build.index.components) {
      if (c.id == rec.id) rec.view_count = c.view_count;
    }
  }
  return build;
}

json to_json(const CatalogManifest& m) {
  json records = json::array();
  for (const auto& r : m.records) {
    records.push_back({{"id", r.id},
                       {"name", r.name},
                       {"category", r.category},
                       {"file_path", r.file_path},
                       {"canonical_obb", to_json(r.canonical_obb)},
                       {"tags", r.tags},
                       {"view_count", r.view_count}});
  }
  json errors = json::array();
  for (const auto& e : m.ingest_errors) errors.push_back({{"path", e.path}, {"code", e.code}, {"message", e.message}});
  return {{"version", m.version}, {"source_root", m.source_root}, {"records", records}, {"ingest_errors", errors}};
}

CatalogManifest manifest_from_json(const json& j) {
  CatalogManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.source_root = j.at("source_root").get<std::string>();
    for (const auto& r : j.at("records")) {
      ComponentRecord rec;
      rec.id = r.at("id").get<std::uint32_t>();
      rec.name = r.at("name").get<std::string>();
      rec.category = r.at("category").get<std::string>();
      rec.file_path = r.at("file_path").get<std::string>();
      rec.canonical_obb = obb_from_json(r.at("canonical_obb"));
      rec.tags = r.at("tags").get<std::vector<std::string>>();
      rec.view_count = r.value("view_count", 0u);
      m.records.push_back(std::move(rec));
    }
    for (const auto& e : j.at("ingest_errors")) {
      m.ingest_errors.push_back(
          {e.at("path").get<std::string>(), e.at("code").get<std::string>(), e.value("message", std::string{})});
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::UnsupportedFormat, std::string("catalog manifest: ") + e.what());
  }
  std::sort(m.records.begin(), m.records.end(),
            [](const ComponentRecord& a, const ComponentRecord& b) { return a.id < b.id; });
  return m;
}

void save_catalog(const CatalogManifest& manifest, const RetrievalIndex& index, const fs::path& path) {
  const std::string text = to_json(manifest).dump();
  const auto index_bytes = serialize_index(index);
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  auto put = [&out](const auto value) {
    std::uint8_t raw[sizeof value];
    std::memcpy(raw, &value, sizeof value);
    out.insert(out.end(), raw, raw + sizeof value);
  };
  put(kFormatVersion);
  put(static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  put(static_cast<std::uint64_t>(index_bytes.size()));
  out.insert(out.end(), index_bytes.begin(), index_bytes.end());
  write_file_bytes(path.string(), out);
}

LoadedCatalog load_catalog(const fs::path& path) {
  static_assert(std::endian::native == std::endian::little, "catalog I/O assumes a little-endian host");
  const auto bytes = read_file_bytes(path.string());
  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::UnsupportedFormat, path.string() + " is not a component catalog (bad magic)");
  }
  std::size_t pos = kMagic.size();
  auto get = [&]<typename T>(T) {
    if (bytes.size() - pos < sizeof(T)) fail(ErrorCode::UnsupportedFormat, "catalog archive is truncated");
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
  };
  const auto version = get(std::uint32_t{});
  if (version != kFormatVersion) {
    fail(ErrorCode::UnsupportedVersion, "catalog format version " + std::to_string(version) + " is not supported");
  }
  const auto manifest_len = get(std::uint32_t{});
  if (bytes.size() - pos < manifest_len) fail(ErrorCode::UnsupportedFormat, "catalog archive is truncated");
  const json j = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                             bytes.begin() + static_cast<std::ptrdiff_t>(pos + manifest_len), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::UnsupportedFormat, "catalog manifest is not JSON");
  pos += manifest_len;
  const auto index_len = get(std::uint64_t{});
  if (bytes.size() - pos != index_len) fail(ErrorCode::UnsupportedFormat, "catalog index length mismatch");

  LoadedCatalog out;
  out.manifest = manifest_from_json(j);
  if (out.manifest.version != 1) {
    fail(ErrorCode::UnsupportedVersion, "manifest version " + std::to_string(out.manifest.version));
  }
  out.index = deserialize_index(std::span(bytes).subspan(pos));
  for (const auto& rec : out.manifest.records) {
    const fs::path file = fs::path(out.manifest.source_root) / rec.file_path;
    if (!fs::exists(file)) out.warnings.push_back("DanglingReference: " + file.generic_string());
  }
  return out;
}

}  // namespace facet
