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

#include "facet/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "facet/error.hpp"
#include "facet/raster.hpp"
#include "parallel.hpp"

namespace facet {

namespace fs = std::filesystem;
using nlohmann::json;

SegmentationOutcome segment_components(const TriangleMesh& mesh, const Camera& camera, const std::string& prompt,
                                       const MaskProviderConfig& provider, DepthBand band) {
  const RasterResult raster = rasterize(mesh, camera);
  const GrayImage view = shade(mesh, raster, camera);
  const auto masks = request_masks(prompt, view, provider);
  SegmentationOutcome out;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const std::string where = masks[i].label + " #" + std::to_string(i);
    try {
      const PointCloud cloud = extract_foreground(masks[i], raster.depth, camera, band);
      out.components.push_back({masks[i].label, fit_obb(cloud), cloud.size()});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoDepthInMask && e.code() != ErrorCode::InvalidArgument) throw;
      out.errors.push_back(std::string(e.code_name()) + ": " + where + ": " + e.what());
    }
  }
  return out;
}

MaskProviderConfig mask_directory_provider(const fs::path& dir) {
  const fs::path mapping = dir / "masks.json";
  if (!fs::exists(mapping)) fail(ErrorCode::ProviderFailure, "mask directory has no masks.json: " + dir.string());
  return mask_provider_from_json({{"kind", "file_map"}, {"mapping_file", "masks.json"}}, dir);
}

PipelineResult run_pipeline(const PipelineInputs& in) {
  PipelineResult result;
  const TriangleMesh building = flatten_scene(parse_glb(read_file_bytes(in.model.string())));
  if (building.empty()) fail(ErrorCode::EmptyMesh, "model has no triangles");

  Camera camera;
  if (in.camera) {
    std::ifstream file(*in.camera);
    const json j = json::parse(file, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::InvalidArgument, "camera file is not JSON: " + in.camera->string());
    camera = camera_from_json(j);
  } else {
    camera = default_front_camera(building, in.image_size, in.image_size);
  }

  auto seg = segment_components(building, camera, in.prompt, mask_directory_provider(in.masks), in.band);
  result.detected = seg.components;
  result.warnings = seg.errors;
  if (in.target >= result.detected.size()) {
    fail(ErrorCode::NotFound, "no detected component #" + std::to_string(in.target) + " for prompt '" + in.prompt +
                                  "' (" + std::to_string(result.detected.size()) + " found)");
  }

  const LoadedCatalog catalog = load_catalog(in.catalog);
  result.warnings.insert(result.warnings.end(), catalog.warnings.begin(), catalog.warnings.end());
  const SketchImage sketch = sketch_from_image(read_image(in.sketch.string()));
  result.candidates = query(sketch, catalog.index, 5, in.category);
  if (result.candidates.empty()) fail(ErrorCode::CatalogEmpty, "no candidate component");
  const ComponentRecord* record = catalog.manifest.find(result.candidates.front().component_id);
  if (!record) fail(ErrorCode::NotFound, "top candidate is missing from the manifest");
  const TriangleMesh component = load_component(catalog.manifest, *record);

  result.plan = plan_replacement(building, result.detected[in.target].obb, record->id, component, in.mode,
                                 in.inflation);
  ReplacementResult applied = apply_replacement(building, result.plan, component);
  result.report = applied.report;
  result.validation = validate_mesh(applied.mesh);
  write_file_bytes(in.output.string(), write_glb(make_scene(applied.mesh, "building")));
  return result;
}

json to_json(const PipelineResult& r) {
  json detected = json::array();
  for (const auto& d : r.detected) {
    detected.push_back({{"label", d.label}, {"obb", to_json(d.obb)}, {"point_count", d.point_count}});
  }
  json candidates = json::array();
  for (const auto& c : r.candidates) candidates.push_back({{"component_id", c.component_id}, {"score", c.score}});
  return {{"detected", detected},   {"candidates", candidates},
          {"plan", to_json(r.plan)}, {"fusion_report", to_json(r.report)},
          {"validation", to_json(r.validation)}, {"warnings", r.warnings}};
}

SketchImage drop_strokes(const SketchImage& sketch, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) fail(ErrorCode::InvalidArgument, "dropout fraction must lie in [0, 1]");
  std::vector<std::size_t> ink;
  for (std::size_t i = 0; i < sketch.bits.size(); ++i) {
    if (sketch.bits[i]) ink.push_back(i);
  }
  const auto drop = static_cast<std::size_t>(std::llround(fraction * ink.size()));
  std::mt19937_64 rng(seed);
  SketchImage out = sketch;
  for (std::size_t i = 0; i < drop; ++i) {
    std::swap(ink[i], ink[i + uniform_index(rng, ink.size() - i)]);
    out.bits[ink[i]] = 0;
  }
  return out;
}

SelfRetrievalReport run_eval_self_retrieval(const CatalogManifest& manifest, const RetrievalIndex& index,
                                            std::uint64_t seed, double dropout,
                                            const std::vector<TriangleMesh>* canonical_meshes) {
  if (manifest.records.empty() || index.components.empty()) fail(ErrorCode::CatalogEmpty, "catalog is empty");
  if (canonical_meshes && canonical_meshes->size() != manifest.records.size()) {
    fail(ErrorCode::InvalidArgument, "mesh list does not match the catalog records");
  }
  struct Outcome {
    bool top1 = false, top5 = false, top5_dropout = false;
  };
  std::vector<Outcome> outcomes(manifest.records.size());
  detail::parallel_for(manifest.records.size(), [&](std::size_t i) {
    const ComponentRecord& rec = manifest.records[i];
    const TriangleMesh mesh = canonical_meshes ? (*canonical_meshes)[i] : load_component(manifest, rec);
    const SketchImage front = render_front_view(mesh, index.params);
    auto contains = [&](const std::vector<QueryHit>& hits) {
      return std::any_of(hits.begin(), hits.end(), [&](const QueryHit& h) { return h.component_id == rec.id; });
    };
    const auto hits = query(front, index, 5);
    outcomes[i].top1 = !hits.empty() && hits.front().component_id == rec.id;
    outcomes[i].top5 = contains(hits);
    if (dropout > 0.0) {
      outcomes[i].top5_dropout = contains(query(drop_strokes(front, dropout, mix_seed(seed, rec.id)), index, 5));
    } else {
      outcomes[i].top5_dropout = outcomes[i].top5;
    }
  });

  SelfRetrievalReport report;
  auto add = [](CategoryMetrics& m, const Outcome& o) {
    ++m.queries;
    m.top1 += o.top1;
    m.top5 += o.top5;
    m.top5_under_dropout += o.top5_dropout;
  };
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    add(report.overall, outcomes[i]);
    add(report.per_category[manifest.records[i].category], outcomes[i]);
  }
  auto finish = [](CategoryMetrics& m) {
    if (m.queries == 0) return;
    m.top1 /= static_cast<double>(m.queries);
    m.top5 /= static_cast<double>(m.queries);
    m.top5_under_dropout /= static_cast<double>(m.queries);
  };
  finish(report.overall);
  for (auto& [_, m] : report.per_category) finish(m);
  return report;
}

json to_json(const SelfRetrievalReport& r) {
  auto metrics = [](const CategoryMetrics& m) {
    return json{{"queries", m.queries}, {"top1", m.top1}, {"top5", m.top5}, {"top5_under_dropout", m.top5_under_dropout}};
  };
  json per = json::object();
  for (const auto& [cat, m] : r.per_category) per[cat] = metrics(m);
  json out = metrics(r.overall);
  out["per_category"] = per;
  return out;
}

}  // namespace facet
