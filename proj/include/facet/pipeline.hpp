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

#include "facet/asset_io.hpp"
#include "facet/catalog.hpp"
#include "facet/obb.hpp"
#include "facet/replacement.hpp"
#include "facet/retrieval.hpp"
#include "facet/segmentation.hpp"

namespace facet {

/// One detected component: mask label, fitted box and cloud size.
struct DetectedComponent {
  std::string label;
  OrientedBoundingBox obb;
  std::size_t point_count = 0;
};

struct SegmentationOutcome {
  std::vector<DetectedComponent> components;
  std::vector<std::string> errors;  // per-mask failures, e.g. "NoDepthInMask: window #1"
};

/// Renders the mesh from `camera`, asks the provider for masks and fits one
/// box per mask. Masks whose size differs from the camera are reported.
SegmentationOutcome segment_components(const TriangleMesh& mesh, const Camera& camera, const std::string& prompt,
                                       const MaskProviderConfig& provider, DepthBand band = {});

/// A mask directory is a file_map provider: masks.json inside it maps
/// prompts to image files relative to the directory.
MaskProviderConfig mask_directory_provider(const std::filesystem::path& dir);

struct PipelineInputs {
  std::filesystem::path model;     // building GLB
  std::filesystem::path masks;     // mask directory (masks.json)
  std::filesystem::path sketch;    // sketch raster
  std::filesystem::path catalog;   // CMPCAT1 archive
  std::filesystem::path output;    // GLB to write
  std::optional<std::filesystem::path> camera;  // camera JSON; default front camera otherwise
  int image_size = 512;            // default camera resolution
  std::string prompt = "window";
  std::size_t target = 0;          // which detected component to replace
  ScalingMode mode = ScalingMode::PerAxis;
  double inflation = kDefaultInflation;
  DepthBand band;
  std::optional<std::string> category;  // retrieval filter
};

struct PipelineResult {
  std::vector<DetectedComponent> detected;
  std::vector<QueryHit> candidates;
  ReplacementPlan plan;
  FusionReport report;
  ValidationReport validation;
  std::vector<std::string> warnings;
};

/// Model -> masks -> box -> sketch query -> replacement -> output GLB. The
/// top-ranked candidate replaces the `target`-th detected component.
PipelineResult run_pipeline(const PipelineInputs& inputs);

nlohmann::json to_json(const PipelineResult& result);

struct CategoryMetrics {
  std::size_t queries = 0;
  double top1 = 0.0;
  double top5 = 0.0;
  double top5_under_dropout = 0.0;
};

struct SelfRetrievalReport {
  CategoryMetrics overall;
  std::map<std::string, CategoryMetrics> per_category;
};

/// Queries the index with every component's own front line art, once intact
/// and once with round(dropout * ink) stroke pixels removed at random.
/// `canonical_meshes`, when given, is parallel to the manifest records.
/// Throws Error{CatalogEmpty}.
SelfRetrievalReport run_eval_self_retrieval(const CatalogManifest& manifest, const RetrievalIndex& index,
                                            std::uint64_t seed, double dropout,
                                            const std::vector<TriangleMesh>* canonical_meshes = nullptr);

/// Removes exactly round(fraction * ink) ink pixels chosen with `seed`.
SketchImage drop_strokes(const SketchImage& sketch, double fraction, std::uint64_t seed);

nlohmann::json to_json(const SelfRetrievalReport& report);

}  // namespace facet
