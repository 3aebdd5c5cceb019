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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facet/mesh.hpp"
#include "facet/sketch.hpp"

namespace facet {

/// Visual-word vocabulary: k unit vectors of dimension kFeatureDim, row-major.
struct Codebook {
  int k = 0;
  std::vector<float> centroids;
  std::uint64_t training_seed = 0;

  const float* centroid(int word) const { return centroids.data() + static_cast<std::size_t>(word) * kFeatureDim; }
  bool operator==(const Codebook&) const = default;
};

struct CodebookBuild {
  Codebook codebook;
  std::vector<std::string> warnings;
};

/// Spherical k-means: features are assigned to the centroid with the largest
/// dot product (ties to the lowest word id) and each centroid is the
/// normalized mean of its members. Seeding is k-means++ on squared Euclidean
/// distance; at most 50 iterations, stopping once no centroid moves by more
/// than 1e-6. When there are fewer distinct features than k, k shrinks to
/// that count and a "CodebookReduced" warning is returned.
/// Throws Error{NoFeatures}.
CodebookBuild build_codebook(std::span<const LocalFeature> features, int k, std::uint64_t seed);

/// Raw word counts for one view or query.
struct DescriptorHistogram {
  std::vector<float> weights;
  std::uint32_t component_id = 0;
  std::uint32_t view_id = 0;
  bool empty_descriptor = false;  // no input features
};

/// Nearest word per feature (largest dot product, ties to the lowest id).
DescriptorHistogram quantize(std::span<const LocalFeature> features, const Codebook& codebook);

/// Everything that shapes an index. Persisted with it.
struct RetrievalParams {
  int views_per_component = 5;
  double yaw_span_deg = 30.0;  // views spread evenly over [-span, +span]
  double elevation_deg = 10.0;
  double distance_factor = 2.5;
  int image_size = 256;
  double depth_threshold_ratio = 0.05;  // silhouette threshold, fraction of bounding radius
  double normal_threshold_deg = 30.0;
  int samples = 500;
  int codebook_k = 256;
  std::uint64_t seed = 42;
  std::size_t training_cap = 25000;  // features used to train the codebook

  bool operator==(const RetrievalParams&) const = default;
};

nlohmann::json to_json(const RetrievalParams& params);
RetrievalParams retrieval_params_from_json(const nlohmann::json& j);

/// Yaw angles of the view rig: n values evenly spaced over [-span, span]
/// (just 0 for n = 1).
std::vector<double> view_yaws(const RetrievalParams& params);

/// Line art of one rig view of a component.
SketchImage render_component_view(const TriangleMesh& mesh, double yaw_deg, const RetrievalParams& params);

/// The view the self-retrieval evaluation uses as a query: yaw 0 of the rig.
SketchImage render_front_view(const TriangleMesh& mesh, const RetrievalParams& params);

struct Posting {
  std::uint32_t component_id = 0;
  std::uint32_t view_id = 0;
  float weight = 0.0f;
  bool operator==(const Posting&) const = default;
};

struct IndexedComponent {
  std::uint32_t id = 0;
  std::string category;
  std::uint32_t view_count = 0;
  bool operator==(const IndexedComponent&) const = default;
};

/// Inverted index over tf-idf weighted, L2-normalized view histograms.
/// Postings per word are sorted by (component_id, view_id).
struct RetrievalIndex {
  RetrievalParams params;
  Codebook codebook;
  std::vector<float> idf;
  std::vector<std::vector<Posting>> postings;
  std::vector<IndexedComponent> components;  // sorted by id

  std::size_t view_count() const;
  bool operator==(const RetrievalIndex&) const = default;
};

struct IndexSource {
  std::uint32_t component_id = 0;
  std::string category;
  const TriangleMesh* mesh = nullptr;
};

struct IndexBuild {
  RetrievalIndex index;
  std::vector<std::string> warnings;
};

/// Renders the view rig for every source, trains the codebook on (at most
/// params.training_cap of) the pooled features, and indexes every view with
/// idf = max(0, ln(N_views / (1 + df))). Sources without triangles are
/// skipped with a warning. Deterministic for fixed inputs and params.
/// Throws Error{CatalogEmpty}, Error{NoFeatures}.
IndexBuild build_index(std::span<const IndexSource> sources, const RetrievalParams& params);

struct QueryHit {
  std::uint32_t component_id = 0;
  double score = 0.0;
  bool operator==(const QueryHit&) const = default;
};

/// Cosine similarity between the query's tf-idf vector and every view; a
/// component scores the maximum over its views. Sorted by score descending,
/// then id ascending; at most top_k hits. When `category` is set only
/// components of that category are ranked.
/// Throws Error{EmptyQuery} for a sketch without features.
std::vector<QueryHit> query(const SketchImage& sketch, const RetrievalIndex& index, int top_k,
                            const std::optional<std::string>& category = std::nullopt);

/// Same ranking from precomputed query features.
std::vector<QueryHit> query_features(std::span<const LocalFeature> features, const RetrievalIndex& index,
                                     int top_k, const std::optional<std::string>& category = std::nullopt);

/// Seed used to sample query keypoints.
std::uint64_t query_seed(const RetrievalParams& params);

/// "SKRIDX1" container: magic, u32 header length, JSON header, then
/// little-endian float32 centroids and idf, then postings as
/// (u32 count, count x (u32 component, u32 view, f32 weight)) per word.
std::vector<std::uint8_t> serialize_index(const RetrievalIndex& index);
/// Throws Error{UnsupportedFormat}, Error{UnsupportedVersion}.
RetrievalIndex deserialize_index(std::span<const std::uint8_t> bytes);

void save_index(const RetrievalIndex& index, const std::string& path);
RetrievalIndex load_index(const std::string& path);

}  // namespace facet
