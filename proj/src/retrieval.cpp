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

#include "facet/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "facet/camera.hpp"
#include "facet/error.hpp"
#include "facet/simd.hpp"
#include "parallel.hpp"

namespace facet {
namespace {

constexpr int kMaxIterations = 50;
constexpr double kTolerance = 1e-6;

// argmax_w dot(f, centroid_w); the strict comparison keeps the lowest id on ties.
int nearest_word(const float* feature, const Codebook& cb, std::vector<float>& scratch) {
  scratch.resize(static_cast<std::size_t>(cb.k));
  simd::active().dot_rows(feature, cb.centroids.data(), static_cast<std::size_t>(cb.k), kFeatureDim, scratch.data());
  int best = 0;
  for (int w = 1; w < cb.k; ++w) {
    if (scratch[w] > scratch[best]) best = w;
  }
  return best;
}

double squared_distance(const float* a, const float* b) {
  double s = 0.0;
  for (int d = 0; d < kFeatureDim; ++d) {
    const double diff = static_cast<double>(a[d]) - b[d];
    s += diff * diff;
  }
  return s;
}

std::size_t count_distinct(std::span<const LocalFeature> features) {
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return features[a].vector < features[b].vector; });
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i == 0 || features[order[i]].vector != features[order[i - 1]].vector) ++distinct;
  }
  return distinct;
}

}  // namespace

CodebookBuild build_codebook(std::span<const LocalFeature> features, int k, std::uint64_t seed) {
  if (features.empty()) fail(ErrorCode::NoFeatures, "cannot train a codebook without features");
  if (k <= 0) fail(ErrorCode::InvalidArgument, "codebook size must be positive");

  CodebookBuild out;
  const std::size_t distinct = count_distinct(features);
  if (distinct < static_cast<std::size_t>(k)) {
    out.warnings.push_back("CodebookReduced: " + std::to_string(distinct) + " distinct features, k lowered from " +
                           std::to_string(k) + " to " + std::to_string(distinct));
    k = static_cast<int>(distinct);
  }
  const std::size_t n = features.size();
  Codebook& cb = out.codebook;
  cb.k = k;
  cb.training_seed = seed;
  cb.centroids.assign(static_cast<std::size_t>(k) * kFeatureDim, 0.0f);

  // k-means++ seeding. Exact double distances keep duplicates of a chosen
  // seed at weight zero, so seeds are pairwise distinct.
  std::mt19937_64 rng(seed);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = uniform_index(rng, n);
  for (int c = 0; c < k; ++c) {
    std::copy_n(features[pick].vector.data(), kFeatureDim, cb.centroids.data() + static_cast<std::size_t>(c) * kFeatureDim);
    if (c + 1 == k) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(features[i].vector.data(), cb.centroid(c)));
      total += d2[i];
    }
    const double target = uniform_unit(rng) * total;
    double run = 0.0;
    pick = n;
    std::size_t last_positive = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      last_positive = i;
      run += d2[i];
      if (run > target) {
        pick = i;
        break;
      }
    }
    if (pick == n) pick = last_positive;  // rounding at the top end
  }

  // Lloyd iterations on the sphere.
  std::vector<int> assignment(n, -1);
  std::vector<double> sums(static_cast<std::size_t>(k) * kFeatureDim);
  std::vector<float> scratch;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int w = nearest_word(features[i].vector.data(), cb, scratch);
      changed |= w != assignment[i];
      assignment[i] = w;
    }
    if (!changed) break;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double* s = sums.data() + static_cast<std::size_t>(assignment[i]) * kFeatureDim;
      for (int d = 0; d < kFeatureDim; ++d) s[d] += features[i].vector[d];
    }
    double max_shift = 0.0;
    for (int c = 0; c < k; ++c) {
      const double* s = sums.data() + static_cast<std::size_t>(c) * kFeatureDim;
      double norm2 = 0.0;
      for (int d = 0; d < kFeatureDim; ++d) norm2 += s[d] * s[d];
      if (!(norm2 > 0.0)) continue;  // empty cluster keeps its centroid
      const double inv = 1.0 / std::sqrt(norm2);
      float* dst = cb.centroids.data() + static_cast<std::size_t>(c) * kFeatureDim;
      double shift2 = 0.0;
      for (int d = 0; d < kFeatureDim; ++d) {
        const float v = static_cast<float>(s[d] * inv);
        shift2 += (static_cast<double>(v) - dst[d]) * (static_cast<double>(v) - dst[d]);
        dst[d] = v;
      }
      max_shift = std::max(max_shift, std::sqrt(shift2));
    }
    if (max_shift < kTolerance) break;
  }
  return out;
}

DescriptorHistogram quantize(std::span<const LocalFeature> features, const Codebook& codebook) {
  DescriptorHistogram h;
  h.weights.assign(static_cast<std::size_t>(codebook.k), 0.0f);
  h.empty_descriptor = features.empty();
  std::vector<float> scratch;
  for (const auto& f : features) h.weights[nearest_word(f.vector.data(), codebook, scratch)] += 1.0f;
  return h;
}

nlohmann::json to_json(const RetrievalParams& p) {
  return {{"views_per_component", p.views_per_component},
          {"yaw_span_deg", p.yaw_span_deg},
          {"elevation_deg", p.elevation_deg},
          {"distance_factor", p.distance_factor},
          {"image_size", p.image_size},
          {"depth_threshold_ratio", p.depth_threshold_ratio},
          {"normal_threshold_deg", p.normal_threshold_deg},
          {"samples", p.samples},
          {"codebook_k", p.codebook_k},
          {"seed", p.seed},
          {"training_cap", p.training_cap}};
}

RetrievalParams retrieval_params_from_json(const nlohmann::json& j) {
  RetrievalParams p;
  p.views_per_component = j.value("views_per_component", p.views_per_component);
  p.yaw_span_deg = j.value("yaw_span_deg", p.yaw_span_deg);
  p.elevation_deg = j.value("elevation_deg", p.elevation_deg);
  p.distance_factor = j.value("distance_factor", p.distance_factor);
  p.image_size = j.value("image_size", p.image_size);
  p.depth_threshold_ratio = j.value("depth_threshold_ratio", p.depth_threshold_ratio);
  p.normal_threshold_deg = j.value("normal_threshold_deg", p.normal_threshold_deg);
  p.samples = j.value("samples", p.samples);
  p.codebook_k = j.value("codebook_k", p.codebook_k);
  p.seed = j.value("seed", p.seed);
  p.training_cap = j.value("training_cap", p.training_cap);
  if (p.views_per_component < 1 || p.image_size < 64 || p.samples < 1 || p.codebook_k < 1) {
    fail(ErrorCode::InvalidArgument, "retrieval parameters out of range");
  }
  return p;
}

std::vector<double> view_yaws(const RetrievalParams& params) {
  const int n = params.views_per_component;
  if (n < 1) fail(ErrorCode::InvalidArgument, "views_per_component must be positive");
  if (n == 1) return {0.0};
  std::vector<double> yaws(n);
  for (int i = 0; i < n; ++i) yaws[i] = -params.yaw_span_deg + 2.0 * params.yaw_span_deg * i / (n - 1);
  return yaws;
}

SketchImage render_component_view(const TriangleMesh& mesh, double yaw_deg, const RetrievalParams& params) {
  if (mesh.empty()) fail(ErrorCode::EmptyMesh, "component has no triangles");
  const Sphere s = bounding_sphere(mesh);
  const double radius = s.radius > 0.0 ? s.radius : 1.0;
  const Camera cam = orbit_camera(s.center, params.distance_factor * radius, yaw_deg, params.elevation_deg,
                                  params.image_size, params.image_size, kDefaultFovDeg);
  return render_line_art(mesh, cam, params.depth_threshold_ratio * radius, params.normal_threshold_deg);
}

SketchImage render_front_view(const TriangleMesh& mesh, const RetrievalParams& params) {
  return render_component_view(mesh, 0.0, params);
}

std::size_t RetrievalIndex::view_count() const {
  std::size_t n = 0;
  for (const auto& c : components) n += c.view_count;
  return n;
}

std::uint64_t query_seed(const RetrievalParams& params) { return mix_seed(params.seed, 0x51554552ull); }

namespace {

// Independent of the component id: identical parts must get identical
// descriptors whatever ids they are filed under.
std::uint64_t view_seed(const RetrievalParams& params, std::uint32_t view) { return mix_seed(params.seed, view); }

// tf-idf then L2 normalization; returns false for a zero vector.
bool weigh(std::vector<float>& counts, const std::vector<float>& idf, std::vector<double>& out) {
  double total = 0.0;
  for (float c : counts) total += c;
  out.assign(counts.size(), 0.0);
  if (total <= 0.0) return false;
  double norm2 = 0.0;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    out[w] = counts[w] / total * idf[w];
    norm2 += out[w] * out[w];
  }
  if (!(norm2 > 0.0)) return false;
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : out) v *= inv;
  return true;
}

}  // namespace

IndexBuild build_index(std::span<const IndexSource> sources, const RetrievalParams& params) {
  if (sources.empty()) fail(ErrorCode::CatalogEmpty, "no components to index");
  std::vector<IndexSource> sorted(sources.begin(), sources.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const IndexSource& a, const IndexSource& b) { return a.component_id < b.component_id; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].component_id == sorted[i - 1].component_id) {
      fail(ErrorCode::InvalidArgument, "duplicate component id " + std::to_string(sorted[i].component_id));
    }
  }

  IndexBuild out;
  const auto yaws = view_yaws(params);
  const std::size_t n_views = yaws.size();

  // Features per (component, view), rendered in parallel into fixed slots.
  std::vector<std::vector<LocalFeature>> view_features(sorted.size() * n_views);
  std::vector<std::uint8_t> usable(sorted.size(), 0);
  for (std::size_t c = 0; c < sorted.size(); ++c) usable[c] = sorted[c].mesh != nullptr && !sorted[c].mesh->empty();
  detail::parallel_for(sorted.size() * n_views, [&](std::size_t slot) {
    const std::size_t c = slot / n_views;
    const std::size_t v = slot % n_views;
    if (!usable[c]) return;
    const TriangleMesh* mesh = sorted[c].mesh;
    const SketchImage art = render_component_view(*mesh, yaws[v], params);
    view_features[slot] = extract_features(art, params.samples, view_seed(params, static_cast<std::uint32_t>(v)));
  });

  RetrievalIndex& index = out.index;
  index.params = params;
  std::vector<std::size_t> kept;  // positions in `sorted`
  for (std::size_t c = 0; c < sorted.size(); ++c) {
    if (!usable[c]) {
      out.warnings.push_back("EmptyMesh: component " + std::to_string(sorted[c].component_id) + " skipped");
      continue;
    }
    kept.push_back(c);
    index.components.push_back({sorted[c].component_id, sorted[c].category, static_cast<std::uint32_t>(n_views)});
  }
  if (kept.empty()) fail(ErrorCode::CatalogEmpty, "no component has geometry to index");

  // Training pool, subsampled without replacement when above the cap.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> refs;  // (slot, feature)
  for (std::size_t c : kept) {
    for (std::size_t v = 0; v < n_views; ++v) {
      const std::size_t slot = c * n_views + v;
      for (std::uint32_t f = 0; f < view_features[slot].size(); ++f) refs.emplace_back(static_cast<std::uint32_t>(slot), f);
    }
  }
  if (refs.empty()) fail(ErrorCode::NoFeatures, "no component view produced features");
  if (params.training_cap > 0 && refs.size() > params.training_cap) {
    std::mt19937_64 rng(mix_seed(params.seed, 0x545241494eull));
    for (std::size_t i = 0; i < params.training_cap; ++i) std::swap(refs[i], refs[i + uniform_index(rng, refs.size() - i)]);
    refs.resize(params.training_cap);
    std::sort(refs.begin(), refs.end());
  }
  std::vector<LocalFeature> training;
  training.reserve(refs.size());
  for (const auto& [slot, f] : refs) training.push_back(view_features[slot][f]);
  CodebookBuild cb = build_codebook(training, params.codebook_k, params.seed);
  training = {};
  out.warnings.insert(out.warnings.end(), cb.warnings.begin(), cb.warnings.end());
  index.codebook = std::move(cb.codebook);
  const int k = index.codebook.k;

  // Raw histograms, then document frequencies.
  std::vector<std::vector<float>> hist(kept.size() * n_views);
  detail::parallel_for(hist.size(), [&](std::size_t i) {
    const std::size_t slot = kept[i / n_views] * n_views + i % n_views;
    hist[i] = quantize(view_features[slot], index.codebook).weights;
  });
  view_features = {};

  std::vector<std::uint32_t> df(static_cast<std::size_t>(k), 0);
  for (const auto& h : hist) {
    for (int w = 0; w < k; ++w) df[w] += h[w] > 0.0f ? 1 : 0;
  }
  const double total_views = static_cast<double>(hist.size());
  index.idf.resize(static_cast<std::size_t>(k));
  for (int w = 0; w < k; ++w) {
    index.idf[w] = static_cast<float>(std::max(0.0, std::log(total_views / (1.0 + df[w]))));
  }

  index.postings.assign(static_cast<std::size_t>(k), {});
  std::vector<double> weights;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (!weigh(hist[i], index.idf, weights)) continue;
    const auto& comp = index.components[i / n_views];
    const auto view = static_cast<std::uint32_t>(i % n_views);
    for (int w = 0; w < k; ++w) {
      if (weights[w] > 0.0) index.postings[w].push_back({comp.id, view, static_cast<float>(weights[w])});
    }
  }
  return out;
}

std::vector<QueryHit> query(const SketchImage& sketch, const RetrievalIndex& index, int top_k,
                            const std::optional<std::string>& category) {
  const auto features = extract_features(sketch, index.params.samples, query_seed(index.params));
  return query_features(features, index, top_k, category);
}

std::vector<QueryHit> query_features(std::span<const LocalFeature> features, const RetrievalIndex& index,
                                     int top_k, const std::optional<std::string>& category) {
  if (features.empty()) fail(ErrorCode::EmptyQuery, "sketch yields no features");
  if (index.components.empty()) fail(ErrorCode::CatalogEmpty, "index has no components");
  if (top_k <= 0) fail(ErrorCode::InvalidArgument, "top_k must be positive");

  auto counts = quantize(features, index.codebook).weights;
  std::vector<double> q;
  const bool nonzero = weigh(counts, index.idf, q);

  // Accumulate per view slot; slot = offset[component index] + view.
  const auto& comps = index.components;
  std::vector<std::size_t> offset(comps.size() + 1, 0);
  for (std::size_t c = 0; c < comps.size(); ++c) offset[c + 1] = offset[c] + comps[c].view_count;
  std::vector<double> acc(offset.back(), 0.0);
  if (nonzero) {
    for (std::size_t w = 0; w < q.size(); ++w) {
      if (q[w] <= 0.0) continue;
      std::size_t c = 0;
      for (const Posting& p : index.postings[w]) {
        // Postings are sorted by component id, so the cursor only moves forward.
        while (c < comps.size() && comps[c].id < p.component_id) ++c;
        if (c == comps.size() || comps[c].id != p.component_id || p.view_id >= comps[c].view_count) {
          fail(ErrorCode::InvalidArgument, "index posting refers to an unknown view");
        }
        acc[offset[c] + p.view_id] += q[w] * p.weight;
      }
    }
  }

  std::vector<QueryHit> hits;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (category && comps[c].category != *category) continue;
    double best = 0.0;
    for (std::size_t s = offset[c]; s < offset[c + 1]; ++s) best = std::max(best, acc[s]);
    hits.push_back({comps[c].id, std::clamp(best, 0.0, 1.0)});
  }
  std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
    return a.score != b.score ? a.score > b.score : a.component_id < b.component_id;
  });
  if (hits.size() > static_cast<std::size_t>(top_k)) hits.resize(static_cast<std::size_t>(top_k));
  return hits;
}

}  // namespace facet
