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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "facet/catalog.hpp"
#include "facet/error.hpp"
#include "facet/pipeline.hpp"
#include "facet/segmentation.hpp"

namespace facet {

/// Turns a facade photograph into a GLB building model.
///  - external_command: invoked as `<command> --image PATH --out OUT.glb`.
///  - http_endpoint: multipart POST of "image" to `url`; the body of a 200
///    answer is the GLB.
struct GeneratorProviderConfig {
  enum class Kind { ExternalCommand, HttpEndpoint };
  Kind kind = Kind::ExternalCommand;
  std::string command;
  std::string url;
  double timeout_s = 300.0;
};

GeneratorProviderConfig generator_provider_from_json(const nlohmann::json& j);

/// Throws Error{ProviderFailure} with the provider's diagnostics.
std::vector<std::uint8_t> generate_model(std::span<const std::uint8_t> image_bytes,
                                         const GeneratorProviderConfig& config);

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path catalog_path;  // empty: retrieval endpoints answer CatalogEmpty
  std::optional<MaskProviderConfig> mask_provider;
  std::optional<GeneratorProviderConfig> generator_provider;
  std::size_t max_sessions = 64;
  std::size_t history_depth = 20;
  int render_size = 512;
  std::filesystem::path snapshot_dir;  // empty: no snapshots on shutdown
  /// Lets request bodies name a file_map mask provider. Off by default since
  /// it exposes local paths to clients.
  bool allow_request_providers = false;
};

/// Reads the JSON config file (when given) and then applies FACET_HOST,
/// FACET_PORT, FACET_CATALOG, FACET_MAX_SESSIONS, FACET_HISTORY_DEPTH,
/// FACET_RENDER_SIZE, FACET_SNAPSHOT_DIR, FACET_MASK_PROVIDER and
/// FACET_GENERATOR_PROVIDER (the last two hold JSON objects).
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file);

struct ModelSummary {
  std::size_t vertex_count = 0;
  std::size_t face_count = 0;
  Aabb bounds;
  std::size_t history_size = 0;
};

nlohmann::json to_json(const ModelSummary& summary);

struct RenderedView {
  GrayImage image;
  Camera camera;
};

struct Candidate {
  std::uint32_t component_id = 0;
  double score = 0.0;
  std::string name;
  std::string category;
  std::vector<std::string> tags;
  std::string thumbnail_png_base64;
};

struct Preview {
  ReplacementPlan plan;
  FusionReport report;
};

/// Editing sessions over one shared, read-only component catalog.
///
/// Each session owns its building mesh and detected components, plus an
/// undo stack bounded by `history_depth`. Sessions are guarded individually.
/// Reads share the lock while edits take it exclusively, so work on
/// different sessions never blocks.
class PipelineService {
 public:
  explicit PipelineService(ServiceConfig config);
  ~PipelineService();
  PipelineService(const PipelineService&) = delete;
  PipelineService& operator=(const PipelineService&) = delete;

  const ServiceConfig& config() const { return config_; }

  /// Throws Error{CapacityExceeded}.
  std::string create_session();
  /// Throws Error{NotFound}.
  void delete_session(const std::string& id);
  std::size_t session_count() const;

  /// Replaces the session's model and clears its history and detections.
  /// A malformed GLB leaves the session untouched.
  ModelSummary upload_model(const std::string& id, std::span<const std::uint8_t> glb);
  /// Runs the generator provider (the configured one unless overridden).
  ModelSummary upload_image(const std::string& id, std::span<const std::uint8_t> image,
                            const std::optional<GeneratorProviderConfig>& provider = std::nullopt);

  /// Shaded view from an orbit camera around the model; yaw 0 and
  /// elevation 0 give the session's front camera.
  RenderedView render(const std::string& id, double yaw_deg, double elevation_deg) const;

  /// Segments the front view and fits a box per mask. The detections are
  /// stored on the session and addressed by index in preview().
  SegmentationOutcome segment(const std::string& id, const std::string& prompt,
                              const std::optional<MaskProviderConfig>& provider = std::nullopt);

  /// Throws Error{CatalogEmpty} without a catalog, Error{EmptyQuery}.
  std::vector<Candidate> retrieve(const std::string& id, std::span<const std::uint8_t> sketch_image, int top_k,
                                  const std::optional<std::string>& category = std::nullopt);

  /// Plans and simulates a replacement without changing the session.
  Preview preview(const std::string& id, std::size_t target, std::uint32_t component_id, ScalingMode mode) const;
  /// Applies a plan from preview(). Throws Error{StalePlan} when the model
  /// changed since it was made.
  FusionReport commit(const std::string& id, const ReplacementPlan& plan);
  /// Throws Error{NothingToUndo}.
  ModelSummary undo(const std::string& id);
  /// Throws Error{PreconditionFailed} before a model is uploaded.
  std::vector<std::uint8_t> export_glb(const std::string& id) const;

  nlohmann::json session_info(const std::string& id) const;

  /// Writes every session's current model to snapshot_dir/<id>.glb and
  /// returns how many were written.
  std::size_t write_snapshots() const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<const TriangleMesh> component_mesh(std::uint32_t id) const;
  std::string thumbnail(std::uint32_t id) const;

  ServiceConfig config_;
  std::optional<LoadedCatalog> catalog_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::uint32_t, std::shared_ptr<const TriangleMesh>> component_cache_;
  mutable std::map<std::uint32_t, std::string> thumbnail_cache_;
};

/// Error code name -> HTTP status.
int http_status_for(ErrorCode code);

/// Blocks serving the REST interface until stop_http_server() or a signal.
/// Writes session snapshots on the way out. `on_ready` receives the bound
/// port (useful with port 0) before requests are accepted.
void serve_http(PipelineService& service, const std::function<void(int)>& on_ready = {});
void stop_http_server();

}  // namespace facet
