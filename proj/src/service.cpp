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

#include "facet/service.hpp"

#include <atomic>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <random>

#include <httplib.h>
#include <unistd.h>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "facet/raster.hpp"
#include "facet/subprocess.hpp"

namespace facet {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Generator provider

GeneratorProviderConfig generator_provider_from_json(const json& j) {
  GeneratorProviderConfig cfg;
  const std::string kind = j.value("kind", std::string{});
  if (kind == "external_command") {
    cfg.kind = GeneratorProviderConfig::Kind::ExternalCommand;
    cfg.command = j.value("command", std::string{});
    if (cfg.command.empty()) fail(ErrorCode::InvalidArgument, "generator provider needs a command");
  } else if (kind == "http_endpoint") {
    cfg.kind = GeneratorProviderConfig::Kind::HttpEndpoint;
    cfg.url = j.value("url", std::string{});
    if (cfg.url.empty()) fail(ErrorCode::InvalidArgument, "generator provider needs a url");
  } else {
    fail(ErrorCode::InvalidArgument, "unknown generator provider kind '" + kind + "'");
  }
  cfg.timeout_s = j.value("timeout_s", cfg.timeout_s);
  return cfg;
}

namespace {

[[noreturn]] void provider_failure(const std::string& what) { fail(ErrorCode::ProviderFailure, what); }

std::vector<std::uint8_t> generate_by_command(std::span<const std::uint8_t> image, const GeneratorProviderConfig& cfg) {
  static std::atomic<unsigned> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("facet-generate-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir);
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};

  const fs::path image_path = dir / "facade.img";
  const fs::path out_path = dir / "model.glb";
  write_file_bytes(image_path.string(), image);
  auto argv = split_command(cfg.command);
  argv.insert(argv.end(), {"--image", image_path.string(), "--out", out_path.string()});
  const ProcessResult r = run_process(argv, cfg.timeout_s);
  if (r.timed_out) provider_failure("generator command timed out; output:\n" + r.output);
  if (r.exit_code != 0) {
    provider_failure("generator command exited with " + std::to_string(r.exit_code) + "; output:\n" + r.output);
  }
  if (!fs::exists(out_path)) provider_failure("generator command wrote no model; output:\n" + r.output);
  return read_file_bytes(out_path.string());
}

std::vector<std::uint8_t> generate_by_http(std::span<const std::uint8_t> image, const GeneratorProviderConfig& cfg) {
  const std::string& url = cfg.url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  const auto secs = static_cast<time_t>(cfg.timeout_s);
  client.set_read_timeout(secs, 0);
  client.set_connection_timeout(secs, 0);
  httplib::MultipartFormDataItems items = {
      {"image", std::string(image.begin(), image.end()), "facade", "application/octet-stream"}};
  auto res = client.Post(path, items);
  if (!res) provider_failure("generator endpoint " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    provider_failure("generator endpoint " + url + " returned HTTP " + std::to_string(res->status) + ": " +
                     res->body.substr(0, 2000));
  }
  return {res->body.begin(), res->body.end()};
}

}  // namespace

std::vector<std::uint8_t> generate_model(std::span<const std::uint8_t> image, const GeneratorProviderConfig& cfg) {
  return cfg.kind == GeneratorProviderConfig::Kind::ExternalCommand ? generate_by_command(image, cfg)
                                                                     : generate_by_http(image, cfg);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

std::size_t parse_count(const std::string& text, const char* what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument(text);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, std::string(what) + " must be a non-negative integer, got '" + text + "'");
  }
}

json parse_json_text(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::InvalidArgument, std::string(what) + " is not a JSON object");
  return j;
}

}  // namespace

ServiceConfig load_service_config(const std::optional<fs::path>& file) {
  ServiceConfig cfg;
  fs::path base;
  json j = json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) fail(ErrorCode::IoFailure, "cannot read config " + file->string());
    j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail(ErrorCode::InvalidArgument, "config is not a JSON object");
    base = fs::absolute(*file).parent_path();
    // A full tool config keeps the service settings under "service".
    if (j.contains("service")) j = j.at("service");
  }
  auto resolve = [&base](const std::string& p) { return fs::path(p).is_relative() && !base.empty() ? base / p : fs::path(p); };
  try {
    cfg.host = j.value("host", cfg.host);
    cfg.port = j.value("port", cfg.port);
    if (j.contains("catalog")) cfg.catalog_path = resolve(j.at("catalog").get<std::string>());
    if (j.contains("mask_provider")) cfg.mask_provider = mask_provider_from_json(j.at("mask_provider"), base);
    if (j.contains("generator_provider")) cfg.generator_provider = generator_provider_from_json(j.at("generator_provider"));
    cfg.max_sessions = j.value("max_sessions", cfg.max_sessions);
    cfg.history_depth = j.value("history_depth", cfg.history_depth);
    cfg.render_size = j.value("render_size", cfg.render_size);
    if (j.contains("snapshot_dir")) cfg.snapshot_dir = resolve(j.at("snapshot_dir").get<std::string>());
    cfg.allow_request_providers = j.value("allow_request_providers", cfg.allow_request_providers);
  } catch (const json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("config: ") + e.what());
  }

  if (auto v = env("FACET_HOST")) cfg.host = *v;
  if (auto v = env("FACET_PORT")) cfg.port = static_cast<int>(parse_count(*v, "FACET_PORT"));
  if (auto v = env("FACET_CATALOG")) cfg.catalog_path = *v;
  if (auto v = env("FACET_MAX_SESSIONS")) cfg.max_sessions = parse_count(*v, "FACET_MAX_SESSIONS");
  if (auto v = env("FACET_HISTORY_DEPTH")) cfg.history_depth = parse_count(*v, "FACET_HISTORY_DEPTH");
  if (auto v = env("FACET_RENDER_SIZE")) cfg.render_size = static_cast<int>(parse_count(*v, "FACET_RENDER_SIZE"));
  if (auto v = env("FACET_SNAPSHOT_DIR")) cfg.snapshot_dir = *v;
  if (auto v = env("FACET_MASK_PROVIDER")) {
    cfg.mask_provider = mask_provider_from_json(parse_json_text(*v, "FACET_MASK_PROVIDER"), fs::current_path());
  }
  if (auto v = env("FACET_GENERATOR_PROVIDER")) {
    cfg.generator_provider = generator_provider_from_json(parse_json_text(*v, "FACET_GENERATOR_PROVIDER"));
  }

  if (cfg.port < 0 || cfg.port > 65535) fail(ErrorCode::InvalidArgument, "port out of range");
  if (cfg.render_size < 16 || cfg.render_size > 4096) fail(ErrorCode::InvalidArgument, "render_size out of range");
  return cfg;
}

json to_json(const ModelSummary& s) {
  json j = {{"vertex_count", s.vertex_count}, {"face_count", s.face_count}, {"history_size", s.history_size}};
  if (s.bounds.valid) {
    j["bounds"] = {{"min", {s.bounds.min.x(), s.bounds.min.y(), s.bounds.min.z()}},
                   {"max", {s.bounds.max.x(), s.bounds.max.y(), s.bounds.max.z()}}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// Sessions

struct PipelineService::Session {
  std::string id;
  mutable std::shared_mutex mutex;
  std::optional<TriangleMesh> mesh;
  Camera camera;
  std::vector<DetectedComponent> detected;
  std::deque<TriangleMesh> history;  // oldest first
  std::atomic<bool> busy{false};
};

namespace {

/// Marks a session busy for the lifetime of an exclusive operation.
struct BusyFlag {
  std::atomic<bool>& flag;
  explicit BusyFlag(std::atomic<bool>& f) : flag(f) { flag = true; }
  ~BusyFlag() { flag = false; }
};

std::string random_session_id() {
  static std::mutex m;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(m);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (int word = 0; word < 2; ++word) {
    std::uint64_t v = rng();
    for (int i = 0; i < 16; ++i, v >>= 4) id += kHex[v & 15];
  }
  return id;
}

ModelSummary summarize(const TriangleMesh& mesh, std::size_t history) {
  return {mesh.vertex_count(), mesh.face_count(), bounds(mesh), history};
}

const TriangleMesh& require_model(const std::optional<TriangleMesh>& mesh) {
  if (!mesh) fail(ErrorCode::PreconditionFailed, "session has no model yet");
  return *mesh;
}

}  // namespace

PipelineService::PipelineService(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.catalog_path.empty()) catalog_ = load_catalog(config_.catalog_path);
}

PipelineService::~PipelineService() = default;

std::string PipelineService::create_session() {
  std::lock_guard lock(sessions_mutex_);
  if (sessions_.size() >= config_.max_sessions) {
    fail(ErrorCode::CapacityExceeded, "session limit of " + std::to_string(config_.max_sessions) + " reached");
  }
  auto session = std::make_shared<Session>();
  do {
    session->id = random_session_id();
  } while (sessions_.count(session->id));
  sessions_.emplace(session->id, session);
  return session->id;
}

void PipelineService::delete_session(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  if (sessions_.erase(id) == 0) fail(ErrorCode::NotFound, "unknown session " + id);
}

std::size_t PipelineService::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<PipelineService::Session> PipelineService::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "unknown session " + id);
  return it->second;
}

ModelSummary PipelineService::upload_model(const std::string& id, std::span<const std::uint8_t> glb) {
  auto s = find(id);
  // Parse before taking the lock: a bad upload must not disturb the session.
  TriangleMesh mesh = flatten_scene(parse_glb(glb));
  if (mesh.empty()) fail(ErrorCode::EmptyMesh, "uploaded model has no triangles");
  const Camera camera = default_front_camera(mesh, config_.render_size, config_.render_size);
  std::unique_lock lock(s->mutex);
  BusyFlag busy(s->busy);
  s->mesh = std::move(mesh);
  s->camera = camera;
  s->detected.clear();
  s->history.clear();
  return summarize(*s->mesh, 0);
}

ModelSummary PipelineService::upload_image(const std::string& id, std::span<const std::uint8_t> image,
                                           const std::optional<GeneratorProviderConfig>& provider) {
  find(id);  // fail fast on an unknown session before running the generator
  const auto& cfg = provider ? provider : config_.generator_provider;
  if (!cfg) fail(ErrorCode::PreconditionFailed, "no image-to-3D generator provider is configured");
  decode_image(image);  // reject non-images before the (slow) provider runs
  const auto glb = generate_model(image, *cfg);
  try {
    return upload_model(id, glb);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotFound) throw;
    provider_failure("generator returned an unusable model: " + std::string(e.code_name()) + ": " + e.what());
  }
}

RenderedView PipelineService::render(const std::string& id, double yaw_deg, double elevation_deg) const {
  auto s = find(id);
  std::shared_lock lock(s->mutex);
  const TriangleMesh& mesh = require_model(s->mesh);
  RenderedView view;
  if (yaw_deg == 0.0 && elevation_deg == 0.0) {
    view.camera = s->camera;
  } else {
    const Sphere sphere = bounding_sphere(mesh);
    view.camera = orbit_camera(sphere.center, 2.5 * sphere.radius, yaw_deg, elevation_deg, config_.render_size,
                               config_.render_size, kDefaultFovDeg);
  }
  view.image = shade(mesh, rasterize(mesh, view.camera), view.camera);
  return view;
}

SegmentationOutcome PipelineService::segment(const std::string& id, const std::string& prompt,
                                             const std::optional<MaskProviderConfig>& provider) {
  auto s = find(id);
  const auto& cfg = provider ? provider : config_.mask_provider;
  if (!cfg) fail(ErrorCode::PreconditionFailed, "no segmentation provider is configured");
  std::unique_lock lock(s->mutex);
  BusyFlag busy(s->busy);
  auto outcome = segment_components(require_model(s->mesh), s->camera, prompt, *cfg);
  s->detected = outcome.components;
  return outcome;
}

std::shared_ptr<const TriangleMesh> PipelineService::component_mesh(std::uint32_t id) const {
  if (!catalog_) fail(ErrorCode::CatalogEmpty, "no component catalog is loaded");
  const ComponentRecord* rec = catalog_->manifest.find(id);
  if (!rec) fail(ErrorCode::NotFound, "unknown component " + std::to_string(id));
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = component_cache_.find(id); it != component_cache_.end()) return it->second;
  }
  auto mesh = std::make_shared<const TriangleMesh>(load_component(catalog_->manifest, *rec));
  std::lock_guard lock(cache_mutex_);
  return component_cache_.emplace(id, std::move(mesh)).first->second;
}

std::string PipelineService::thumbnail(std::uint32_t id) const {
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = thumbnail_cache_.find(id); it != thumbnail_cache_.end()) return it->second;
  }
  const auto mesh = component_mesh(id);
  const GrayImage image = sketch_to_image(render_front_view(*mesh, catalog_->index.params));
  std::string encoded = base64_encode(encode_png(image));
  std::lock_guard lock(cache_mutex_);
  return thumbnail_cache_.emplace(id, std::move(encoded)).first->second;
}

std::vector<Candidate> PipelineService::retrieve(const std::string& id, std::span<const std::uint8_t> sketch_image,
                                                 int top_k, const std::optional<std::string>& category) {
  find(id);
  if (!catalog_ || catalog_->manifest.records.empty()) fail(ErrorCode::CatalogEmpty, "no component catalog is loaded");
  if (top_k <= 0) fail(ErrorCode::InvalidArgument, "top_k must be positive");
  const SketchImage sketch = sketch_from_image(decode_image(sketch_image));
  std::vector<Candidate> out;
  for (const QueryHit& hit : query(sketch, catalog_->index, top_k, category)) {
    const ComponentRecord* rec = catalog_->manifest.find(hit.component_id);
    Candidate c;
    c.component_id = hit.component_id;
    c.score = hit.score;
    if (rec) {
      c.name = rec->name;
      c.category = rec->category;
      c.tags = rec->tags;
      try {
        c.thumbnail_png_base64 = thumbnail(hit.component_id);
      } catch (const Error&) {
        // A component whose file disappeared is still listed, without a picture.
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

Preview PipelineService::preview(const std::string& id, std::size_t target, std::uint32_t component_id,
                                 ScalingMode mode) const {
  auto s = find(id);
  const auto component = component_mesh(component_id);
  std::shared_lock lock(s->mutex);
  const TriangleMesh& mesh = require_model(s->mesh);
  if (target >= s->detected.size()) {
    fail(ErrorCode::NotFound, "no detected component #" + std::to_string(target) + " (" +
                                  std::to_string(s->detected.size()) + " detected)");
  }
  Preview p;
  p.plan = plan_replacement(mesh, s->detected[target].obb, component_id, *component, mode);
  p.report = apply_replacement(mesh, p.plan, *component).report;
  return p;
}

FusionReport PipelineService::commit(const std::string& id, const ReplacementPlan& plan) {
  auto s = find(id);
  const auto component = component_mesh(plan.component_id);
  std::unique_lock lock(s->mutex);
  BusyFlag busy(s->busy);
  const TriangleMesh& mesh = require_model(s->mesh);
  if (plan.mesh_fingerprint == 0) fail(ErrorCode::StalePlan, "plan carries no model fingerprint");
  ReplacementResult result = apply_replacement(mesh, plan, *component);
  if (config_.history_depth > 0) {
    s->history.push_back(std::move(*s->mesh));
    while (s->history.size() > config_.history_depth) s->history.pop_front();
  }
  s->mesh = std::move(result.mesh);
  return result.report;
}

ModelSummary PipelineService::undo(const std::string& id) {
  auto s = find(id);
  std::unique_lock lock(s->mutex);
  BusyFlag busy(s->busy);
  require_model(s->mesh);
  if (s->history.empty()) fail(ErrorCode::NothingToUndo, "no committed edit to undo");
  s->mesh = std::move(s->history.back());
  s->history.pop_back();
  return summarize(*s->mesh, s->history.size());
}

std::vector<std::uint8_t> PipelineService::export_glb(const std::string& id) const {
  auto s = find(id);
  std::shared_lock lock(s->mutex);
  return write_glb(make_scene(require_model(s->mesh), "building"));
}

json PipelineService::session_info(const std::string& id) const {
  auto s = find(id);
  const bool busy = s->busy.load();
  std::shared_lock lock(s->mutex);
  json j = {{"id", s->id}, {"state", s->mesh ? (busy ? "busy" : "ready") : "empty"}};
  if (s->mesh) {
    j["model"] = to_json(summarize(*s->mesh, s->history.size()));
    j["camera"] = to_json(s->camera);
  }
  json detected = json::array();
  for (const auto& d : s->detected) {
    detected.push_back({{"label", d.label}, {"obb", to_json(d.obb)}, {"point_count", d.point_count}});
  }
  j["detected"] = detected;
  return j;
}

std::size_t PipelineService::write_snapshots() const {
  if (config_.snapshot_dir.empty()) return 0;
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(sessions_mutex_);
    for (const auto& [_, s] : sessions_) all.push_back(s);
  }
  fs::create_directories(config_.snapshot_dir);
  std::size_t written = 0;
  for (const auto& s : all) {
    std::shared_lock lock(s->mutex);
    if (!s->mesh) continue;
    write_file_bytes((config_.snapshot_dir / (s->id + ".glb")).string(), write_glb(make_scene(*s->mesh, "building")));
    ++written;
  }
  return written;
}

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::CapacityExceeded:
      return 503;
    case ErrorCode::StalePlan:
    case ErrorCode::PreconditionFailed:
    case ErrorCode::NothingToUndo:
      return 409;
    case ErrorCode::ProviderFailure:
      return 502;
    case ErrorCode::IoFailure:
    case ErrorCode::SerializationOverflow:
      return 500;
    case ErrorCode::EmptyQuery:
    case ErrorCode::NoDepthInMask:
    case ErrorCode::NoFeatures:
    case ErrorCode::CatalogEmpty:
    case ErrorCode::DegenerateComponent:
    case ErrorCode::DegenerateSource:
    case ErrorCode::EmptyCloud:
      return 422;
    default:
      return 400;
  }
}

}  // namespace facet
