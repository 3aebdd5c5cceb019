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

// REST front end for PipelineService. Every failure answers
// {"error": {"code": <stable name>, "message": <text>}} with the status from
// http_status_for().

#include <atomic>
#include <chrono>
#include <csignal>
#include <functional>
#include <iostream>
#include <thread>

#include "facet/error.hpp"
#include "facet/image.hpp"
#include "facet/service.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that clashes with it.
#include <httplib.h>

namespace facet {

using nlohmann::json;

namespace {

std::atomic<bool> g_stop_requested{false};

extern "C" void on_signal(int) { g_stop_requested = true; }

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, {{"error", {{"code", std::string(error_code_name(code))}, {"message", message}}}},
            http_status_for(code));
}

/// Runs a handler, turning exceptions into error bodies.
template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.code(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorCode::InvalidArgument, std::string("request JSON: ") + e.what());
    } catch (const std::bad_alloc&) {
      send_error(res, ErrorCode::IoFailure, "out of memory");
    } catch (const std::exception& e) {
      send_error(res, ErrorCode::InvalidArgument, e.what());
    }
  };
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::InvalidArgument, "request body is not a JSON object");
  return j;
}

std::span<const std::uint8_t> as_bytes(const std::string& s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Form field value from multipart or url-encoded input.
std::optional<std::string> field(const httplib::Request& req, const std::string& key) {
  if (req.has_file(key)) return req.get_file_value(key).content;
  if (req.has_param(key)) return req.get_param_value(key);
  return std::nullopt;
}

double query_double(const httplib::Request& req, const std::string& key, double fallback) {
  if (!req.has_param(key)) return fallback;
  const std::string text = req.get_param_value(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::InvalidArgument, "query parameter " + key + " must be a number, got '" + text + "'");
  }
}

bool starts_with(const std::string& s, std::string_view prefix) { return s.rfind(prefix, 0) == 0; }

json candidate_json(const Candidate& c) {
  return {{"component_id", c.component_id}, {"score", c.score},        {"name", c.name},
          {"category", c.category},         {"tags", c.tags},          {"thumbnail_png_base64", c.thumbnail_png_base64}};
}

void install_routes(httplib::Server& server, PipelineService& service) {
  const std::string sid = R"(/sessions/([0-9a-f]+))";

  server.Get("/health", guarded([&](const httplib::Request&, httplib::Response& res) {
               send_json(res, {{"status", "ok"}, {"sessions", service.session_count()}});
             }));

  server.Post("/debug/echo", guarded([](const httplib::Request& req, httplib::Response& res) {
                const std::string raw = field(req, "image").value_or(req.body);
                const GrayImage image = decode_image(as_bytes(raw));
                const auto png = encode_png(image);
                res.set_header("X-Image-Width", std::to_string(image.width));
                res.set_header("X-Image-Height", std::to_string(image.height));
                res.set_content(std::string(png.begin(), png.end()), "image/png");
              }));

  server.Post("/sessions", guarded([&](const httplib::Request&, httplib::Response& res) {
                send_json(res, {{"session_id", service.create_session()}}, 201);
              }));

  server.Get(sid, guarded([&](const httplib::Request& req, httplib::Response& res) {
               send_json(res, service.session_info(req.matches[1]));
             }));

  server.Delete(sid, guarded([&](const httplib::Request& req, httplib::Response& res) {
                  service.delete_session(req.matches[1]);
                  send_json(res, {{"deleted", std::string(req.matches[1])}});
                }));

  server.Post(sid + "/model", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                const std::string type = req.get_header_value("Content-Type");
                ModelSummary summary;
                if (auto model = field(req, "model")) {
                  summary = service.upload_model(id, as_bytes(*model));
                } else if (auto image = field(req, "image")) {
                  std::optional<GeneratorProviderConfig> provider;
                  if (auto text = field(req, "provider")) {
                    if (!service.config().allow_request_providers) {
                      fail(ErrorCode::PreconditionFailed, "request-supplied providers are disabled");
                    }
                    provider = generator_provider_from_json(json::parse(*text));
                  }
                  summary = service.upload_image(id, as_bytes(*image), provider);
                } else if (starts_with(type, "image/")) {
                  summary = service.upload_image(id, as_bytes(req.body));
                } else if (!req.body.empty() && !req.is_multipart_form_data()) {
                  summary = service.upload_model(id, as_bytes(req.body));
                } else {
                  fail(ErrorCode::InvalidArgument, "expected a 'model' GLB or a facade 'image'");
                }
                send_json(res, to_json(summary));
              }));

  server.Get(sid + "/render", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const RenderedView view =
                   service.render(req.matches[1], query_double(req, "yaw", 0.0), query_double(req, "elev", 0.0));
               const auto png = encode_png(view.image);
               if (req.get_param_value("format") == "png") {
                 res.set_header("X-Camera", to_json(view.camera).dump());
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
                 return;
               }
               send_json(res, {{"camera", to_json(view.camera)},
                               {"width", view.image.width},
                               {"height", view.image.height},
                               {"image_png_base64", base64_encode(png)}});
             }));

  server.Post(sid + "/segment", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = body_json(req);
                const std::string prompt = body.value("prompt", std::string{});
                if (prompt.empty()) fail(ErrorCode::InvalidArgument, "segment needs a non-empty prompt");
                std::optional<MaskProviderConfig> provider;
                if (body.contains("provider")) {
                  if (!service.config().allow_request_providers) {
                    fail(ErrorCode::PreconditionFailed, "request-supplied providers are disabled");
                  }
                  provider = mask_provider_from_json(body.at("provider"));
                  if (provider->kind != MaskProviderConfig::Kind::FileMap) {
                    fail(ErrorCode::PreconditionFailed, "requests may only name file_map providers");
                  }
                }
                const auto outcome = service.segment(req.matches[1], prompt, provider);
                json components = json::array();
                for (std::size_t i = 0; i < outcome.components.size(); ++i) {
                  const auto& c = outcome.components[i];
                  components.push_back(
                      {{"index", i}, {"label", c.label}, {"obb", to_json(c.obb)}, {"point_count", c.point_count}});
                }
                send_json(res, {{"components", components}, {"errors", outcome.errors}});
              }));

  server.Post(sid + "/retrieve", guarded([&](const httplib::Request& req, httplib::Response& res) {
                std::string sketch;
                int top_k = 5;
                std::optional<std::string> category;
                if (req.is_multipart_form_data()) {
                  sketch = field(req, "sketch").value_or("");
                  if (auto k = field(req, "top_k")) top_k = std::stoi(*k);
                  if (auto c = field(req, "category"); c && !c->empty()) category = *c;
                } else {
                  const json body = body_json(req);
                  const auto bytes = base64_decode(body.value("sketch", std::string{}));
                  sketch.assign(bytes.begin(), bytes.end());
                  top_k = body.value("top_k", top_k);
                  if (body.contains("category")) category = body.at("category").get<std::string>();
                }
                if (sketch.empty()) fail(ErrorCode::InvalidArgument, "retrieve needs a 'sketch' image");
                json candidates = json::array();
                for (const auto& c : service.retrieve(req.matches[1], as_bytes(sketch), top_k, category)) {
                  candidates.push_back(candidate_json(c));
                }
                send_json(res, {{"candidates", candidates}});
              }));

  server.Post(sid + "/preview", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = body_json(req);
                const auto mode = parse_scaling_mode(body.value("mode", std::string("per_axis")));
                const Preview p = service.preview(req.matches[1], body.value("target", std::size_t{0}),
                                                  body.at("component_id").get<std::uint32_t>(), mode);
                send_json(res, {{"plan", to_json(p.plan)}, {"fusion_report", to_json(p.report)}});
              }));

  server.Post(sid + "/commit", guarded([&](const httplib::Request& req, httplib::Response& res) {
                const json body = body_json(req);
                const ReplacementPlan plan = plan_from_json(body.contains("plan") ? body.at("plan") : body);
                send_json(res, {{"fusion_report", to_json(service.commit(req.matches[1], plan))}});
              }));

  server.Post(sid + "/undo", guarded([&](const httplib::Request& req, httplib::Response& res) {
                send_json(res, to_json(service.undo(req.matches[1])));
              }));

  server.Get(sid + "/export", guarded([&](const httplib::Request& req, httplib::Response& res) {
               const auto glb = service.export_glb(req.matches[1]);
               res.set_header("Content-Disposition", "attachment; filename=\"building.glb\"");
               res.set_content(std::string(glb.begin(), glb.end()), "model/gltf-binary");
             }));
}

}  // namespace

void stop_http_server() { g_stop_requested = true; }

void serve_http(PipelineService& service, const std::function<void(int)>& on_ready) {
  httplib::Server server;
  server.set_payload_max_length(512ull << 20);
  install_routes(server, service);

  g_stop_requested = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  const ServiceConfig& cfg = service.config();
  int port = cfg.port;
  if (port == 0) {
    port = server.bind_to_any_port(cfg.host);
  } else if (!server.bind_to_port(cfg.host, port)) {
    port = -1;
  }
  if (port <= 0) fail(ErrorCode::IoFailure, "cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));

  // Signal handlers only set a flag; this thread performs the actual stop.
  std::thread watcher([&server] {
    while (!g_stop_requested) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
  });
  std::cerr << "listening on " << cfg.host << ":" << port << std::endl;
  if (on_ready) on_ready(port);
  const bool ok = server.listen_after_bind();
  const bool stopped = g_stop_requested.exchange(true);
  watcher.join();

  const std::size_t saved = service.write_snapshots();
  if (saved > 0) std::cerr << "wrote " << saved << " session snapshot(s) to " << cfg.snapshot_dir << std::endl;
  if (!ok && !stopped) fail(ErrorCode::IoFailure, "server on " + cfg.host + ":" + std::to_string(port) + " failed");
}

}  // namespace facet
