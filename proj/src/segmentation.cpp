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

#include "facet/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <atomic>

#include <unistd.h>

#include <httplib.h>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "facet/subprocess.hpp"

namespace facet {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t ComponentMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

std::vector<Pixel> ComponentMask::pixels() const {
  std::vector<Pixel> out;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (at(u, v)) out.push_back({u, v});
    }
  }
  return out;
}

ComponentMask mask_from_image(const GrayImage& image, std::string label, std::string prompt) {
  ComponentMask m;
  m.width = image.width;
  m.height = image.height;
  m.bits.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) m.bits[i] = image.pixels[i] > 127 ? 1 : 0;
  m.label = std::move(label);
  m.prompt = std::move(prompt);
  return m;
}

GrayImage mask_to_image(const ComponentMask& mask) {
  GrayImage img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 255 : 0;
  return img;
}

LoadedMask load_mask(const std::string& path) {
  LoadedMask out;
  out.mask = mask_from_image(read_image(path), fs::path(path).stem().string());
  if (out.mask.count() == 0) out.warnings.push_back("NoForeground");
  return out;
}

MaskProviderConfig mask_provider_from_json(const json& j, const fs::path& base_dir) {
  MaskProviderConfig cfg;
  const std::string kind = j.value("kind", std::string("file_map"));
  cfg.timeout_s = j.value("timeout_s", 60.0);
  if (kind == "file_map") {
    cfg.kind = MaskProviderConfig::Kind::FileMap;
    cfg.root = j.contains("root") ? fs::path(j.at("root").get<std::string>()) : base_dir;
    json mapping;
    if (j.contains("mapping_file")) {
      fs::path file = j.at("mapping_file").get<std::string>();
      if (file.is_relative()) file = base_dir / file;
      std::ifstream in(file);
      mapping = json::parse(in, nullptr, false);
      if (mapping.is_discarded()) fail(ErrorCode::ProviderFailure, "cannot parse mask mapping " + file.string());
      if (!j.contains("root")) cfg.root = file.parent_path();
    } else {
      mapping = j.value("mapping", json::object());
    }
    for (const auto& [prompt, path] : mapping.items()) cfg.mapping[prompt] = path.get<std::string>();
  } else if (kind == "external_command") {
    cfg.kind = MaskProviderConfig::Kind::ExternalCommand;
    cfg.command = j.at("command").get<std::string>();
  } else if (kind == "http_endpoint") {
    cfg.kind = MaskProviderConfig::Kind::HttpEndpoint;
    cfg.url = j.at("url").get<std::string>();
  } else {
    fail(ErrorCode::InvalidArgument, "unknown mask provider kind '" + kind + "'");
  }
  return cfg;
}

namespace {

[[noreturn]] void provider_failure(const std::string& what) { fail(ErrorCode::ProviderFailure, what); }

std::vector<ComponentMask> from_file_map(const std::string& prompt, const MaskProviderConfig& cfg) {
  const auto it = cfg.mapping.find(prompt);
  if (it == cfg.mapping.end()) return {};
  fs::path path = it->second;
  if (path.is_relative()) path = cfg.root / path;
  if (!fs::exists(path)) provider_failure("mask file missing: " + path.string());
  try {
    auto loaded = load_mask(path.string());
    loaded.mask.prompt = prompt;
    loaded.mask.label = prompt;
    return {std::move(loaded.mask)};
  } catch (const Error& e) {
    provider_failure("mask file " + path.string() + ": " + e.what());
  }
}

std::vector<ComponentMask> from_command(const std::string& prompt, const GrayImage& view,
                                        const MaskProviderConfig& cfg) {
  // Scratch directory unique per call; removed on every exit path.
  static std::atomic<unsigned> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("facet-masks-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::create_directories(dir / "out");
  struct Cleanup {
    fs::path p;
    ~Cleanup() {
      std::error_code ec;
      fs::remove_all(p, ec);
    }
  } cleanup{dir};

  const fs::path image_path = dir / "view.png";
  write_image(image_path.string(), view);
  auto argv = split_command(cfg.command);
  argv.insert(argv.end(), {"--image", image_path.string(), "--prompt", prompt, "--out", (dir / "out").string()});
  const ProcessResult r = run_process(argv, cfg.timeout_s);
  if (r.timed_out) provider_failure("mask command timed out; output:\n" + r.output);
  if (r.exit_code != 0) {
    provider_failure("mask command exited with " + std::to_string(r.exit_code) + "; output:\n" + r.output);
  }
  std::ifstream in(dir / "out" / "manifest.json");
  const json manifest = json::parse(in, nullptr, false);
  if (manifest.is_discarded()) provider_failure("mask command wrote no readable manifest.json; output:\n" + r.output);
  const json& list = manifest.is_array() ? manifest : manifest.value("masks", json::array());
  std::vector<ComponentMask> out;
  for (const json& entry : list) {
    const std::string file = entry.is_string() ? entry.get<std::string>() : entry.value("file", std::string{});
    try {
      GrayImage img = read_image((dir / "out" / file).string());
      out.push_back(mask_from_image(img, entry.is_object() ? entry.value("label", prompt) : prompt, prompt));
    } catch (const Error& e) {
      provider_failure("mask command output " + file + ": " + e.what());
    }
  }
  return out;
}

std::vector<ComponentMask> from_http(const std::string& prompt, const GrayImage& view, const MaskProviderConfig& cfg) {
  // Split "http://host:port/path" into client base and request path.
  const std::string& url = cfg.url;
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  const auto secs = static_cast<time_t>(cfg.timeout_s);
  client.set_read_timeout(secs, 0);
  client.set_connection_timeout(secs, 0);
  const auto png = encode_png(view);
  httplib::MultipartFormDataItems items = {
      {"image", std::string(png.begin(), png.end()), "view.png", "image/png"},
      {"prompt", prompt, "", "text/plain"},
  };
  auto res = client.Post(path, items);
  if (!res) provider_failure("mask endpoint " + url + ": " + httplib::to_string(res.error()));
  if (res->status != 200) {
    provider_failure("mask endpoint " + url + " returned HTTP " + std::to_string(res->status) + ": " + res->body);
  }
  const json body = json::parse(res->body, nullptr, false);
  if (body.is_discarded() || !body.contains("masks") || !body.at("masks").is_array()) {
    provider_failure("mask endpoint " + url + " returned malformed JSON");
  }
  std::vector<ComponentMask> out;
  for (const json& m : body.at("masks")) {
    try {
      const auto bytes = base64_decode(m.get<std::string>());
      out.push_back(mask_from_image(decode_image(bytes), prompt, prompt));
    } catch (const std::exception& e) {
      provider_failure(std::string("mask endpoint returned an unusable mask: ") + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<ComponentMask> request_masks(const std::string& prompt, const GrayImage& view,
                                         const MaskProviderConfig& config) {
  switch (config.kind) {
    case MaskProviderConfig::Kind::FileMap:
      return from_file_map(prompt, config);
    case MaskProviderConfig::Kind::ExternalCommand:
      return from_command(prompt, view, config);
    case MaskProviderConfig::Kind::HttpEndpoint:
      return from_http(prompt, view, config);
  }
  return {};
}

namespace {

// Linear interpolation between closest ranks on a sorted sample.
double percentile(const std::vector<float>& sorted, double p) {
  if (sorted.size() == 1) return sorted.front();
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (static_cast<double>(sorted[hi]) - sorted[lo]);
}

}  // namespace

PointCloud extract_foreground(const ComponentMask& mask, const DepthBuffer& depth, const Camera& camera,
                              DepthBand band) {
  if (mask.width != depth.width || mask.height != depth.height) {
    fail(ErrorCode::InvalidArgument, "mask is " + std::to_string(mask.width) + "x" + std::to_string(mask.height) +
                                         " but depth is " + std::to_string(depth.width) + "x" +
                                         std::to_string(depth.height));
  }
  if (!(band.lo_percentile >= 0.0 && band.lo_percentile <= band.hi_percentile && band.hi_percentile <= 100.0)) {
    fail(ErrorCode::InvalidArgument, "percentile band must satisfy 0 <= lo <= hi <= 100");
  }
  std::vector<Pixel> fg;
  std::vector<float> depths;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) {
      if (mask.at(u, v) && depth.has_depth(u, v)) {
        fg.push_back({u, v});
        depths.push_back(depth.at(u, v));
      }
    }
  }
  if (fg.empty()) fail(ErrorCode::NoDepthInMask, "no masked pixel carries depth (mask '" + mask.label + "')");

  if (band.lo_percentile > 0.0 || band.hi_percentile < 100.0) {
    std::vector<float> sorted = depths;
    std::sort(sorted.begin(), sorted.end());
    const double lo = band.lo_percentile > 0.0 ? percentile(sorted, band.lo_percentile) : sorted.front();
    const double hi = band.hi_percentile < 100.0 ? percentile(sorted, band.hi_percentile) : sorted.back();
    std::size_t kept = 0;
    for (std::size_t i = 0; i < fg.size(); ++i) {
      if (depths[i] >= lo && depths[i] <= hi) fg[kept++] = fg[i];
    }
    fg.resize(kept);
  }
  return back_project(depth, fg, camera);
}

GrayImage shade(const TriangleMesh& mesh, const RasterResult& raster, const Camera& camera) {
  GrayImage img(raster.depth.width, raster.depth.height);
  const Vec3 cam_center = camera.center();
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const std::uint32_t f = raster.face_at(u, v);
      if (f == kNoFace) continue;
      const Vec3 n = face_normal(mesh, f);
      const auto& tri = mesh.indices[f];
      const Vec3 to_eye = (cam_center - mesh.positions[tri[0]]).normalized();
      const double lambert = std::abs(n.dot(to_eye));
      img.at(u, v) = static_cast<std::uint8_t>(std::lround(40.0 + 215.0 * lambert));
    }
  }
  return img;
}

}  // namespace facet
