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
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "facet/camera.hpp"
#include "facet/image.hpp"
#include "facet/raster.hpp"

namespace facet {

struct ComponentMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // 1 = component pixel
  std::string label;
  std::string prompt;

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  std::size_t count() const;
  std::vector<Pixel> pixels() const;
};

/// Foreground iff gray value > 127.
ComponentMask mask_from_image(const GrayImage& image, std::string label = {}, std::string prompt = {});
GrayImage mask_to_image(const ComponentMask& mask);

struct LoadedMask {
  ComponentMask mask;
  std::vector<std::string> warnings;  // "NoForeground" for an empty mask
};

/// Throws Error{UndecodableImage}.
LoadedMask load_mask(const std::string& path);

/// Where masks come from.
///  - file_map: `mapping` is {prompt -> image path}, resolved against `root`.
///  - external_command: `command` is split on whitespace and invoked with
///    --image PATH --prompt TEXT --out DIR; it must write mask images plus
///    DIR/manifest.json listing them ({"masks": [file, ...]}).
///  - http_endpoint: multipart POST of (image, prompt) to `url`, answering
///    {"masks": [base64 image, ...]}.
struct MaskProviderConfig {
  enum class Kind { FileMap, ExternalCommand, HttpEndpoint };
  Kind kind = Kind::FileMap;
  std::filesystem::path root;
  std::map<std::string, std::string> mapping;
  std::string command;
  std::string url;
  double timeout_s = 60.0;
};

/// Reads {"kind": "file_map"|"external_command"|"http_endpoint", ...}.
/// For file_map, "mapping" may be inline or "mapping_file" may name a JSON
/// file whose directory becomes the root.
MaskProviderConfig mask_provider_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

/// Masks for one prompt on one rendered view. An unmapped prompt in a
/// file_map is an empty result. Throws Error{ProviderFailure} carrying the
/// provider's diagnostic output.
std::vector<ComponentMask> request_masks(const std::string& prompt, const GrayImage& view,
                                         const MaskProviderConfig& config);

struct DepthBand {
  double lo_percentile = 2.0;
  double hi_percentile = 98.0;
};

/// Back-projects masked pixels that carry depth, then drops points whose
/// depth lies outside the percentile band of the masked depths (linear
/// interpolation between order statistics). Output keeps row-major pixel
/// order. Throws Error{NoDepthInMask}, Error{InvalidArgument} on size
/// mismatch.
PointCloud extract_foreground(const ComponentMask& mask, const DepthBuffer& depth, const Camera& camera,
                              DepthBand band = {});

/// Shaded grayscale view of a raster result for segmentation providers and
/// the render endpoint: Lambert term of face normals, background black.
GrayImage shade(const TriangleMesh& mesh, const RasterResult& raster, const Camera& camera);

}  // namespace facet
