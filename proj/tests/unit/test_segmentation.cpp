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

#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "facet/error.hpp"
#include "facet/image.hpp"
#include "facet/raster.hpp"
#include "facet/segmentation.hpp"
#include "support.hpp"

using namespace facet;

namespace {

Camera front_camera(int size) {
  Camera c;
  c.width = c.height = size;
  c.fx = c.fy = size;
  c.cx = c.cy = size / 2.0;
  return c;
}

TriangleMesh quad(double z, double half) {
  TriangleMesh m;
  m.positions = {{-half, -half, z}, {half, -half, z}, {half, half, z}, {-half, half, z}};
  m.indices = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

ComponentMask mask_of_depth(const DepthBuffer& d) {
  ComponentMask m;
  m.width = d.width;
  m.height = d.height;
  m.bits.resize(d.values.size());
  for (std::size_t i = 0; i < d.values.size(); ++i) m.bits[i] = d.values[i] != kDepthSentinel;
  m.label = "quad";
  return m;
}

}  // namespace

TEST_CASE("mask thresholding keeps values above 127") {
  CHECK(mask_from_image(GrayImage(4, 3, 255)).count() == 12);
  CHECK(mask_from_image(GrayImage(4, 3, 128)).count() == 12);
  CHECK(mask_from_image(GrayImage(4, 3, 127)).count() == 0);
  const GrayImage img(5, 5, 200);
  CHECK(mask_to_image(mask_from_image(img)) == GrayImage(5, 5, 255));
}

TEST_CASE("an all-black mask file loads empty with a NoForeground warning") {
  test::TempDir dir("mask");
  write_image((dir / "black.png").string(), GrayImage(6, 6, 0));
  const auto loaded = load_mask((dir / "black.png").string());
  CHECK(loaded.mask.count() == 0);
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0] == "NoForeground");
  CHECK_THROWS_AS(load_mask((dir / "missing.png").string()), Error);
}

TEST_CASE("file_map provider") {
  test::TempDir dir("fmap");
  GrayImage window(8, 8, 0);
  window.at(2, 3) = 255;
  write_image((dir / "window.png").string(), window);
  std::ofstream(dir / "masks.json") << R"({"window": "window.png"})";
  const auto cfg = mask_provider_from_json({{"kind", "file_map"}, {"mapping_file", (dir / "masks.json").string()}});
  const GrayImage view(8, 8, 0);

  SUBCASE("a mapped prompt yields one mask from that file") {
    const auto masks = request_masks("window", view, cfg);
    REQUIRE(masks.size() == 1);
    CHECK(masks[0].count() == 1);
    CHECK(masks[0].at(2, 3));
    CHECK(masks[0].label == "window");
  }
  SUBCASE("an unmapped prompt is an empty list") { CHECK(request_masks("door", view, cfg).empty()); }
  SUBCASE("a mapped but missing file is a provider failure") {
    auto broken = cfg;
    broken.mapping["door"] = "door.png";
    CHECK_THROWS_AS(request_masks("door", view, broken), Error);
  }
}

TEST_CASE("external_command provider") {
  const GrayImage view(8, 8, 0);
  SUBCASE("a failing command surfaces ProviderFailure with its output") {
    MaskProviderConfig cfg;
    cfg.kind = MaskProviderConfig::Kind::ExternalCommand;
    cfg.command = "sh -c \"echo segmenter-broke >&2; exit 3\"";
    cfg.timeout_s = 10;
    try {
      request_masks("window", view, cfg);
      FAIL("expected ProviderFailure");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ProviderFailure);
      CHECK(std::string(e.what()).find("segmenter-broke") != std::string::npos);
    }
  }
  SUBCASE("a well-behaved command returns its masks") {
    test::TempDir dir("cmd");
    const auto script = dir / "seg.sh";
    // Copies the view as the mask and lists it in manifest.json.
    std::ofstream(script) << "#!/bin/sh\n"
                             "while [ $# -gt 0 ]; do case $1 in --image) img=$2;; --out) out=$2;; esac; shift; done\n"
                             "cp \"$img\" \"$out/m0.png\"\n"
                             "echo '{\"masks\": [\"m0.png\"]}' > \"$out/manifest.json\"\n";
    std::filesystem::permissions(script, std::filesystem::perms::owner_all);
    MaskProviderConfig cfg;
    cfg.kind = MaskProviderConfig::Kind::ExternalCommand;
    cfg.command = script.string();
    GrayImage lit(8, 8, 0);
    lit.at(1, 1) = 250;
    const auto masks = request_masks("window", lit, cfg);
    REQUIRE(masks.size() == 1);
    CHECK(masks[0].count() == 1);
    CHECK(masks[0].at(1, 1));
  }
}

TEST_CASE("extract_foreground") {
  const Camera cam = front_camera(64);
  const TriangleMesh q = quad(5.0, 1.0);
  const DepthBuffer depth = render_depth(q, cam);

  SUBCASE("a mask exactly covering the quad keeps every in-band pixel") {
    const ComponentMask mask = mask_of_depth(depth);
    std::vector<float> d;
    for (float v : depth.values)
      if (v != kDepthSentinel) d.push_back(v);
    std::sort(d.begin(), d.end());
    // Independent linear-interpolation percentiles.
    auto pct = [&](double p) {
      const double pos = p / 100.0 * (d.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      return d[i] + (pos - i) * (double(d[std::min(i + 1, d.size() - 1)]) - d[i]);
    };
    const double lo = pct(2.0), hi = pct(98.0);
    const auto expected = std::count_if(d.begin(), d.end(), [&](float v) { return v >= lo && v <= hi; });
    const auto cloud = extract_foreground(mask, depth, cam);
    CHECK(static_cast<long>(cloud.size()) == expected);
    CHECK(extract_foreground(mask, depth, cam, {0.0, 100.0}).size() == d.size());
  }
  SUBCASE("a mask over background only has no depth") {
    ComponentMask mask;
    mask.width = mask.height = 64;
    mask.bits.assign(64 * 64, 0);
    mask.bits[0] = 1;  // corner pixel, outside the quad
    CHECK_THROWS_AS(extract_foreground(mask, depth, cam), Error);
  }
  SUBCASE("a size mismatch is rejected") {
    ComponentMask mask;
    mask.width = mask.height = 32;
    mask.bits.assign(32 * 32, 1);
    CHECK_THROWS_AS(extract_foreground(mask, depth, cam), Error);
  }
  SUBCASE("far outliers beyond the upper percentile are dropped") {
    DepthBuffer noisy = depth;
    const ComponentMask mask = mask_of_depth(depth);
    std::vector<std::size_t> fg;
    for (std::size_t i = 0; i < noisy.values.size(); ++i)
      if (mask.bits[i]) fg.push_back(i);
    // 1.5% outliers fit under the 2% upper tail of the default band.
    const std::size_t n_out = fg.size() * 15 / 1000;
    for (std::size_t k = 0; k < n_out; ++k) noisy.values[fg[k * (fg.size() / n_out)]] = 50.0f;
    const auto cloud = extract_foreground(mask, noisy, cam);
    for (const auto& p : cloud.points) CHECK(std::abs(p.z() - 5.0) < 1e-3);
    CHECK(cloud.size() >= fg.size() * 95 / 100);
  }
  SUBCASE("5% far outliers are dropped when the upper bound sits below them") {
    DepthBuffer noisy = depth;
    const ComponentMask mask = mask_of_depth(depth);
    std::vector<std::size_t> fg;
    for (std::size_t i = 0; i < noisy.values.size(); ++i)
      if (mask.bits[i]) fg.push_back(i);
    const std::size_t n_out = fg.size() / 20;
    for (std::size_t k = 0; k < n_out; ++k) noisy.values[fg[k * 20]] = 50.0f;
    const auto cloud = extract_foreground(mask, noisy, cam, {2.0, 94.0});
    for (const auto& p : cloud.points) CHECK(std::abs(p.z() - 5.0) < 1e-3);
  }
  SUBCASE("invalid bands are rejected") {
    CHECK_THROWS_AS(extract_foreground(mask_of_depth(depth), depth, cam, {60.0, 40.0}), Error);
  }
}

TEST_CASE("shade paints background black and surfaces brighter") {
  const Camera cam = front_camera(32);
  const TriangleMesh q = quad(5.0, 1.0);
  const auto raster = rasterize(q, cam);
  const GrayImage img = shade(q, raster, cam);
  CHECK(img.at(0, 0) == 0);
  CHECK(img.at(16, 16) > 200);
}
