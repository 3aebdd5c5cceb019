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
#include <string>
#include <vector>

#include "facet/camera.hpp"
#include "facet/mesh.hpp"
#include "facet/segmentation.hpp"

namespace facet {

/// Parameters of a procedural window or door built from boxes. All parts
/// are mirror-symmetric about the x = 0 and z = 0 planes, centred on the
/// origin, facing +Z.
struct ComponentSpec {
  std::string kind = "window";  // "window" or "door"
  double width = 1.2;
  double height = 1.0;  // rectangular part, without the arch
  double frame = 0.08;
  int panes_x = 2;
  int panes_y = 1;
  bool arch = false;
};

TriangleMesh make_component(const ComponentSpec& spec);

/// `count` specs with pairwise different layouts. The first 48 cover every
/// (kind, panes_x 1..4, panes_y 1..3, arch) combination; later ones repeat
/// layouts with other proportions. Deterministic in (count, seed).
std::vector<ComponentSpec> component_suite(int count, std::uint64_t seed);

/// File stem used when writing a suite: "<kind>_<index, 3 digits>".
std::string component_stem(const ComponentSpec& spec, int index);

/// Writes <dir>/<stem>.glb for every spec plus metadata.json
/// ({relative path: {category, tags}}).
void write_component_suite(const std::filesystem::path& dir, const std::vector<ComponentSpec>& specs);

/// Box house whose front wall is a grid with one raised window panel.
struct FixtureHouse {
  TriangleMesh mesh;
  std::vector<std::uint32_t> window_faces;  // ascending
  Camera camera;                            // default front camera
  ComponentMask window_mask;                // "window" pixels of that camera
  Vec3 window_center = Vec3::Zero();
  Vec3 window_half_extents = Vec3::Zero();  // descending
  std::size_t hole_perimeter_edges = 0;
};

/// `variant` changes the wall cell size and the panel depth so that several
/// sessions can work on different houses.
FixtureHouse make_fixture_house(int variant = 0, int image_size = 512);

/// Writes house.glb, camera.json, masks/window.png and masks/masks.json
/// ({"window": "window.png"}).
void write_fixture_house(const std::filesystem::path& dir, const FixtureHouse& house);

}  // namespace facet
