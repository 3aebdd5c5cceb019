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

#include <array>
#include <cstdint>
#include <vector>

#include "facet/camera.hpp"
#include "facet/image.hpp"
#include "facet/mesh.hpp"

namespace facet {

/// Binary stroke map; 1 = ink.
struct SketchImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;

  SketchImage() = default;
  SketchImage(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  void set(int u, int v, bool ink) { bits[static_cast<std::size_t>(v) * width + u] = ink ? 1 : 0; }
  std::size_t ink_count() const;
  bool operator==(const SketchImage&) const = default;
};

/// Ink iff gray value > 127.
SketchImage sketch_from_image(const GrayImage& image);
/// Ink is written as 255 on a 0 background.
GrayImage sketch_to_image(const SketchImage& sketch);

/// Contour drawing of a mesh. A foreground pixel is inked when a 4-neighbour
/// is background, when the second difference of depth across it (along x or
/// y) exceeds `depth_threshold`, or when the camera-facing normal of its
/// triangle and that of its right or lower neighbour differ by more than
/// `normal_threshold_deg`. Second differences vanish on planes, so a steeply
/// viewed face stays blank while an occlusion edge is drawn. A mesh without
/// triangles gives a blank image.
SketchImage render_line_art(const TriangleMesh& mesh, const Camera& camera, double depth_threshold,
                            double normal_threshold_deg);

inline constexpr int kCanonicalSketchSize = 256;
inline constexpr int kFeatureDim = 64;
inline constexpr int kGaborOrientations = 4;
inline constexpr int kPoolingGrid = 4;

/// Crops to the ink bounding box, pads it to a square (plus a 5% margin on
/// each side) and resamples to size x size. Downsampling keeps a target
/// pixel if any source pixel in its footprint is ink. Blank inputs give a
/// blank canvas.
SketchImage canonicalize_sketch(const SketchImage& sketch, int size = kCanonicalSketchSize);

struct LocalFeature {
  std::array<float, kFeatureDim> vector{};  // [cell][orientation], L2-normalized
  float u = 0.0f;                           // keypoint in canonical coordinates
  float v = 0.0f;
};

/// Local Gabor descriptors of a sketch.
///
/// The sketch is canonicalized first. Keypoints are `samples` distinct ink
/// pixels drawn with a seeded generator (every ink pixel when there are
/// fewer). Each descriptor pools the response energy of four oriented
/// complex Gabor filters (0, 45, 90 and 135 degrees; wavelength 0.1 of the
/// canvas diagonal) over a 4x4 grid of cells spanning a window of 0.25 of the
/// diagonal centred on the keypoint. Windows with no energy are dropped.
/// The filter bank runs on a 2x box-downsampled canvas.
///
/// Orientation 0 responds to horizontal strokes.
std::vector<LocalFeature> extract_features(const SketchImage& sketch, int samples, std::uint64_t seed);

/// Per-orientation energy maps at half canonical resolution; exposed for
/// tests. Layout: [orientation][row][col].
struct GaborEnergy {
  int width = 0;
  int height = 0;
  std::vector<float> energy;
  float at(int orientation, int x, int y) const {
    return energy[(static_cast<std::size_t>(orientation) * height + y) * width + x];
  }
};
GaborEnergy gabor_energy(const SketchImage& canonical);

/// Uniform integer in [0, n) from a 64-bit generator, identical on every
/// platform (rejection sampling, no std::uniform_int_distribution).
template <typename Rng>
std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  for (;;) {
    const std::uint64_t r = rng();
    if (r < limit) return r % n;
  }
}

/// Uniform double in [0, 1) with 53 random bits, platform-independent.
template <typename Rng>
double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// SplitMix64 finalizer, used to derive independent seeds.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace facet
