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

// Data-parallel inner loops with a portable scalar reference and optional
// AVX2 variants. Call sites go through active(); the test suite checks every
// available variant against scalar().

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace facet::simd {

/// Screen-space setup for one triangle. Edge functions and inverse depth are
/// affine in pixel-center coordinates: f(px, py) = a*px + b*py + c.
struct TriangleSetup {
  double edge_a[3];
  double edge_b[3];
  double edge_c[3];
  /// Edges that own exact-zero samples under the top-left rule.
  bool edge_inclusive[3];
  double inv_z_a;
  double inv_z_b;
  double inv_z_c;
  std::uint32_t face;
};

struct Kernels {
  std::string_view name;

  /// Rasterizes one row span [x0, x1) of the triangle at row `y`, sampling at
  /// pixel centers. Covered samples nearer than `depth[x]` overwrite
  /// depth[x] and face[x]. Results are bitwise identical across variants.
  void (*raster_span)(const TriangleSetup& tri, int y, int x0, int x1, double* depth, std::uint32_t* face);

  /// y += x * (hr + i*hi) for a real input row.
  void (*axpy_real_complex)(std::size_t n, float hr, float hi, const float* x, float* yr, float* yi);

  /// y += x * (hr + i*hi) for a complex input row (planar re/im arrays).
  void (*axpy_complex)(std::size_t n, float hr, float hi, const float* xr, const float* xi, float* yr, float* yi);

  /// out[r] = dot(query, rows + r*dim) for r in [0, n_rows).
  void (*dot_rows)(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, float* out);

  /// out[i] = sqrt(re[i]^2 + im[i]^2).
  void (*magnitude)(std::size_t n, const float* re, const float* im, float* out);
};

const Kernels& scalar();

/// AVX2+FMA variant, or nullptr when the CPU or build lacks it.
const Kernels* avx2();

/// Variant used by the library. Chosen once: AVX2 when available, unless the
/// FACET_SIMD environment variable is set to "scalar".
const Kernels& active();

/// Every variant runnable on this machine, scalar first.
std::vector<const Kernels*> available();

}  // namespace facet::simd
