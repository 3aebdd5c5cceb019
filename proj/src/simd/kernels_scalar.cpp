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

#include <cmath>

#include "facet/simd.hpp"
#include "kernels_impl.hpp"

namespace facet::simd {
namespace {

inline bool covered(const TriangleSetup& t, double px, double py) {
  for (int e = 0; e < 3; ++e) {
    const double v = t.edge_a[e] * px + (t.edge_b[e] * py + t.edge_c[e]);
    if (!(v > 0.0 || (v == 0.0 && t.edge_inclusive[e]))) return false;
  }
  return true;
}

void raster_span(const TriangleSetup& t, int y, int x0, int x1, double* depth, std::uint32_t* face) {
  const double py = y + 0.5;
  const double iz_row = t.inv_z_b * py + t.inv_z_c;
  for (int x = x0; x < x1; ++x) {
    const double px = x + 0.5;
    if (!covered(t, px, py)) continue;
    const double iz = t.inv_z_a * px + iz_row;
    if (!(iz > 0.0)) continue;
    const double z = 1.0 / iz;
    if (z < depth[x]) {
      depth[x] = z;
      face[x] = t.face;
    }
  }
}

void axpy_real_complex(std::size_t n, float hr, float hi, const float* x, float* yr, float* yi) {
  for (std::size_t i = 0; i < n; ++i) {
    yr[i] += x[i] * hr;
    yi[i] += x[i] * hi;
  }
}

void axpy_complex(std::size_t n, float hr, float hi, const float* xr, const float* xi, float* yr, float* yi) {
  for (std::size_t i = 0; i < n; ++i) {
    yr[i] += xr[i] * hr - xi[i] * hi;
    yi[i] += xr[i] * hi + xi[i] * hr;
  }
}

void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, float* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const float* row = rows + r * dim;
    float acc = 0.0f;
    for (std::size_t d = 0; d < dim; ++d) acc += query[d] * row[d];
    out[r] = acc;
  }
}

void magnitude(std::size_t n, const float* re, const float* im, float* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

constexpr Kernels kScalar{
    "scalar", raster_span, axpy_real_complex, axpy_complex, dot_rows, magnitude,
};

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

}  // namespace facet::simd
