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

#include <immintrin.h>

#include <cmath>

#include "facet/simd.hpp"
#include "kernels_impl.hpp"

namespace facet::simd {
namespace {

void raster_span(const TriangleSetup& t, int y, int x0, int x1, double* depth, std::uint32_t* face) {
  const double py = y + 0.5;
  const double iz_row = t.inv_z_b * py + t.inv_z_c;

  __m256d ea[3], erow[3], incl[3];
  for (int e = 0; e < 3; ++e) {
    ea[e] = _mm256_set1_pd(t.edge_a[e]);
    erow[e] = _mm256_set1_pd(t.edge_b[e] * py + t.edge_c[e]);
    incl[e] = t.edge_inclusive[e] ? _mm256_castsi256_pd(_mm256_set1_epi64x(-1)) : _mm256_setzero_pd();
  }
  const __m256d za = _mm256_set1_pd(t.inv_z_a);
  const __m256d zrow = _mm256_set1_pd(iz_row);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d lane = _mm256_set_pd(3.5, 2.5, 1.5, 0.5);

  int x = x0;
  for (; x + 4 <= x1; x += 4) {
    const __m256d px = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(x)), lane);
    __m256d inside = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    for (int e = 0; e < 3; ++e) {
      const __m256d v = _mm256_add_pd(_mm256_mul_pd(ea[e], px), erow[e]);
      const __m256d pos = _mm256_cmp_pd(v, zero, _CMP_GT_OQ);
      const __m256d on_edge = _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_EQ_OQ), incl[e]);
      inside = _mm256_and_pd(inside, _mm256_or_pd(pos, on_edge));
    }
    if (_mm256_movemask_pd(inside) == 0) continue;
    const __m256d iz = _mm256_add_pd(_mm256_mul_pd(za, px), zrow);
    inside = _mm256_and_pd(inside, _mm256_cmp_pd(iz, zero, _CMP_GT_OQ));
    const __m256d z = _mm256_div_pd(one, iz);
    const __m256d old = _mm256_loadu_pd(depth + x);
    inside = _mm256_and_pd(inside, _mm256_cmp_pd(z, old, _CMP_LT_OQ));
    const int bits = _mm256_movemask_pd(inside);
    if (bits == 0) continue;
    _mm256_storeu_pd(depth + x, _mm256_blendv_pd(old, z, inside));
    for (int k = 0; k < 4; ++k) {
      if (bits & (1 << k)) face[x + k] = t.face;
    }
  }
  for (; x < x1; ++x) {
    const double px = x + 0.5;
    bool in = true;
    for (int e = 0; e < 3 && in; ++e) {
      const double v = t.edge_a[e] * px + (t.edge_b[e] * py + t.edge_c[e]);
      in = v > 0.0 || (v == 0.0 && t.edge_inclusive[e]);
    }
    if (!in) continue;
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
  const __m256 vr = _mm256_set1_ps(hr);
  const __m256 vi = _mm256_set1_ps(hi);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 xv = _mm256_loadu_ps(x + i);
    _mm256_storeu_ps(yr + i, _mm256_fmadd_ps(xv, vr, _mm256_loadu_ps(yr + i)));
    _mm256_storeu_ps(yi + i, _mm256_fmadd_ps(xv, vi, _mm256_loadu_ps(yi + i)));
  }
  for (; i < n; ++i) {
    yr[i] += x[i] * hr;
    yi[i] += x[i] * hi;
  }
}

void axpy_complex(std::size_t n, float hr, float hi, const float* xr, const float* xi, float* yr, float* yi) {
  const __m256 vr = _mm256_set1_ps(hr);
  const __m256 vi = _mm256_set1_ps(hi);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(xr + i);
    const __m256 b = _mm256_loadu_ps(xi + i);
    __m256 re = _mm256_fmadd_ps(a, vr, _mm256_loadu_ps(yr + i));
    re = _mm256_fnmadd_ps(b, vi, re);
    __m256 im = _mm256_fmadd_ps(a, vi, _mm256_loadu_ps(yi + i));
    im = _mm256_fmadd_ps(b, vr, im);
    _mm256_storeu_ps(yr + i, re);
    _mm256_storeu_ps(yi + i, im);
  }
  for (; i < n; ++i) {
    yr[i] += xr[i] * hr - xi[i] * hi;
    yi[i] += xr[i] * hi + xi[i] * hr;
  }
}

inline float hsum(__m256 v) {
  __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  lo = _mm_add_ps(lo, hi);
  lo = _mm_hadd_ps(lo, lo);
  lo = _mm_hadd_ps(lo, lo);
  return _mm_cvtss_f32(lo);
}

void dot_rows(const float* query, const float* rows, std::size_t n_rows, std::size_t dim, float* out) {
  for (std::size_t r = 0; r < n_rows; ++r) {
    const float* row = rows + r * dim;
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t d = 0;
    for (; d + 16 <= dim; d += 16) {
      acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(query + d), _mm256_loadu_ps(row + d), acc0);
      acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(query + d + 8), _mm256_loadu_ps(row + d + 8), acc1);
    }
    for (; d + 8 <= dim; d += 8) {
      acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(query + d), _mm256_loadu_ps(row + d), acc0);
    }
    float acc = hsum(_mm256_add_ps(acc0, acc1));
    for (; d < dim; ++d) acc += query[d] * row[d];
    out[r] = acc;
  }
}

void magnitude(std::size_t n, const float* re, const float* im, float* out) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 a = _mm256_loadu_ps(re + i);
    const __m256 b = _mm256_loadu_ps(im + i);
    _mm256_storeu_ps(out + i, _mm256_sqrt_ps(_mm256_fmadd_ps(a, a, _mm256_mul_ps(b, b))));
  }
  for (; i < n; ++i) out[i] = std::sqrt(re[i] * re[i] + im[i] * im[i]);
}

constexpr Kernels kAvx2{
    "avx2", raster_span, axpy_real_complex, axpy_complex, dot_rows, magnitude,
};

}  // namespace

const Kernels& avx2_kernels() { return kAvx2; }

}  // namespace facet::simd
