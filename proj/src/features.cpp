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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "facet/simd.hpp"
#include "facet/sketch.hpp"

namespace facet {
namespace {

// Inclusive prefix sums with a zero first row and column.
std::vector<std::uint32_t> ink_prefix(const SketchImage& s) {
  const std::size_t stride = static_cast<std::size_t>(s.width) + 1;
  std::vector<std::uint32_t> p(stride * (s.height + 1), 0);
  for (int y = 0; y < s.height; ++y) {
    std::uint32_t row = 0;
    for (int x = 0; x < s.width; ++x) {
      row += s.at(x, y) ? 1 : 0;
      p[(y + 1) * stride + x + 1] = p[y * stride + x + 1] + row;
    }
  }
  return p;
}

// Source index range [lo, hi) covered by the footprint [a, b), clipped.
std::pair<int, int> footprint(double a, double b, int limit) {
  int lo = static_cast<int>(std::floor(a));
  int hi = static_cast<int>(std::ceil(b));
  if (hi <= lo) hi = lo + 1;
  return {std::clamp(lo, 0, limit), std::clamp(hi, 0, limit)};
}

constexpr double kMargin = 0.05;

}  // namespace

SketchImage canonicalize_sketch(const SketchImage& sketch, int size) {
  SketchImage out(size, size);
  int x0 = sketch.width, y0 = sketch.height, x1 = -1, y1 = -1;
  for (int y = 0; y < sketch.height; ++y) {
    for (int x = 0; x < sketch.width; ++x) {
      if (!sketch.at(x, y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return out;

  const double side = std::max(x1 - x0 + 1, y1 - y0 + 1) * (1.0 + 2.0 * kMargin);
  const double ox = 0.5 * (x0 + x1 + 1) - 0.5 * side;
  const double oy = 0.5 * (y0 + y1 + 1) - 0.5 * side;
  const double step = side / size;
  const auto prefix = ink_prefix(sketch);
  const std::size_t stride = static_cast<std::size_t>(sketch.width) + 1;

  std::vector<std::pair<int, int>> cols(size);
  for (int i = 0; i < size; ++i) cols[i] = footprint(ox + i * step, ox + (i + 1) * step, sketch.width);
  for (int j = 0; j < size; ++j) {
    const auto [ya, yb] = footprint(oy + j * step, oy + (j + 1) * step, sketch.height);
    if (ya >= yb) continue;
    for (int i = 0; i < size; ++i) {
      const auto [xa, xb] = cols[i];
      if (xa >= xb) continue;
      const std::uint32_t sum = prefix[yb * stride + xb] - prefix[ya * stride + xb] - prefix[yb * stride + xa] +
                                prefix[ya * stride + xa];
      if (sum > 0) out.set(i, j, true);
    }
  }
  return out;
}

GaborEnergy gabor_energy(const SketchImage& canonical) {
  const auto& k = simd::active();
  const int w = canonical.width / 2;
  const int h = canonical.height / 2;
  const std::size_t n = static_cast<std::size_t>(w);

  // 2x2 box average to [0, 1] coverage.
  std::vector<float> img(static_cast<std::size_t>(w) * h, 0.0f);
  std::vector<std::uint8_t> row_used(h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int c = canonical.at(2 * x, 2 * y) + canonical.at(2 * x + 1, 2 * y) + canonical.at(2 * x, 2 * y + 1) +
                    canonical.at(2 * x + 1, 2 * y + 1);
      img[static_cast<std::size_t>(y) * w + x] = 0.25f * static_cast<float>(c);
      if (c) row_used[y] = 1;
    }
  }

  // Wavelength and scale in half-resolution pixels.
  const double diag = std::hypot(canonical.width, canonical.height) / 2.0;
  const double lambda = 0.1 * diag;
  const double sigma = 0.4 * lambda;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  const int taps = 2 * r + 1;

  std::vector<double> envelope(taps);
  double env_sum = 0.0;
  for (int t = -r; t <= r; ++t) env_sum += envelope[t + r] = std::exp(-0.5 * t * t / (sigma * sigma));
  for (double& e : envelope) e /= env_sum;

  GaborEnergy out;
  out.width = w;
  out.height = h;
  out.energy.assign(static_cast<std::size_t>(kGaborOrientations) * w * h, 0.0f);

  std::vector<float> padded(n + 2 * r, 0.0f);
  std::vector<float> rr(static_cast<std::size_t>(w) * h), ri(rr.size());
  std::vector<float> cr(n), ci(n);
  const double k0 = 2.0 * std::numbers::pi / lambda;

  for (int o = 0; o < kGaborOrientations; ++o) {
    const double theta = o * std::numbers::pi / kGaborOrientations;
    // Wave vector normal to the preferred stroke direction; orientation 0
    // varies along y and therefore answers to horizontal strokes.
    const double kx = -k0 * std::sin(theta);
    const double ky = k0 * std::cos(theta);
    std::vector<float> hxr(taps), hxi(taps), hyr(taps), hyi(taps);
    for (int t = -r; t <= r; ++t) {
      hxr[t + r] = static_cast<float>(envelope[t + r] * std::cos(kx * t));
      hxi[t + r] = static_cast<float>(envelope[t + r] * std::sin(kx * t));
      hyr[t + r] = static_cast<float>(envelope[t + r] * std::cos(ky * t));
      hyi[t + r] = static_cast<float>(envelope[t + r] * std::sin(ky * t));
    }

    // Horizontal pass: real image to complex rows.
    std::fill(rr.begin(), rr.end(), 0.0f);
    std::fill(ri.begin(), ri.end(), 0.0f);
    std::vector<std::uint8_t> row_nonzero(h, 0);
    for (int y = 0; y < h; ++y) {
      if (!row_used[y]) continue;
      row_nonzero[y] = 1;
      std::copy_n(img.begin() + static_cast<std::ptrdiff_t>(y) * w, w, padded.begin() + r);
      float* yr = rr.data() + static_cast<std::size_t>(y) * w;
      float* yi = ri.data() + static_cast<std::size_t>(y) * w;
      for (int t = -r; t <= r; ++t) k.axpy_real_complex(n, hxr[t + r], hxi[t + r], padded.data() + r + t, yr, yi);
    }

    // Vertical pass: complex rows to complex output, then magnitude.
    for (int y = 0; y < h; ++y) {
      std::fill(cr.begin(), cr.end(), 0.0f);
      std::fill(ci.begin(), ci.end(), 0.0f);
      bool any = false;
      for (int t = -r; t <= r; ++t) {
        const int sy = y + t;
        if (sy < 0 || sy >= h || !row_nonzero[sy]) continue;
        any = true;
        k.axpy_complex(n, hyr[t + r], hyi[t + r], rr.data() + static_cast<std::size_t>(sy) * w,
                       ri.data() + static_cast<std::size_t>(sy) * w, cr.data(), ci.data());
      }
      if (any) k.magnitude(n, cr.data(), ci.data(), out.energy.data() + (static_cast<std::size_t>(o) * h + y) * w);
    }
  }
  return out;
}

std::vector<LocalFeature> extract_features(const SketchImage& sketch, int samples, std::uint64_t seed) {
  const SketchImage canon = canonicalize_sketch(sketch);
  std::vector<std::uint32_t> ink;
  for (std::uint32_t i = 0; i < canon.bits.size(); ++i) {
    if (canon.bits[i]) ink.push_back(i);
  }
  if (ink.empty() || samples <= 0) return {};

  if (ink.size() > static_cast<std::size_t>(samples)) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(samples); ++i) {
      const std::size_t j = i + uniform_index(rng, ink.size() - i);
      std::swap(ink[i], ink[j]);
    }
    ink.resize(static_cast<std::size_t>(samples));
    std::sort(ink.begin(), ink.end());
  }

  const GaborEnergy energy = gabor_energy(canon);
  const int w = energy.width;
  const int h = energy.height;
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<double> integral(static_cast<std::size_t>(kGaborOrientations) * stride * (h + 1), 0.0);
  for (int o = 0; o < kGaborOrientations; ++o) {
    double* I = integral.data() + static_cast<std::size_t>(o) * stride * (h + 1);
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += energy.at(o, x, y);
        I[(y + 1) * stride + x + 1] = I[y * stride + x + 1] + row;
      }
    }
  }

  // Window geometry in half-resolution pixels.
  const double window = 0.25 * std::hypot(canon.width, canon.height) / 2.0;
  const double cell = window / kPoolingGrid;
  auto first_index = [](double edge, int limit) {
    return std::clamp(static_cast<int>(std::ceil(edge - 0.5)), 0, limit);
  };

  std::vector<LocalFeature> out;
  out.reserve(ink.size());
  for (const std::uint32_t idx : ink) {
    const int u = static_cast<int>(idx % canon.width);
    const int v = static_cast<int>(idx / canon.width);
    const double cx = (u + 0.5) / 2.0;
    const double cy = (v + 0.5) / 2.0;
    std::array<double, kFeatureDim> acc{};
    for (int j = 0; j < kPoolingGrid; ++j) {
      const int ya = first_index(cy - window / 2 + j * cell, h);
      const int yb = first_index(cy - window / 2 + (j + 1) * cell, h);
      for (int i = 0; i < kPoolingGrid; ++i) {
        const int xa = first_index(cx - window / 2 + i * cell, w);
        const int xb = first_index(cx - window / 2 + (i + 1) * cell, w);
        if (xa >= xb || ya >= yb) continue;
        for (int o = 0; o < kGaborOrientations; ++o) {
          const double* I = integral.data() + static_cast<std::size_t>(o) * stride * (h + 1);
          acc[(j * kPoolingGrid + i) * kGaborOrientations + o] =
              I[yb * stride + xb] - I[ya * stride + xb] - I[yb * stride + xa] + I[ya * stride + xa];
        }
      }
    }
    double norm2 = 0.0;
    for (double& a : acc) {
      a = std::max(0.0, a);  // integral-image differences can dip below zero by rounding
      norm2 += a * a;
    }
    if (!(norm2 > 0.0)) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    LocalFeature f;
    for (int d = 0; d < kFeatureDim; ++d) f.vector[d] = static_cast<float>(acc[d] * inv);
    f.u = static_cast<float>(u);
    f.v = static_cast<float>(v);
    out.push_back(f);
  }
  return out;
}

}  // namespace facet
