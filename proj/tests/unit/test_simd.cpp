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

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "facet/simd.hpp"

using namespace facet;

namespace {

std::vector<float> random_floats(std::mt19937_64& rng, std::size_t n, float lo = -1.0f, float hi = 1.0f) {
  std::uniform_real_distribution<float> d(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

bool bitwise_equal(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

/// Relative closeness for kernels whose variants may round differently.
bool close(const std::vector<float>& a, const std::vector<float>& b, float tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > tol * (1.0f + std::abs(a[i]))) return false;
  }
  return true;
}

simd::TriangleSetup random_setup(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  simd::TriangleSetup t{};
  for (int e = 0; e < 3; ++e) {
    t.edge_a[e] = d(rng);
    t.edge_b[e] = d(rng);
    t.edge_c[e] = d(rng) * 40.0;
    t.edge_inclusive[e] = (rng() & 1) != 0;
  }
  // Exact-zero samples exercise the tie rule on some rows.
  if (rng() % 4 == 0) {
    t.edge_a[0] = 1.0;
    t.edge_b[0] = 0.0;
    t.edge_c[0] = -10.5;
  }
  t.inv_z_a = d(rng) * 1e-3;
  t.inv_z_b = d(rng) * 1e-3;
  t.inv_z_c = 0.5 + std::abs(d(rng));
  t.face = static_cast<std::uint32_t>(rng() % 1000);
  return t;
}

}  // namespace

TEST_CASE("the scalar kernels are always available and listed first") {
  const auto all = simd::available();
  REQUIRE(!all.empty());
  CHECK(all.front() == &simd::scalar());
  CHECK(simd::scalar().name == "scalar");
  CHECK(!simd::active().name.empty());
}

TEST_CASE("raster_span variants are bitwise identical") {
  std::mt19937_64 rng(42);
  const auto& ref = simd::scalar();
  for (const simd::Kernels* k : simd::available()) {
    for (int trial = 0; trial < 300; ++trial) {
      const auto tri = random_setup(rng);
      const int width = 1 + static_cast<int>(rng() % 70);
      const int x0 = static_cast<int>(rng() % width);
      const int x1 = x0 + static_cast<int>(rng() % (width - x0 + 1));
      std::vector<double> d_ref(width, std::numeric_limits<double>::infinity()), d_var = d_ref;
      std::vector<std::uint32_t> f_ref(width, 7), f_var = f_ref;
      // Pre-existing depth on some pixels checks the nearer-wins rule.
      for (int x = 0; x < width; x += 3) d_ref[x] = d_var[x] = 1.5;
      const int y = static_cast<int>(rng() % 64);
      ref.raster_span(tri, y, x0, x1, d_ref.data(), f_ref.data());
      k->raster_span(tri, y, x0, x1, d_var.data(), f_var.data());
      CHECK(std::memcmp(d_ref.data(), d_var.data(), width * sizeof(double)) == 0);
      CHECK(f_ref == f_var);
    }
  }
}

// The filter kernels may fuse multiply-adds, so variants agree to rounding
// rather than bit for bit.
TEST_CASE("axpy and magnitude variants agree to float rounding") {
  std::mt19937_64 rng(7);
  const auto& ref = simd::scalar();
  for (const simd::Kernels* k : simd::available()) {
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 31u, 128u, 1001u}) {
      const auto x = random_floats(rng, n), xi = random_floats(rng, n);
      const auto y0 = random_floats(rng, n), y1 = random_floats(rng, n);
      const float hr = 0.37f, hi = -1.25f;

      auto ar = y0, ai = y1, br = y0, bi = y1;
      ref.axpy_real_complex(n, hr, hi, x.data(), ar.data(), ai.data());
      k->axpy_real_complex(n, hr, hi, x.data(), br.data(), bi.data());
      CHECK(close(ar, br, 4e-6f));
      CHECK(close(ai, bi, 4e-6f));

      ar = y0, ai = y1, br = y0, bi = y1;
      ref.axpy_complex(n, hr, hi, x.data(), xi.data(), ar.data(), ai.data());
      k->axpy_complex(n, hr, hi, x.data(), xi.data(), br.data(), bi.data());
      CHECK(close(ar, br, 4e-6f));
      CHECK(close(ai, bi, 4e-6f));

      std::vector<float> ma(n), mb(n);
      ref.magnitude(n, x.data(), xi.data(), ma.data());
      k->magnitude(n, x.data(), xi.data(), mb.data());
      CHECK(close(ma, mb, 4e-6f));
      if (k == &ref) CHECK(bitwise_equal(ma, mb));
    }
  }
}

TEST_CASE("dot_rows variants agree and match a double-precision oracle") {
  std::mt19937_64 rng(11);
  const auto& ref = simd::scalar();
  for (const simd::Kernels* k : simd::available()) {
    for (std::size_t dim : {1u, 8u, 13u, 64u}) {
      const std::size_t rows = 37;
      const auto q = random_floats(rng, dim);
      const auto m = random_floats(rng, rows * dim);
      std::vector<float> a(rows), b(rows);
      ref.dot_rows(q.data(), m.data(), rows, dim, a.data());
      k->dot_rows(q.data(), m.data(), rows, dim, b.data());
      CHECK(close(a, b, 1e-5f));
      for (std::size_t r = 0; r < rows; ++r) {
        double exact = 0.0;
        for (std::size_t i = 0; i < dim; ++i) exact += double(q[i]) * double(m[r * dim + i]);
        CHECK(std::abs(a[r] - exact) < 1e-5 * (1.0 + std::abs(exact)));
      }
    }
  }
}
