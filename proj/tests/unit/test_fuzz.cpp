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

#include <cstring>
#include <random>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "support.hpp"

using namespace facet;

// Corrupted containers must either parse or fail with a facet::Error; any
// other exception or a crash is a bug.
TEST_CASE("mutated GLB files never escape the error model") {
  const auto fixtures = test::glb_fixtures();
  std::mt19937_64 rng(2024);
  std::size_t parsed = 0, rejected = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    auto bytes = fixtures[rng() % fixtures.size()];
    switch (rng() % 4) {
      case 0:  // flip a few bytes
        for (int k = 0; k < 1 + static_cast<int>(rng() % 8); ++k) bytes[rng() % bytes.size()] ^= 1u << (rng() % 8);
        break;
      case 1:  // truncate
        bytes.resize(rng() % bytes.size());
        break;
      case 2:  // overwrite a 32-bit field with an extreme value
        if (bytes.size() >= 4) {
          const std::size_t at = (rng() % (bytes.size() / 4)) * 4;
          const std::uint32_t v = (rng() & 1) ? 0xffffffffu : static_cast<std::uint32_t>(rng() % 64);
          std::memcpy(bytes.data() + at, &v, 4);
        }
        break;
      default:  // append junk
        for (int k = 0; k < 1 + static_cast<int>(rng() % 16); ++k) bytes.push_back(static_cast<std::uint8_t>(rng()));
    }
    try {
      const auto scene = parse_glb(bytes);
      flatten_scene(scene);
      ++parsed;
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 3000);
  CHECK(rejected > 0);
}
