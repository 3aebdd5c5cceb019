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

#include <cstdlib>
#include <string_view>

#include "facet/simd.hpp"
#include "kernels_impl.hpp"

namespace facet::simd {

const Kernels& scalar() { return scalar_kernels(); }

const Kernels* avx2() {
#ifdef FACET_HAVE_AVX2
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_kernels() : nullptr;
#else
  return nullptr;
#endif
}

const Kernels& active() {
  static const Kernels* chosen = [] {
    const char* env = std::getenv("FACET_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return &scalar();
    if (const Kernels* k = avx2()) return k;
    return &scalar();
  }();
  return *chosen;
}

std::vector<const Kernels*> available() {
  std::vector<const Kernels*> out{&scalar()};
  if (const Kernels* k = avx2()) out.push_back(k);
  return out;
}

}  // namespace facet::simd
