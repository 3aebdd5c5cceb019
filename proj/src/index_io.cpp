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

#include <bit>
#include <cstring>
#include <string_view>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "facet/retrieval.hpp"

namespace facet {
namespace {

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

constexpr std::string_view kMagic = "SKRIDX1";
constexpr int kVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(ErrorCode::UnsupportedFormat, "index file is truncated");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_index(const RetrievalIndex& index) {
  nlohmann::json components = nlohmann::json::array();
  for (const auto& c : index.components) {
    components.push_back({{"id", c.id}, {"category", c.category}, {"views", c.view_count}});
  }
  const nlohmann::json header = {{"version", kVersion},
                                 {"k", index.codebook.k},
                                 {"dim", kFeatureDim},
                                 {"seed", index.codebook.training_seed},
                                 {"parameters", to_json(index.params)},
                                 {"components", components}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  put(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (float c : index.codebook.centroids) put(out, c);
  for (float w : index.idf) put(out, w);
  for (const auto& list : index.postings) {
    put(out, static_cast<std::uint32_t>(list.size()));
    for (const Posting& p : list) {
      put(out, p.component_id);
      put(out, p.view_id);
      put(out, p.weight);
    }
  }
  return out;
}

RetrievalIndex deserialize_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
    fail(ErrorCode::UnsupportedFormat, "not a retrieval index (bad magic)");
  }
  Reader in(bytes.subspan(kMagic.size()));
  const auto header_len = in.get<std::uint32_t>();
  const auto text = in.take(header_len);
  const auto header = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (header.is_discarded() || !header.is_object()) fail(ErrorCode::UnsupportedFormat, "index header is not JSON");

  RetrievalIndex index;
  try {
    if (header.at("version").get<int>() != kVersion) {
      fail(ErrorCode::UnsupportedVersion, "index version " + header.at("version").dump() + " is not supported");
    }
    if (header.at("dim").get<int>() != kFeatureDim) fail(ErrorCode::UnsupportedFormat, "feature dimension mismatch");
    index.params = retrieval_params_from_json(header.at("parameters"));
    index.codebook.k = header.at("k").get<int>();
    index.codebook.training_seed = header.at("seed").get<std::uint64_t>();
    for (const auto& c : header.at("components")) {
      index.components.push_back(
          {c.at("id").get<std::uint32_t>(), c.at("category").get<std::string>(), c.at("views").get<std::uint32_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::UnsupportedFormat, std::string("index header: ") + e.what());
  }
  const int k = index.codebook.k;
  if (k < 1 || static_cast<std::size_t>(k) * (kFeatureDim + 1) * sizeof(float) > in.remaining()) {
    fail(ErrorCode::UnsupportedFormat, "index body is truncated");
  }
  index.codebook.centroids.resize(static_cast<std::size_t>(k) * kFeatureDim);
  for (float& c : index.codebook.centroids) c = in.get<float>();
  index.idf.resize(static_cast<std::size_t>(k));
  for (float& w : index.idf) w = in.get<float>();
  index.postings.resize(static_cast<std::size_t>(k));
  for (auto& list : index.postings) {
    const auto n = in.get<std::uint32_t>();
    if (static_cast<std::size_t>(n) * 12 > in.remaining()) fail(ErrorCode::UnsupportedFormat, "postings are truncated");
    list.resize(n);
    for (Posting& p : list) {
      p.component_id = in.get<std::uint32_t>();
      p.view_id = in.get<std::uint32_t>();
      p.weight = in.get<float>();
    }
  }
  if (in.remaining() != 0) fail(ErrorCode::UnsupportedFormat, "trailing bytes after index");
  return index;
}

void save_index(const RetrievalIndex& index, const std::string& path) { write_file_bytes(path, serialize_index(index)); }

RetrievalIndex load_index(const std::string& path) { return deserialize_index(read_file_bytes(path)); }

}  // namespace facet
