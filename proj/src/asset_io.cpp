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

#include "facet/asset_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <tuple>
#include <unordered_map>

#include <Eigen/Geometry>

#include "facet/error.hpp"

namespace facet {

using nlohmann::json;

namespace {

constexpr int kComponentUByte = 5121;
constexpr int kComponentUShort = 5123;
constexpr int kComponentUInt = 5125;
constexpr int kComponentFloat = 5126;
constexpr int kModeTriangles = 4;

static_assert(std::endian::native == std::endian::little,
              "GLB I/O assumes a little-endian host");

std::uint32_t read_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, sizeof v);
  return v;
}

[[noreturn]] void malformed(const std::string& what) {
  fail(ErrorCode::MalformedContainer, "malformed GLB: " + what);
}

[[noreturn]] void unsupported(const std::string& what) {
  fail(ErrorCode::UnsupportedFeature, "unsupported GLB feature: " + what);
}

std::size_t component_size(int component_type) {
  switch (component_type) {
    case kComponentUByte:
      return 1;
    case kComponentUShort:
      return 2;
    case kComponentUInt:
    case kComponentFloat:
      return 4;
    case 5120:  // byte
      return 1;
    case 5122:  // short
      return 2;
    default:
      malformed("unknown accessor componentType " + std::to_string(component_type));
  }
}

std::size_t type_width(const std::string& type) {
  if (type == "SCALAR") return 1;
  if (type == "VEC2") return 2;
  if (type == "VEC3") return 3;
  if (type == "VEC4") return 4;
  if (type == "MAT2") return 4;
  if (type == "MAT3") return 9;
  if (type == "MAT4") return 16;
  malformed("unknown accessor type " + type);
}

// Reads a non-negative integer property with bounds; rejects wrong JSON types.
std::size_t get_index(const json& obj, const char* key, std::size_t limit) {
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) malformed(std::string(key) + " is not an integer");
  const auto i = v.get<std::int64_t>();
  if (i < 0 || static_cast<std::uint64_t>(i) >= limit) malformed(std::string(key) + " out of range");
  return static_cast<std::size_t>(i);
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) malformed(std::string(key) + " is not an integer");
  const auto i = v.get<std::int64_t>();
  if (i < 0) malformed(std::string(key) + " is negative");
  return static_cast<std::size_t>(i);
}

class GlbReader {
 public:
  GlbReader(const json& doc, std::span<const std::uint8_t> bin) : doc_(doc), bin_(bin) {}

  SceneAsset read() {
    check_extensions();
    check_buffers();
    SceneAsset scene;
    read_meshes(scene);
    read_nodes(scene);
    read_opaque(scene);
    return scene;
  }

 private:
  const json& array(const char* key) const {
    static const json empty = json::array();
    if (!doc_.contains(key)) return empty;
    const json& a = doc_.at(key);
    if (!a.is_array()) malformed(std::string(key) + " is not an array");
    return a;
  }

  void check_extensions() const {
    if (doc_.contains("extensionsRequired") && !array("extensionsRequired").empty()) {
      unsupported("required extension " + array("extensionsRequired").front().dump());
    }
    for (const json& ext : array("extensionsUsed")) {
      if (!ext.is_string()) malformed("extensionsUsed entry is not a string");
      const auto name = ext.get<std::string>();
      if (name == "KHR_draco_mesh_compression" || name == "EXT_meshopt_compression" ||
          name == "KHR_mesh_quantization") {
        unsupported(name);
      }
    }
  }

  void check_buffers() const {
    const json& buffers = array("buffers");
    for (std::size_t i = 0; i < buffers.size(); ++i) {
      if (buffers[i].contains("uri")) unsupported("external buffer uri");
      if (i > 0) unsupported("more than one buffer");
      if (get_size(buffers[i], "byteLength", 0) > bin_.size()) malformed("buffer longer than BIN chunk");
    }
  }

  std::span<const std::uint8_t> view_bytes(std::size_t view_index) const {
    const json& views = array("bufferViews");
    if (view_index >= views.size()) malformed("bufferView out of range");
    const json& view = views[view_index];
    get_index(view, "buffer", array("buffers").size());
    const std::size_t offset = get_size(view, "byteOffset", 0);
    const std::size_t length = get_size(view, "byteLength", 0);
    if (offset > bin_.size() || length > bin_.size() - offset) malformed("bufferView exceeds BIN chunk");
    return bin_.subspan(offset, length);
  }

  struct AccessorData {
    std::vector<double> values;  // count * width
    std::size_t count = 0;
    std::size_t width = 0;
  };

  AccessorData read_accessor(std::size_t index, std::initializer_list<int> allowed_types,
                             const std::string& expected_type) const {
    const json& accessors = array("accessors");
    if (index >= accessors.size()) malformed("accessor out of range");
    const json& acc = accessors[index];
    if (acc.contains("sparse")) unsupported("sparse accessor");
    const int ctype = acc.at("componentType").get<int>();
    const std::size_t csize = component_size(ctype);
    if (std::find(allowed_types.begin(), allowed_types.end(), ctype) == allowed_types.end()) {
      unsupported("accessor componentType " + std::to_string(ctype));
    }
    const std::string type = acc.at("type").get<std::string>();
    const std::size_t width = type_width(type);
    if (type != expected_type) malformed("accessor type " + type + ", expected " + expected_type);
    if (acc.value("normalized", false)) unsupported("normalized accessor");
    const std::size_t count = get_size(acc, "count", 0);

    AccessorData out;
    out.count = count;
    out.width = width;
    if (count == 0) return out;
    if (!acc.contains("bufferView")) unsupported("accessor without bufferView");

    const std::size_t view_index = get_index(acc, "bufferView", array("bufferViews").size());
    const auto view = view_bytes(view_index);
    const std::size_t elem = csize * width;
    std::size_t stride = get_size(array("bufferViews")[view_index], "byteStride", 0);
    if (stride == 0) stride = elem;
    if (stride < elem) malformed("byteStride smaller than element");
    const std::size_t offset = get_size(acc, "byteOffset", 0);
    // Bounds check before allocating: the last element must end inside the view.
    if (offset > view.size() || (count - 1) > (view.size() - offset) / stride ||
        offset + (count - 1) * stride + elem > view.size()) {
      malformed("accessor exceeds bufferView");
    }
    out.values.resize(count * width);
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint8_t* base = view.data() + offset + i * stride;
      for (std::size_t c = 0; c < width; ++c) {
        const std::uint8_t* p = base + c * csize;
        double v = 0.0;
        switch (ctype) {
          case kComponentFloat: {
            float f;
            std::memcpy(&f, p, 4);
            v = f;
            break;
          }
          case kComponentUInt: {
            std::uint32_t u;
            std::memcpy(&u, p, 4);
            v = u;
            break;
          }
          case kComponentUShort: {
            std::uint16_t u;
            std::memcpy(&u, p, 2);
            v = u;
            break;
          }
          case kComponentUByte:
            v = *p;
            break;
          default:
            unsupported("accessor componentType " + std::to_string(ctype));
        }
        out.values[i * width + c] = v;
      }
    }
    return out;
  }

  void read_meshes(SceneAsset& scene) const {
    const json& meshes = array("meshes");
    const std::size_t n_materials = array("materials").size();
    for (const json& m : meshes) {
      NamedMesh named;
      named.name = m.value("name", std::string{});
      TriangleMesh& mesh = named.mesh;
      bool all_normals = true;
      bool all_uvs = true;
      bool any_slot = false;
      std::vector<Vec3> normals;
      std::vector<Vec2> uvs;
      // POSITION accessor -> (first vertex, vertex count)
      std::unordered_map<std::size_t, std::pair<std::uint32_t, std::size_t>> position_base;
      std::vector<std::uint32_t> slots;

      const json& prims = m.contains("primitives") ? m.at("primitives") : json::array();
      if (!prims.is_array()) malformed("primitives is not an array");
      for (const json& prim : prims) {
        if (get_size(prim, "mode", kModeTriangles) != kModeTriangles) unsupported("non-triangle primitive");
        if (prim.contains("extensions") && !prim.at("extensions").empty()) unsupported("primitive extension");
        const json& attrs = prim.at("attributes");
        if (!attrs.contains("POSITION")) malformed("primitive without POSITION");
        const std::size_t pos_acc = get_index(attrs, "POSITION", array("accessors").size());

        std::uint32_t base;
        std::size_t n_verts;
        if (auto it = position_base.find(pos_acc); it != position_base.end()) {
          std::tie(base, n_verts) = it->second;
        } else {
          const auto pos = read_accessor(pos_acc, {kComponentFloat}, "VEC3");
          if (mesh.positions.size() + pos.count > std::numeric_limits<std::uint32_t>::max()) {
            malformed("too many vertices");
          }
          base = static_cast<std::uint32_t>(mesh.positions.size());
          n_verts = pos.count;
          position_base.emplace(pos_acc, std::make_pair(base, n_verts));
          for (std::size_t i = 0; i < pos.count; ++i) {
            mesh.positions.emplace_back(pos.values[3 * i], pos.values[3 * i + 1], pos.values[3 * i + 2]);
          }
          if (attrs.contains("NORMAL")) {
            const auto nrm = read_accessor(get_index(attrs, "NORMAL", array("accessors").size()),
                                           {kComponentFloat}, "VEC3");
            if (nrm.count != pos.count) malformed("NORMAL count differs from POSITION count");
            for (std::size_t i = 0; i < nrm.count; ++i) {
              normals.emplace_back(nrm.values[3 * i], nrm.values[3 * i + 1], nrm.values[3 * i + 2]);
            }
          } else {
            all_normals = false;
          }
          if (attrs.contains("TEXCOORD_0")) {
            const auto uv = read_accessor(get_index(attrs, "TEXCOORD_0", array("accessors").size()),
                                          {kComponentFloat}, "VEC2");
            if (uv.count != pos.count) malformed("TEXCOORD_0 count differs from POSITION count");
            for (std::size_t i = 0; i < uv.count; ++i) uvs.emplace_back(uv.values[2 * i], uv.values[2 * i + 1]);
          } else {
            all_uvs = false;
          }
        }

        std::vector<std::uint32_t> idx;
        if (prim.contains("indices")) {
          const auto ia = read_accessor(get_index(prim, "indices", array("accessors").size()),
                                        {kComponentUByte, kComponentUShort, kComponentUInt}, "SCALAR");
          idx.reserve(ia.count);
          for (double v : ia.values) {
            if (v >= static_cast<double>(n_verts)) malformed("index exceeds vertex count");
            idx.push_back(static_cast<std::uint32_t>(v));
          }
        } else {
          idx.resize(n_verts);
          for (std::size_t i = 0; i < n_verts; ++i) idx[i] = static_cast<std::uint32_t>(i);
        }
        if (idx.size() % 3 != 0) malformed("index count not a multiple of 3");

        std::uint32_t slot = 0;
        bool has_slot = false;
        if (prim.contains("extras") && prim.at("extras").is_object() && prim.at("extras").contains("slot")) {
          slot = static_cast<std::uint32_t>(get_size(prim.at("extras"), "slot", 0));
          has_slot = true;
        } else if (prim.contains("material")) {
          slot = static_cast<std::uint32_t>(get_index(prim, "material", n_materials));
          has_slot = true;
        }
        any_slot = any_slot || has_slot;
        for (std::size_t t = 0; t < idx.size(); t += 3) {
          mesh.indices.push_back({base + idx[t], base + idx[t + 1], base + idx[t + 2]});
          slots.push_back(slot);
        }
      }
      if (all_normals && !mesh.positions.empty()) mesh.normals = std::move(normals);
      if (all_uvs && !mesh.positions.empty()) mesh.uvs = std::move(uvs);
      if (any_slot) mesh.material_slot = std::move(slots);
      scene.meshes.push_back(std::move(named));
    }
  }

  void read_nodes(SceneAsset& scene) const {
    const json& nodes = array("nodes");
    const std::size_t n = nodes.size();
    std::vector<int> parent(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      const json& j = nodes[i];
      SceneNode node;
      node.name = j.value("name", std::string{});
      if (j.contains("mesh")) node.mesh = get_index(j, "mesh", scene.meshes.size());
      if (j.contains("children")) {
        for (const json& c : j.at("children")) {
          if (!c.is_number_integer() && !c.is_number_unsigned()) malformed("child index is not an integer");
          const auto ci = c.get<std::int64_t>();
          if (ci < 0 || static_cast<std::size_t>(ci) >= n) malformed("child index out of range");
          if (parent[ci] != -1 || static_cast<std::size_t>(ci) == i) malformed("node has several parents");
          parent[ci] = static_cast<int>(i);
          node.children.push_back(static_cast<std::size_t>(ci));
        }
      }
      node.transform = read_transform(j);
      scene.nodes.push_back(std::move(node));
    }
    // A node forest where every node has at most one parent is acyclic iff
    // walking parents from any node terminates.
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t steps = 0;
      for (int p = parent[i]; p != -1; p = parent[p]) {
        if (++steps > n) malformed("node hierarchy has a cycle");
      }
    }

    const json& scenes = array("scenes");
    if (!scenes.empty()) {
      const std::size_t s = doc_.contains("scene") ? get_index(doc_, "scene", scenes.size()) : 0;
      if (scenes[s].contains("nodes")) {
        for (const json& r : scenes[s].at("nodes")) {
          const auto ri = r.get<std::int64_t>();
          if (ri < 0 || static_cast<std::size_t>(ri) >= n) malformed("scene root out of range");
          if (parent[ri] != -1) malformed("scene root has a parent");
          scene.roots.push_back(static_cast<std::size_t>(ri));
        }
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (parent[i] == -1) scene.roots.push_back(i);
      }
    }
  }

  static Mat4 read_transform(const json& j) {
    Mat4 m = Mat4::Identity();
    if (j.contains("matrix")) {
      const json& a = j.at("matrix");
      if (!a.is_array() || a.size() != 16) malformed("node matrix must have 16 numbers");
      for (int c = 0; c < 4; ++c) {
        for (int r = 0; r < 4; ++r) m(r, c) = a[c * 4 + r].get<double>();
      }
      return m;
    }
    Vec3 t = Vec3::Zero();
    Vec3 s = Vec3::Ones();
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    if (j.contains("translation")) {
      const json& a = j.at("translation");
      if (!a.is_array() || a.size() != 3) malformed("translation must have 3 numbers");
      t = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    }
    if (j.contains("scale")) {
      const json& a = j.at("scale");
      if (!a.is_array() || a.size() != 3) malformed("scale must have 3 numbers");
      s = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    }
    if (j.contains("rotation")) {
      const json& a = j.at("rotation");
      if (!a.is_array() || a.size() != 4) malformed("rotation must have 4 numbers");
      q = Eigen::Quaterniond(a[3].get<double>(), a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
      if (q.norm() == 0.0 || !std::isfinite(q.norm())) malformed("zero rotation quaternion");
      q.normalize();
    }
    m.topLeftCorner<3, 3>() = q.toRotationMatrix() * s.asDiagonal();
    m.topRightCorner<3, 1>() = t;
    return m;
  }

  void read_opaque(SceneAsset& scene) const {
    for (const char* key : {"materials", "textures", "samplers"}) {
      if (doc_.contains(key)) scene.opaque_blobs[key] = OpaqueBlob{array(key), {}};
    }
    const json& images = array("images");
    for (std::size_t i = 0; i < images.size(); ++i) {
      OpaqueBlob blob;
      blob.meta = images[i];
      if (images[i].contains("bufferView")) {
        const auto view = view_bytes(get_index(images[i], "bufferView", array("bufferViews").size()));
        blob.bytes.assign(view.begin(), view.end());
        blob.meta.erase("bufferView");
      }
      scene.opaque_blobs["images/" + std::to_string(i)] = std::move(blob);
    }
  }

  const json& doc_;
  std::span<const std::uint8_t> bin_;
};

// -- writer -------------------------------------------------------------------

class BinBuilder {
 public:
  std::size_t add_view(const void* data, std::size_t size, std::optional<int> target) {
    while (bytes_.size() % 4 != 0) bytes_.push_back(0);
    json view = {{"buffer", 0}, {"byteOffset", bytes_.size()}, {"byteLength", size}};
    if (target) view["target"] = *target;
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + size);
    views_.push_back(std::move(view));
    return views_.size() - 1;
  }

  std::size_t add_accessor(json accessor) {
    accessors_.push_back(std::move(accessor));
    return accessors_.size() - 1;
  }

  std::vector<std::uint8_t>& bytes() { return bytes_; }
  json& views() { return views_; }
  json& accessors() { return accessors_; }

 private:
  std::vector<std::uint8_t> bytes_;
  json views_ = json::array();
  json accessors_ = json::array();
};

constexpr int kTargetArray = 34962;
constexpr int kTargetElementArray = 34963;

json write_mesh(const NamedMesh& named, BinBuilder& bin) {
  const TriangleMesh& mesh = named.mesh;
  json prims = json::array();
  if (mesh.positions.empty()) {
    json m = {{"primitives", prims}};
    if (!named.name.empty()) m["name"] = named.name;
    return m;
  }

  std::vector<float> pos;
  pos.reserve(mesh.positions.size() * 3);
  std::array<float, 3> lo{}, hi{};
  for (std::size_t i = 0; i < mesh.positions.size(); ++i) {
    for (int c = 0; c < 3; ++c) {
      const float f = static_cast<float>(mesh.positions[i][c]);
      pos.push_back(f);
      lo[c] = i == 0 ? f : std::min(lo[c], f);
      hi[c] = i == 0 ? f : std::max(hi[c], f);
    }
  }
  json attrs;
  {
    const auto view = bin.add_view(pos.data(), pos.size() * sizeof(float), kTargetArray);
    attrs["POSITION"] = bin.add_accessor({{"bufferView", view},
                                          {"componentType", kComponentFloat},
                                          {"count", mesh.positions.size()},
                                          {"type", "VEC3"},
                                          {"min", lo},
                                          {"max", hi}});
  }
  if (mesh.has_normals()) {
    std::vector<float> nrm;
    nrm.reserve(mesh.normals.size() * 3);
    for (const Vec3& n : mesh.normals) {
      for (int c = 0; c < 3; ++c) nrm.push_back(static_cast<float>(n[c]));
    }
    const auto view = bin.add_view(nrm.data(), nrm.size() * sizeof(float), kTargetArray);
    attrs["NORMAL"] = bin.add_accessor(
        {{"bufferView", view}, {"componentType", kComponentFloat}, {"count", mesh.normals.size()}, {"type", "VEC3"}});
  }
  if (mesh.has_uvs()) {
    std::vector<float> uv;
    uv.reserve(mesh.uvs.size() * 2);
    for (const Vec2& t : mesh.uvs) {
      uv.push_back(static_cast<float>(t[0]));
      uv.push_back(static_cast<float>(t[1]));
    }
    const auto view = bin.add_view(uv.data(), uv.size() * sizeof(float), kTargetArray);
    attrs["TEXCOORD_0"] = bin.add_accessor(
        {{"bufferView", view}, {"componentType", kComponentFloat}, {"count", mesh.uvs.size()}, {"type", "VEC2"}});
  }

  const bool small = mesh.positions.size() <= 0xFFFF;
  // One primitive per run of equal material slots, all sharing the vertex
  // accessors, so re-parsing restores the original triangle order.
  std::size_t begin = 0;
  while (begin < mesh.indices.size()) {
    std::size_t end = begin + 1;
    if (mesh.has_material_slots()) {
      while (end < mesh.indices.size() && mesh.material_slot[end] == mesh.material_slot[begin]) ++end;
    } else {
      end = mesh.indices.size();
    }
    const std::size_t n = (end - begin) * 3;
    std::size_t view;
    if (small) {
      std::vector<std::uint16_t> idx;
      idx.reserve(n);
      for (std::size_t t = begin; t < end; ++t) {
        for (auto v : mesh.indices[t]) idx.push_back(static_cast<std::uint16_t>(v));
      }
      view = bin.add_view(idx.data(), idx.size() * 2, kTargetElementArray);
    } else {
      std::vector<std::uint32_t> idx;
      idx.reserve(n);
      for (std::size_t t = begin; t < end; ++t) idx.insert(idx.end(), mesh.indices[t].begin(), mesh.indices[t].end());
      view = bin.add_view(idx.data(), idx.size() * 4, kTargetElementArray);
    }
    const auto acc = bin.add_accessor({{"bufferView", view},
                                       {"componentType", small ? kComponentUShort : kComponentUInt},
                                       {"count", n},
                                       {"type", "SCALAR"}});
    json prim = {{"attributes", attrs}, {"indices", acc}, {"mode", kModeTriangles}};
    if (mesh.has_material_slots()) prim["extras"] = {{"slot", mesh.material_slot[begin]}};
    prims.push_back(std::move(prim));
    begin = end;
  }
  // A zero-triangle mesh with vertices keeps its vertices through an empty
  // index accessor.
  if (mesh.indices.empty()) {
    const auto acc = bin.add_accessor({{"componentType", kComponentUShort}, {"count", 0}, {"type", "SCALAR"}});
    prims.push_back({{"attributes", attrs}, {"indices", acc}, {"mode", kModeTriangles}});
  }
  json m = {{"primitives", prims}};
  if (!named.name.empty()) m["name"] = named.name;
  return m;
}

}  // namespace

SceneAsset parse_glb(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12) malformed("header requires 12 bytes, got " + std::to_string(bytes.size()));
  if (read_u32(bytes, 0) != kGlbMagic) malformed("bad magic");
  if (read_u32(bytes, 4) != kGlbVersion) unsupported("container version " + std::to_string(read_u32(bytes, 4)));
  const std::uint32_t total = read_u32(bytes, 8);
  if (total != bytes.size()) malformed("declared length " + std::to_string(total) + " != " + std::to_string(bytes.size()));

  std::span<const std::uint8_t> json_chunk;
  std::span<const std::uint8_t> bin_chunk;
  std::size_t offset = 12;
  int chunk_index = 0;
  while (offset < total) {
    if (total - offset < 8) malformed("truncated chunk header");
    const std::uint32_t len = read_u32(bytes, offset);
    const std::uint32_t type = read_u32(bytes, offset + 4);
    offset += 8;
    if (len > total - offset) malformed("chunk exceeds container");
    const auto data = bytes.subspan(offset, len);
    if (chunk_index == 0) {
      if (type != kChunkJson) malformed("first chunk is not JSON");
      json_chunk = data;
    } else if (chunk_index == 1 && type == kChunkBin) {
      bin_chunk = data;
    }
    offset += len;
    ++chunk_index;
  }
  if (chunk_index == 0) malformed("missing JSON chunk");

  json doc = json::parse(json_chunk.begin(), json_chunk.end(), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) malformed("JSON chunk does not parse");
  try {
    if (!doc.contains("asset") || !doc.at("asset").is_object()) malformed("missing asset object");
    const std::string version = doc.at("asset").value("version", std::string{});
    if (version.empty() || version[0] != '2') unsupported("asset version " + version);
    return GlbReader(doc, bin_chunk).read();
  } catch (const json::exception& e) {
    malformed(std::string("JSON structure: ") + e.what());
  }
}

std::vector<std::uint8_t> write_glb(const SceneAsset& scene) {
  BinBuilder bin;
  json doc;
  doc["asset"] = {{"version", "2.0"}, {"generator", "facet"}};

  json meshes = json::array();
  for (const NamedMesh& m : scene.meshes) meshes.push_back(write_mesh(m, bin));

  json nodes = json::array();
  for (const SceneNode& n : scene.nodes) {
    json j = json::object();
    if (!n.name.empty()) j["name"] = n.name;
    if (n.mesh) j["mesh"] = *n.mesh;
    if (!n.children.empty()) j["children"] = n.children;
    if (n.transform != Mat4::Identity()) {
      json mat = json::array();
      for (int c = 0; c < 4; ++c) {
        for (int r = 0; r < 4; ++r) mat.push_back(n.transform(r, c));
      }
      j["matrix"] = std::move(mat);
    }
    nodes.push_back(std::move(j));
  }

  json images = json::array();
  for (std::size_t i = 0;; ++i) {
    auto it = scene.opaque_blobs.find("images/" + std::to_string(i));
    if (it == scene.opaque_blobs.end()) break;
    json img = it->second.meta;
    if (!it->second.bytes.empty()) {
      img["bufferView"] = bin.add_view(it->second.bytes.data(), it->second.bytes.size(), std::nullopt);
    }
    images.push_back(std::move(img));
  }

  if (!meshes.empty()) doc["meshes"] = std::move(meshes);
  if (!nodes.empty()) doc["nodes"] = std::move(nodes);
  doc["scenes"] = json::array({json{{"nodes", scene.roots}}});
  doc["scene"] = 0;
  for (const char* key : {"materials", "textures", "samplers"}) {
    if (auto it = scene.opaque_blobs.find(key); it != scene.opaque_blobs.end()) doc[key] = it->second.meta;
  }
  if (!images.empty()) doc["images"] = std::move(images);
  if (!bin.accessors().empty()) doc["accessors"] = bin.accessors();
  if (!bin.views().empty()) doc["bufferViews"] = bin.views();

  auto& bin_bytes = bin.bytes();
  while (bin_bytes.size() % 4 != 0) bin_bytes.push_back(0);
  if (!bin_bytes.empty()) doc["buffers"] = json::array({json{{"byteLength", bin_bytes.size()}}});

  std::string text = doc.dump();
  while (text.size() % 4 != 0) text.push_back(' ');

  const std::uint64_t total = 12 + 8 + static_cast<std::uint64_t>(text.size()) +
                              (bin_bytes.empty() ? 0 : 8 + static_cast<std::uint64_t>(bin_bytes.size()));
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::SerializationOverflow, "GLB container would be " + std::to_string(total) + " bytes");
  }

  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(total));
  auto put = [&out](std::uint32_t v) {
    std::uint8_t b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
  };
  put(kGlbMagic);
  put(kGlbVersion);
  put(static_cast<std::uint32_t>(total));
  put(static_cast<std::uint32_t>(text.size()));
  put(kChunkJson);
  out.insert(out.end(), text.begin(), text.end());
  if (!bin_bytes.empty()) {
    put(static_cast<std::uint32_t>(bin_bytes.size()));
    put(kChunkBin);
    out.insert(out.end(), bin_bytes.begin(), bin_bytes.end());
  }
  return out;
}

TriangleMesh flatten_scene(const SceneAsset& scene) {
  TriangleMesh out;
  if (scene.nodes.empty()) {
    for (const NamedMesh& m : scene.meshes) append_mesh(out, m.mesh);
    return out;
  }
  std::function<void(std::size_t, const Mat4&, std::size_t)> visit = [&](std::size_t i, const Mat4& parent,
                                                                          std::size_t depth) {
    if (depth > scene.nodes.size()) return;  // cycles are rejected at parse time
    const SceneNode& node = scene.nodes[i];
    const Mat4 world = parent * node.transform;
    if (node.mesh && *node.mesh < scene.meshes.size()) {
      const TriangleMesh& m = scene.meshes[*node.mesh].mesh;
      if (world == Mat4::Identity()) {
        append_mesh(out, m);
      } else {
        append_mesh(out, transformed(m, world));
      }
    }
    for (std::size_t c : node.children) {
      if (c < scene.nodes.size()) visit(c, world, depth + 1);
    }
  };
  for (std::size_t r : scene.roots) {
    if (r < scene.nodes.size()) visit(r, Mat4::Identity(), 0);
  }
  return out;
}

SceneAsset make_scene(const TriangleMesh& mesh, const std::string& name) {
  SceneAsset scene;
  scene.meshes.push_back({name, mesh});
  SceneNode node;
  node.name = name;
  node.mesh = 0;
  scene.nodes.push_back(node);
  scene.roots.push_back(0);
  return scene;
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::IoFailure, "read error on " + path);
  return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write error on " + path);
}

// -- validation -----------------------------------------------------------------

std::string_view issue_code_name(IssueCode code) noexcept {
  switch (code) {
    case IssueCode::IndexOutOfRange:
      return "IndexOutOfRange";
    case IssueCode::NonFiniteCoordinate:
      return "NonFiniteCoordinate";
    case IssueCode::NonUnitNormal:
      return "NonUnitNormal";
    case IssueCode::NormalCountMismatch:
      return "NormalCountMismatch";
    case IssueCode::UvCountMismatch:
      return "UvCountMismatch";
    case IssueCode::MaterialSlotCountMismatch:
      return "MaterialSlotCountMismatch";
    case IssueCode::DegenerateTriangle:
      return "DegenerateTriangle";
    case IssueCode::UnreferencedVertex:
      return "UnreferencedVertex";
  }
  return "Unknown";
}

ValidationReport validate_mesh(const TriangleMesh& mesh) {
  ValidationReport report;
  const std::size_t nv = mesh.positions.size();
  for (std::size_t i = 0; i < nv; ++i) {
    if (!mesh.positions[i].allFinite()) report.errors.push_back({IssueCode::NonFiniteCoordinate, i});
  }
  if (mesh.has_normals()) {
    if (mesh.normals.size() != nv) {
      report.errors.push_back({IssueCode::NormalCountMismatch, mesh.normals.size()});
    }
    for (std::size_t i = 0; i < mesh.normals.size(); ++i) {
      const double len = mesh.normals[i].norm();
      if (!std::isfinite(len) || std::abs(len - 1.0) > 1e-4) report.errors.push_back({IssueCode::NonUnitNormal, i});
    }
  }
  if (mesh.has_uvs()) {
    if (mesh.uvs.size() != nv) report.errors.push_back({IssueCode::UvCountMismatch, mesh.uvs.size()});
    for (std::size_t i = 0; i < mesh.uvs.size(); ++i) {
      if (!mesh.uvs[i].allFinite()) report.errors.push_back({IssueCode::NonFiniteCoordinate, i});
    }
  }
  if (mesh.has_material_slots() && mesh.material_slot.size() != mesh.indices.size()) {
    report.errors.push_back({IssueCode::MaterialSlotCountMismatch, mesh.material_slot.size()});
  }
  std::vector<bool> referenced(nv, false);
  for (std::size_t t = 0; t < mesh.indices.size(); ++t) {
    const auto& tri = mesh.indices[t];
    bool in_range = true;
    for (auto v : tri) {
      if (v >= nv) {
        in_range = false;
      } else {
        referenced[v] = true;
      }
    }
    if (!in_range) {
      report.errors.push_back({IssueCode::IndexOutOfRange, t});
    } else if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] || triangle_area(mesh, t) == 0.0) {
      report.warnings.push_back({IssueCode::DegenerateTriangle, t});
    }
  }
  for (std::size_t i = 0; i < nv; ++i) {
    if (!referenced[i]) report.warnings.push_back({IssueCode::UnreferencedVertex, i});
  }
  std::sort(report.errors.begin(), report.errors.end());
  std::sort(report.warnings.begin(), report.warnings.end());
  return report;
}

nlohmann::json to_json(const ValidationReport& report) {
  auto list = [](const std::vector<Issue>& issues) {
    json a = json::array();
    for (const Issue& i : issues) a.push_back({{"code", issue_code_name(i.code)}, {"location", i.location}});
    return a;
  };
  return {{"errors", list(report.errors)}, {"warnings", list(report.warnings)}};
}

}  // namespace facet
