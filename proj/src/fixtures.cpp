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

#include "facet/fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"
#include "facet/raster.hpp"
#include "facet/sketch.hpp"

namespace facet {

namespace fs = std::filesystem;

namespace {

std::uint32_t add_vertex(TriangleMesh& m, const Vec3& p) {
  m.positions.push_back(p);
  return static_cast<std::uint32_t>(m.positions.size() - 1);
}

// Two triangles (a, b, c) and (a, c, d), wound so the normal points along `outward`.
void add_quad(TriangleMesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d,
              const Vec3& outward) {
  const Vec3 n = (m.positions[b] - m.positions[a]).cross(m.positions[c] - m.positions[a]);
  if (n.dot(outward) >= 0.0) {
    m.indices.push_back({a, b, c});
    m.indices.push_back({a, c, d});
  } else {
    m.indices.push_back({a, c, b});
    m.indices.push_back({a, d, c});
  }
}

void add_triangle(TriangleMesh& m, std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3& outward) {
  const Vec3 n = (m.positions[b] - m.positions[a]).cross(m.positions[c] - m.positions[a]);
  if (n.dot(outward) >= 0.0) {
    m.indices.push_back({a, b, c});
  } else {
    m.indices.push_back({a, c, b});
  }
}

// Box with the given centre, half sizes and in-plane rotation about z.
void add_box(TriangleMesh& m, const Vec3& center, const Vec3& half, double angle = 0.0) {
  const double c = std::cos(angle), s = std::sin(angle);
  const Vec3 ax(c, s, 0.0), ay(-s, c, 0.0), az(0.0, 0.0, 1.0);
  std::uint32_t v[8];
  for (int k = 0; k < 8; ++k) {
    const double sx = (k & 1) ? 1.0 : -1.0, sy = (k & 2) ? 1.0 : -1.0, sz = (k & 4) ? 1.0 : -1.0;
    v[k] = add_vertex(m, center + sx * half.x() * ax + sy * half.y() * ay + sz * half.z() * az);
  }
  add_quad(m, v[0], v[2], v[6], v[4], -ax);
  add_quad(m, v[1], v[3], v[7], v[5], ax);
  add_quad(m, v[0], v[1], v[5], v[4], -ay);
  add_quad(m, v[2], v[3], v[7], v[6], ay);
  add_quad(m, v[0], v[1], v[3], v[2], -az);
  add_quad(m, v[4], v[5], v[7], v[6], az);
}

void add_axis_box(TriangleMesh& m, double x0, double x1, double y0, double y1, double half_depth) {
  add_box(m, Vec3(0.5 * (x0 + x1), 0.5 * (y0 + y1), 0.0), Vec3(0.5 * (x1 - x0), 0.5 * (y1 - y0), half_depth));
}

// Half-disc slab above the spring line y0, radius r, centred on x = 0.
void add_half_disc(TriangleMesh& m, double y0, double r, double half_depth, int segments) {
  std::vector<std::uint32_t> front, back;
  const std::uint32_t cf = add_vertex(m, Vec3(0.0, y0, half_depth));
  const std::uint32_t cb = add_vertex(m, Vec3(0.0, y0, -half_depth));
  for (int i = 0; i <= segments; ++i) {
    const double t = std::numbers::pi * i / segments;
    const double x = r * std::cos(t), y = y0 + r * std::sin(t);
    front.push_back(add_vertex(m, Vec3(x, y, half_depth)));
    back.push_back(add_vertex(m, Vec3(x, y, -half_depth)));
  }
  for (int i = 0; i < segments; ++i) {
    add_triangle(m, cf, front[i], front[i + 1], Vec3::UnitZ());
    add_triangle(m, cb, back[i], back[i + 1], -Vec3::UnitZ());
    const double t = std::numbers::pi * (i + 0.5) / segments;
    add_quad(m, front[i], front[i + 1], back[i + 1], back[i], Vec3(std::cos(t), std::sin(t), 0.0));
  }
  add_quad(m, cf, front[0], back[0], cb, -Vec3::UnitY());
  add_quad(m, cf, front[segments], back[segments], cb, -Vec3::UnitY());
}

}  // namespace

TriangleMesh make_component(const ComponentSpec& spec) {
  if (!(spec.width > 0.0 && spec.height > 0.0 && spec.frame > 0.0) || spec.panes_x < 1 || spec.panes_y < 1 ||
      2.0 * spec.frame >= std::min(spec.width, spec.height)) {
    fail(ErrorCode::InvalidArgument, "component proportions out of range");
  }
  const bool door = spec.kind == "door";
  const double w = spec.width, f = spec.frame;
  const double total_h = spec.height + (spec.arch ? 0.5 * w : 0.0);
  const double depth = 0.12 * std::max(w, total_h);
  const double hd = 0.5 * depth;
  const double yb = -0.5 * total_h;
  const double yt = yb + spec.height;  // top of the rectangular part
  const double xi0 = -0.5 * w + f, xi1 = 0.5 * w - f;
  const double yi0 = yb + f;
  const double yi1 = spec.arch ? yt - 0.5 * f : yt - f;

  TriangleMesh m;
  add_axis_box(m, -0.5 * w, 0.5 * w, yb, yb + f, hd);
  add_axis_box(m, -0.5 * w, xi0, yi0, spec.arch ? yt : yt - f, hd);
  add_axis_box(m, xi1, 0.5 * w, yi0, spec.arch ? yt : yt - f, hd);
  if (spec.arch) {
    add_axis_box(m, xi0, xi1, yt - 0.5 * f, yt + 0.5 * f, hd);  // spring-line transom
    constexpr int kSegments = 9;
    const double r_mid = 0.5 * w - 0.5 * f;
    const double chord = w * std::sin(0.5 * std::numbers::pi / kSegments);
    for (int i = 0; i < kSegments; ++i) {
      const double t = std::numbers::pi * (i + 0.5) / kSegments;
      add_box(m, Vec3(r_mid * std::cos(t), yt + r_mid * std::sin(t), 0.0), Vec3(0.5 * f, 0.5 * chord, hd), t);
    }
    add_half_disc(m, yt + 0.5 * f, 0.5 * w - f, door ? 0.15 * depth : 0.05 * depth, 16);
  } else {
    add_axis_box(m, -0.5 * w, 0.5 * w, yt - f, yt, hd);
  }

  const double cell_w = (xi1 - xi0) / spec.panes_x;
  const double cell_h = (yi1 - yi0) / spec.panes_y;
  if (door) {
    add_axis_box(m, xi0, xi1, yi0, yi1, 0.15 * depth);  // slab
    const double inset = 0.15 * std::min(cell_w, cell_h);
    for (int i = 0; i < spec.panes_x; ++i) {
      for (int j = 0; j < spec.panes_y; ++j) {
        add_axis_box(m, xi0 + i * cell_w + inset, xi0 + (i + 1) * cell_w - inset, yi0 + j * cell_h + inset,
                     yi0 + (j + 1) * cell_h - inset, 0.3 * depth);
      }
    }
  } else {
    add_axis_box(m, xi0, xi1, yi0, yi1, 0.05 * depth);  // glass
    const double bar = 0.3 * f;
    for (int i = 1; i < spec.panes_x; ++i) {
      const double x = xi0 + i * cell_w;
      add_axis_box(m, x - bar, x + bar, yi0, yi1, hd);
    }
    for (int j = 1; j < spec.panes_y; ++j) {
      const double y = yi0 + j * cell_h;
      add_axis_box(m, xi0, xi1, y - bar, y + bar, hd);
    }
  }
  return m;
}

std::vector<ComponentSpec> component_suite(int count, std::uint64_t seed) {
  constexpr int kLayouts = 48;
  std::vector<ComponentSpec> out;
  for (int i = 0; i < count; ++i) {
    const int layout = i % kLayouts;
    const int tier = i / kLayouts;
    ComponentSpec s;
    s.kind = layout < 24 ? "window" : "door";
    s.arch = (layout % 24) >= 12;
    s.panes_x = (layout % 12) / 3 + 1;
    s.panes_y = layout % 3 + 1;

    // Proportions come from a per-layout draw shifted by half a period per
    // tier, so repeated layouts land far from each other.
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(layout)));
    const double u = std::fmod(uniform_unit(rng) + 0.5 * tier + 0.173 * (tier / 2), 1.0);
    const double v = uniform_unit(rng);
    if (s.kind == "window") {
      s.width = 0.8 + 1.0 * v;
      // Landscape or portrait, never close to square.
      const double aspect = u < 0.5 ? 0.55 + 0.7 * u : 1.1 + 0.7 * (u - 0.5);
      s.height = s.width * aspect;
    } else {
      s.width = 0.8 + 0.3 * v;
      s.height = s.width * (1.9 + 0.7 * u);
    }
    s.frame = std::min(s.width, s.height) * (0.06 + 0.03 * uniform_unit(rng));
    out.push_back(s);
  }
  return out;
}

std::string component_stem(const ComponentSpec& spec, int index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03d", spec.kind.c_str(), index);
  return buf;
}

void write_component_suite(const fs::path& dir, const std::vector<ComponentSpec>& specs) {
  fs::create_directories(dir);
  nlohmann::json meta = nlohmann::json::object();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const std::string stem = component_stem(s, static_cast<int>(i));
    write_file_bytes((dir / (stem + ".glb")).string(), write_glb(make_scene(make_component(s), stem)));
    std::vector<std::string> tags = {std::to_string(s.panes_x) + "x" + std::to_string(s.panes_y)};
    if (s.arch) tags.push_back("arched");
    meta[stem + ".glb"] = {{"category", s.kind}, {"tags", tags}};
  }
  std::ofstream(dir / "metadata.json") << meta.dump(2) << "\n";
}

FixtureHouse make_fixture_house(int variant, int image_size) {
  if (variant < 0) fail(ErrorCode::InvalidArgument, "variant must be non-negative");
  const int cols = 8, rows = 4;
  const double cell_w = 0.6 + 0.05 * variant, cell_h = 0.9;
  const double panel = 0.15 + 0.02 * variant;  // raised panel height
  const double width = cols * cell_w, wall_h = rows * cell_h, depth = 4.0;
  const double x0 = -0.5 * width, zf = 0.5 * depth;
  const int bc = 3, br = 1;  // window block: columns 3-4, rows 1-2

  FixtureHouse house;
  TriangleMesh& m = house.mesh;
  auto in_block_interior = [&](int c, int r) { return c == bc + 1 && r == br + 1; };
  std::map<std::pair<int, int>, std::uint32_t> grid;
  for (int r = 0; r <= rows; ++r) {
    for (int c = 0; c <= cols; ++c) {
      if (in_block_interior(c, r)) continue;
      grid[{c, r}] = add_vertex(m, Vec3(x0 + c * cell_w, r * cell_h, zf));
    }
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c >= bc && c < bc + 2 && r >= br && r < br + 2) continue;
      add_quad(m, grid[{c, r}], grid[{c + 1, r}], grid[{c + 1, r + 1}], grid[{c, r + 1}], Vec3::UnitZ());
    }
  }
  const std::size_t wall_faces = m.face_count();

  // Window: perimeter ring on the wall, flat rim, sloped sides, raised top.
  const int ring_c[8] = {bc, bc + 1, bc + 2, bc + 2, bc + 2, bc + 1, bc, bc};
  const int ring_r[8] = {br, br, br, br + 1, br + 2, br + 2, br + 2, br + 1};
  const Vec3 center(x0 + (bc + 1) * cell_w, (br + 1) * cell_h, zf);
  std::uint32_t r0[8], r1[8], r2[8];
  for (int i = 0; i < 8; ++i) {
    r0[i] = grid[{ring_c[i], ring_r[i]}];
    const Vec3 p = m.positions[r0[i]];
    r1[i] = add_vertex(m, center + 0.8 * (p - center));
    r2[i] = add_vertex(m, center + 0.5 * (p - center) + Vec3(0.0, 0.0, panel));
  }
  const std::uint32_t apex = add_vertex(m, center + Vec3(0.0, 0.0, panel));
  for (int i = 0; i < 8; ++i) {
    const int j = (i + 1) % 8;
    add_quad(m, r0[i], r0[j], r1[j], r1[i], Vec3::UnitZ());
    add_quad(m, r1[i], r1[j], r2[j], r2[i], Vec3::UnitZ());
    add_triangle(m, apex, r2[i], r2[j], Vec3::UnitZ());
  }
  for (std::size_t f = wall_faces; f < m.face_count(); ++f) house.window_faces.push_back(static_cast<std::uint32_t>(f));
  const std::size_t window_end = m.face_count();

  // Remaining shell: back and side walls, gable roof.
  const double xa = x0, xb = x0 + width, zb = -zf, ridge = wall_h + 1.5;
  auto v = [&](double x, double y, double z) { return add_vertex(m, Vec3(x, y, z)); };
  add_quad(m, v(xa, 0, zb), v(xb, 0, zb), v(xb, wall_h, zb), v(xa, wall_h, zb), -Vec3::UnitZ());
  add_quad(m, v(xa, 0, zb), v(xa, 0, zf), v(xa, wall_h, zf), v(xa, wall_h, zb), -Vec3::UnitX());
  add_quad(m, v(xb, 0, zb), v(xb, 0, zf), v(xb, wall_h, zf), v(xb, wall_h, zb), Vec3::UnitX());
  add_quad(m, v(xa, wall_h, zf), v(xb, wall_h, zf), v(xb, ridge, 0), v(xa, ridge, 0), Vec3(0, 1, 1));
  add_quad(m, v(xa, wall_h, zb), v(xb, wall_h, zb), v(xb, ridge, 0), v(xa, ridge, 0), Vec3(0, 1, -1));
  add_triangle(m, v(xa, wall_h, zf), v(xa, wall_h, zb), v(xa, ridge, 0), -Vec3::UnitX());
  add_triangle(m, v(xb, wall_h, zf), v(xb, wall_h, zb), v(xb, ridge, 0), Vec3::UnitX());

  m.material_slot.assign(m.face_count(), 0);
  for (std::size_t f = wall_faces; f < window_end; ++f) m.material_slot[f] = 1;
  for (std::size_t f = window_end; f < m.face_count(); ++f) m.material_slot[f] = 2;

  house.window_center = center + Vec3(0.0, 0.0, 0.5 * panel);
  house.window_half_extents = Vec3(cell_h, cell_w, 0.5 * panel);
  if (cell_w > cell_h) std::swap(house.window_half_extents[0], house.window_half_extents[1]);
  house.hole_perimeter_edges = 8;

  house.camera = default_front_camera(m, image_size, image_size);
  const RasterResult raster = rasterize(m, house.camera);
  ComponentMask& mask = house.window_mask;
  mask.width = image_size;
  mask.height = image_size;
  mask.label = mask.prompt = "window";
  mask.bits.assign(static_cast<std::size_t>(image_size) * image_size, 0);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    const std::uint32_t f = raster.face_ids[i];
    mask.bits[i] = f != kNoFace && f >= wall_faces && f < window_end;
  }
  return house;
}

void write_fixture_house(const fs::path& dir, const FixtureHouse& house) {
  fs::create_directories(dir / "masks");
  write_file_bytes((dir / "house.glb").string(), write_glb(make_scene(house.mesh, "house")));
  std::ofstream(dir / "camera.json") << to_json(house.camera).dump(2) << "\n";
  write_image((dir / "masks" / "window.png").string(), mask_to_image(house.window_mask));
  std::ofstream(dir / "masks" / "masks.json") << nlohmann::json{{"window", "window.png"}}.dump(2) << "\n";
  const nlohmann::json truth = {
      {"window_faces", house.window_faces},
      {"window_center", {house.window_center.x(), house.window_center.y(), house.window_center.z()}},
      {"window_half_extents",
       {house.window_half_extents.x(), house.window_half_extents.y(), house.window_half_extents.z()}},
      {"hole_perimeter_edges", house.hole_perimeter_edges}};
  std::ofstream(dir / "truth.json") << truth.dump(2) << "\n";
}

}  // namespace facet
