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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <sys/resource.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "facet/asset_io.hpp"
#include "facet/catalog.hpp"
#include "facet/error.hpp"
#include "facet/fixtures.hpp"
#include "facet/image.hpp"
#include "facet/obb.hpp"
#include "facet/pipeline.hpp"
#include "facet/raster.hpp"
#include "facet/replacement.hpp"
#include "facet/retrieval.hpp"
#include "facet/service.hpp"
#include "facet/simd.hpp"
#include "support.hpp"

using namespace facet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double peak_rss_mb() {
  rusage u{};
  getrusage(RUSAGE_SELF, &u);
  return u.ru_maxrss / 1024.0;  // kilobytes on Linux
}

// ---------------------------------------------------------------------------

Outcome glb_round_trip_and_fuzz() {
  const auto t0 = Clock::now();
  const auto fixtures = test::glb_fixtures();
  std::size_t equal = 0;
  for (const auto& bytes : fixtures) {
    const SceneAsset a = parse_glb(bytes);
    const SceneAsset b = parse_glb(write_glb(a));
    equal += (a == b && flatten_scene(a) == flatten_scene(b));
  }

  std::mt19937_64 rng(31337);
  std::size_t parsed = 0, malformed = 0, unsupported = 0, other = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    auto bytes = fixtures[rng() % fixtures.size()];
    const int flips = 1 + static_cast<int>(rng() % 8);
    for (int k = 0; k < flips; ++k) {
      switch (rng() % 3) {
        case 0:
          bytes[rng() % bytes.size()] = static_cast<std::uint8_t>(rng());
          break;
        case 1:
          if (bytes.size() > 1) bytes.resize(bytes.size() - 1 - rng() % std::min<std::size_t>(bytes.size() - 1, 64));
          break;
        default:
          bytes.insert(bytes.begin() + static_cast<long>(rng() % bytes.size()), static_cast<std::uint8_t>(rng()));
      }
    }
    try {
      flatten_scene(parse_glb(bytes));
      ++parsed;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::MalformedContainer) {
        ++malformed;
      } else if (e.code() == ErrorCode::UnsupportedFeature) {
        ++unsupported;
      } else {
        ++other;
      }
    } catch (...) {
      ++other;
    }
  }
  const double t = seconds_since(t0);
  return {equal == fixtures.size() && other == 0 && t < 30.0,
          fmt("%zu/%zu fixtures identical; fuzz 10000: %zu parsed, %zu malformed, %zu unsupported, %zu other; %.1f s",
              equal, fixtures.size(), parsed, malformed, unsupported, other, t)};
}

Outcome raster_vs_raycast() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2);
  std::size_t compared = 0, mismatched = 0;
  double worst = 0.0;
  for (int m = 0; m < 100; ++m) {
    const TriangleMesh mesh = test::random_mesh(rng, 1 + static_cast<int>(rng() % 50));
    const Camera cam = orbit_camera(Vec3::Zero(), 4.0 + (rng() % 100) / 50.0, double(rng() % 360),
                                    double(rng() % 60) - 30.0, 128, 128, kDefaultFovDeg);
    const DepthBuffer depth = render_depth(mesh, cam);
    for (int v = 0; v < 128; ++v) {
      for (int u = 0; u < 128; ++u) {
        const double px = u + 0.5, py = v + 0.5;
        if (test::distance_to_projected_edges(mesh, cam, px, py) < 0.5) continue;
        const auto hit = test::raycast_depth(mesh, cam, px, py);
        ++compared;
        if (!hit) {
          mismatched += depth.has_depth(u, v);
        } else if (!depth.has_depth(u, v)) {
          ++mismatched;
        } else {
          const double rel = std::abs(depth.at(u, v) - *hit) / *hit;
          worst = std::max(worst, rel);
          mismatched += rel > 1e-4;
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {mismatched == 0 && t < 60.0,
          fmt("%zu pixels compared, %zu disagree, worst relative depth error %.2e; %.1f s", compared, mismatched,
              worst, t)};
}

Outcome projection_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::size_t done = 0, failed = 0, attempts = 0, failed_below_60 = 0;
  double worst = 0.0, min_failed_incidence = 90.0;
  while (done < 1000 && attempts < 100000) {
    ++attempts;
    const TriangleMesh mesh =
        test::box_mesh(Vec3(unit(rng) - 0.5, unit(rng) - 0.5, unit(rng) - 0.5),
                       Vec3(0.2 + unit(rng), 0.2 + unit(rng), 0.2 + unit(rng)), test::random_rotation(rng));
    const Camera cam = orbit_camera(Vec3::Zero(), 5.0, 360.0 * unit(rng), 60.0 * unit(rng) - 30.0, 256, 256,
                                    kDefaultFovDeg);
    const RasterResult raster = rasterize(mesh, cam);
    // A random point on a random triangle, kept only if that triangle is
    // what the camera sees there.
    const std::size_t f = rng() % mesh.face_count();
    double a = unit(rng), b = unit(rng);
    if (a + b > 1.0) a = 1.0 - a, b = 1.0 - b;
    const auto& t = mesh.indices[f];
    const Vec3 p = mesh.positions[t[0]] + a * (mesh.positions[t[1]] - mesh.positions[t[0]]) +
                   b * (mesh.positions[t[2]] - mesh.positions[t[0]]);
    const auto proj = project(cam, p);
    if (!proj) continue;
    const int u = static_cast<int>(std::floor(proj->first.x()));
    const int v = static_cast<int>(std::floor(proj->first.y()));
    if (u < 0 || v < 0 || u >= cam.width || v >= cam.height || raster.face_at(u, v) != f) continue;
    const Pixel px{u, v};
    const Vec3 back = back_project(raster.depth, std::span(&px, 1), cam).points[0];
    const double rel = (back - p).norm() / proj->second;
    worst = std::max(worst, rel * cam.fx);
    if (rel >= 2.0 / cam.fx) {
      // Angle between the view ray and the face normal. A pixel's footprint
      // on the surface grows as 1/cos of this angle.
      const Vec3 n = (mesh.positions[t[1]] - mesh.positions[t[0]]).cross(mesh.positions[t[2]] - mesh.positions[t[0]]);
      const Vec3 ray = p - cam.center();
      const double incidence = std::acos(std::abs(n.normalized().dot(ray.normalized()))) * 180.0 / std::numbers::pi;
      min_failed_incidence = std::min(min_failed_incidence, incidence);
      failed_below_60 += incidence < 60.0;
      ++failed;
    }
    ++done;
  }
  const double t = seconds_since(t0);
  return {done == 1000 && failed == 0 && t < 10.0,
          fmt("%zu visible points, %zu over 2/fx, worst error %.3f/fx (relative to depth); failures at incidence "
              ">= %.1f deg, %zu below 60 deg; %.2f s",
              done, failed, worst, min_failed_incidence, failed_below_60, t)};
}

// 10k points on the surface of a box. Random mode draws area-weighted
// uniform samples. Grid mode places the same budget on a regular lattice per
// face, which removes most of the sampling noise from the covariance.
std::vector<Vec3> sample_box_surface(const Vec3& half, const Mat3& rot, const Vec3& center, bool grid,
                                     std::mt19937_64& rng) {
  constexpr int kPoints = 10000;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Vec3 full = 2 * half;
  const std::array<double, 3> face_area = {full.y() * full.z(), full.x() * full.z(), full.x() * full.y()};
  const double total = 2 * (face_area[0] + face_area[1] + face_area[2]);
  std::vector<Vec3> pts;
  pts.reserve(kPoints + 64);
  if (!grid) {
    for (int i = 0; i < kPoints; ++i) {
      double r = unit(rng) * total;
      int axis = 0;
      while (axis < 2 && r > 2 * face_area[axis]) r -= 2 * face_area[axis++];
      Vec3 local(half.x() * (2 * unit(rng) - 1), half.y() * (2 * unit(rng) - 1), half.z() * (2 * unit(rng) - 1));
      local[axis] = (rng() & 1) ? half[axis] : -half[axis];
      pts.push_back(center + rot * local);
    }
    return pts;
  }
  for (int axis = 0; axis < 3; ++axis) {
    const int a = (axis + 1) % 3, b = (axis + 2) % 3;
    const double budget = kPoints * face_area[axis] / total;
    const int na = std::max(1, static_cast<int>(std::lround(std::sqrt(budget * full[a] / full[b]))));
    const int nb = std::max(1, static_cast<int>(std::lround(budget / na)));
    for (double side : {-1.0, 1.0})
      for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
          Vec3 local;
          local[axis] = side * half[axis];
          local[a] = half[a] * (2 * (i + 0.5) / na - 1);
          local[b] = half[b] * (2 * (j + 0.5) / nb - 1);
          pts.push_back(center + rot * local);
        }
  }
  return pts;
}

struct ObbRecoveryStats {
  int failed = 0;
  double worst_angle = 0.0, worst_extent = 0.0;
};

ObbRecoveryStats recover_boxes(bool grid) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> extent(0.1, 10.0), unit(0.0, 1.0);
  ObbRecoveryStats stats;
  for (int box = 0; box < 100; ++box) {
    const Vec3 full(extent(rng), extent(rng), extent(rng));
    const Vec3 half = 0.5 * full;
    const Mat3 rot = test::random_rotation(rng);
    const Vec3 center(10 * unit(rng) - 5, 10 * unit(rng) - 5, 10 * unit(rng) - 5);
    const auto pts = sample_box_surface(half, rot, center, grid, rng);
    const OrientedBoundingBox obb = fit_obb(std::span<const Vec3>(pts));
    bool ok = true;
    std::set<int> used;
    for (int i = 0; i < 3; ++i) {
      int best = -1;
      double best_dot = -1;
      for (int j = 0; j < 3; ++j) {
        const double d = std::abs(obb.axis(j).dot(rot.col(i)));
        if (d > best_dot) best_dot = d, best = j;
      }
      used.insert(best);
      const double angle = std::acos(std::min(1.0, best_dot));
      const double ext_err = std::abs(obb.half_extents[best] - half[i]) / half[i];
      stats.worst_angle = std::max(stats.worst_angle, angle);
      stats.worst_extent = std::max(stats.worst_extent, ext_err);
      ok = ok && angle <= 1e-2 && ext_err <= 0.01;
    }
    stats.failed += !(ok && used.size() == 3);
  }
  return stats;
}

Outcome obb_recovery() {
  const auto t0 = Clock::now();
  const ObbRecoveryStats random = recover_boxes(false);
  const double t = seconds_since(t0);
  // Diagnostic only: the same boxes with lattice samples.
  const ObbRecoveryStats lattice = recover_boxes(true);
  return {random.failed == 0 && t < 30.0,
          fmt("%d/100 boxes off; worst axis error %.2e rad, worst extent error %.2f%%; %.1f s "
              "(lattice sampling of the same boxes: %d/100 off, worst axis %.2e rad, extent %.2f%%)",
              random.failed, random.worst_angle, 100 * random.worst_extent, t, lattice.failed, lattice.worst_angle,
              100 * lattice.worst_extent)};
}

Outcome alignment_exactness() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> extent(0.1, 10.0), unit(0.0, 1.0);
  int failed = 0;
  double worst = 0.0;
  auto random_box = [&] {
    OrientedBoundingBox b;
    b.center = Vec3(20 * unit(rng) - 10, 20 * unit(rng) - 10, 20 * unit(rng) - 10);
    b.axes = test::random_rotation(rng);
    Vec3 h(extent(rng), extent(rng), extent(rng));
    std::sort(h.data(), h.data() + 3, std::greater<>());
    b.half_extents = h;
    return b;
  };
  for (int pair = 0; pair < 100; ++pair) {
    const OrientedBoundingBox src = random_box(), dst = random_box();
    const AffinePlacement m = compute_alignment(src, dst, ScalingMode::PerAxis);
    const auto corners = obb_vertices(src);
    const auto target = obb_vertices(dst);
    // Each mapped corner must coincide with a distinct target corner.
    std::vector<bool> taken(8, false);
    double pair_worst = 0.0;
    bool ok = true;
    for (const auto& c : corners) {
      const Vec3 q = m.apply(c);
      int best = -1;
      double best_d = 1e300;
      for (int k = 0; k < 8; ++k) {
        if (taken[k]) continue;
        const double d = (q - target[k]).norm();
        if (d < best_d) best_d = d, best = k;
      }
      taken[best] = true;
      pair_worst = std::max(pair_worst, best_d);
      ok = ok && best_d <= 1e-9;
    }
    worst = std::max(worst, pair_worst);
    failed += !ok;
  }
  return {failed == 0, fmt("%d/100 pairs off; worst corner distance %.2e m", failed, worst)};
}

// Built once and reused by the criteria that need a catalog.
struct Suite {
  test::TempDir dir{"acceptance"};
  CatalogManifest manifest;
  RetrievalIndex index;
  std::vector<TriangleMesh> meshes;
  double build_seconds = 0.0;
};

Outcome self_retrieval(Suite& suite) {
  write_component_suite(suite.dir / "components", component_suite(60, 7));
  const auto t0 = Clock::now();
  suite.manifest = ingest_directory(suite.dir / "components", default_category_rule(suite.dir / "components"),
                                    &suite.meshes);
  suite.index = build_catalog_index(suite.manifest, RetrievalParams{}, &suite.meshes).index;
  suite.build_seconds = seconds_since(t0);
  save_catalog(suite.manifest, suite.index, suite.dir / "catalog.bin");

  const auto report = run_eval_self_retrieval(suite.manifest, suite.index, 42, 0.2, &suite.meshes);

  std::vector<SketchImage> sketches;
  for (const auto& m : suite.meshes) sketches.push_back(render_front_view(m, suite.index.params));
  const auto t1 = Clock::now();
  for (int q = 0; q < 1000; ++q) query(sketches[q % sketches.size()], suite.index, 5);
  const double query_seconds = seconds_since(t1);

  const auto& o = report.overall;
  return {o.queries >= 50 && o.top1 >= 0.95 && o.top5_under_dropout >= 0.80 && suite.build_seconds < 120.0 &&
              query_seconds < 10.0,
          fmt("%zu components, top-1 %.1f%%, top-5 %.1f%%, top-5 at 20%% dropout %.1f%%; build %.1f s, 1000 "
              "queries %.2f s",
              o.queries, 100 * o.top1, 100 * o.top5, 100 * o.top5_under_dropout, suite.build_seconds, query_seconds)};
}

PipelineInputs house_inputs(const Suite& suite, const fs::path& house_dir, const std::string& out) {
  PipelineInputs in;
  in.model = house_dir / "house.glb";
  in.masks = house_dir / "masks";
  in.camera = house_dir / "camera.json";
  in.sketch = suite.dir / "sketch.png";
  in.catalog = suite.dir / "catalog.bin";
  in.output = suite.dir / out;
  return in;
}

Outcome replacement_validity(const Suite& suite) {
  const FixtureHouse house = make_fixture_house(0, 512);
  write_fixture_house(suite.dir / "house", house);
  write_image((suite.dir / "sketch.png").string(),
              sketch_to_image(render_front_view(suite.meshes[0], suite.index.params)));
  const PipelineResult r = run_pipeline(house_inputs(suite, suite.dir / "house", "replaced.glb"));

  const TriangleMesh out = flatten_scene(parse_glb(read_file_bytes((suite.dir / "replaced.glb").string())));
  const bool faces_ok = r.plan.faces_to_remove == house.window_faces;
  const auto validation = validate_mesh(out);
  const bool count_ok = out.face_count() == house.mesh.face_count() - r.report.removed_face_count +
                                                r.report.added_face_count &&
                        r.report.removed_face_count == house.window_faces.size();

  // Re-fit the box of the inserted part (the trailing faces).
  std::set<std::uint32_t> ids;
  for (std::size_t f = out.face_count() - r.report.added_face_count; f < out.face_count(); ++f)
    for (auto i : out.indices[f]) ids.insert(i);
  std::vector<Vec3> placed;
  for (auto i : ids) placed.push_back(out.positions[i]);
  const OrientedBoundingBox refit = fit_obb(std::span<const Vec3>(placed));
  const OrientedBoundingBox& target = r.plan.target_obb;
  double box_err = (refit.center - target.center).norm();
  box_err = std::max(box_err, (refit.half_extents - target.half_extents).cwiseAbs().maxCoeff());
  for (int i = 0; i < 3; ++i) {
    const Vec3 a = refit.axis(i), b = target.axis(i);
    box_err = std::max(box_err, std::min((a - b).norm(), (a + b).norm()));
  }
  const bool boundary_ok = r.report.open_boundary_edge_count == house.hole_perimeter_edges;

  return {faces_ok && validation.ok() && box_err <= 1e-6 && count_ok && boundary_ok,
          fmt("removed %zu faces (window has %zu, ids %s); %zu validation errors; re-fit box error %.2e; "
              "faces %zu = %zu - %zu + %zu; open boundary %zu (expected %zu)",
              r.report.removed_face_count, house.window_faces.size(), faces_ok ? "match" : "differ",
              validation.errors.size(), box_err, out.face_count(), house.mesh.face_count(),
              r.report.removed_face_count, r.report.added_face_count, r.report.open_boundary_edge_count,
              house.hole_perimeter_edges)};
}

Outcome pipeline_determinism(const Suite& suite) {
  double worst = 0.0;
  std::vector<std::vector<std::uint8_t>> outputs;
  for (const char* name : {"run_a.glb", "run_b.glb"}) {
    const auto t0 = Clock::now();
    run_pipeline(house_inputs(suite, suite.dir / "house", name));
    worst = std::max(worst, seconds_since(t0));
    outputs.push_back(read_file_bytes((suite.dir / name).string()));
  }
  const bool same = outputs[0] == outputs[1];
  return {same && worst < 10.0, fmt("outputs %s (%zu bytes); slowest run %.2f s at 512x512",
                                    same ? "byte-identical" : "DIFFER", outputs[0].size(), worst)};
}

Outcome service_isolation(const Suite& suite) {
  constexpr int kSessions = 8;
  std::vector<std::vector<std::uint8_t>> models;
  std::vector<MaskProviderConfig> providers;
  for (int i = 0; i < kSessions; ++i) {
    const fs::path d = suite.dir / ("house_v" + std::to_string(i));
    write_fixture_house(d, make_fixture_house(i, 512));
    models.push_back(read_file_bytes((d / "house.glb").string()));
    providers.push_back(mask_directory_provider(d / "masks"));
  }
  ServiceConfig cfg;
  cfg.catalog_path = suite.dir / "catalog.bin";
  cfg.render_size = 512;
  cfg.max_sessions = 2 * kSessions;
  PipelineService service(cfg);

  // Each step runs alone, so the threads interleave between steps.
  auto steps = [&](const std::string& id, int i) -> std::vector<std::function<void()>> {
    const auto component = static_cast<std::uint32_t>((i * 7) % suite.manifest.records.size());
    return {[&, id, i] { service.upload_model(id, models[i]); },
            [&, id, i] { service.segment(id, "window", providers[i]); },
            [&, id, component] {
              service.commit(id, service.preview(id, 0, component, ScalingMode::PerAxis).plan);
            },
            [&, id, i] { service.segment(id, "window", providers[i]); },
            [&, id, i] {
              const auto c = static_cast<std::uint32_t>((i * 3 + 1) % suite.manifest.records.size());
              service.commit(id, service.preview(id, 0, c, ScalingMode::Uniform).plan);
            }};
  };

  std::vector<std::vector<std::uint8_t>> baseline(kSessions);
  for (int i = 0; i < kSessions; ++i) {
    const auto id = service.create_session();
    for (auto& step : steps(id, i)) step();
    baseline[i] = service.export_glb(id);
    service.delete_session(id);
  }

  std::vector<std::string> ids;
  for (int i = 0; i < kSessions; ++i) ids.push_back(service.create_session());
  std::atomic<int> errors{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < kSessions; ++i) {
    threads.emplace_back([&, i] {
      try {
        for (auto& step : steps(ids[i], i)) {
          step();
          std::this_thread::yield();
        }
      } catch (const std::exception& e) {
        std::cerr << "session " << i << ": " << e.what() << "\n";
        ++errors;
      }
    });
  }
  for (auto& t : threads) t.join();
  int matching = 0;
  for (int i = 0; i < kSessions; ++i) matching += service.export_glb(ids[i]) == baseline[i];
  std::set<std::vector<std::uint8_t>> distinct(baseline.begin(), baseline.end());
  return {errors == 0 && matching == kSessions,
          fmt("%d/%d concurrent exports match their baselines (%zu distinct models), %d errors", matching, kSessions,
              distinct.size(), errors.load())};
}

Outcome catalog_scale() {
  test::TempDir dir("scale");
  write_component_suite(dir / "components", component_suite(400, 11));
  const double rss_before = peak_rss_mb();
  const auto t0 = Clock::now();
  auto manifest = ingest_directory(dir / "components", default_category_rule(dir / "components"));
  const auto build = build_catalog_index(manifest, RetrievalParams{});
  save_catalog(manifest, build.index, dir / "catalog.bin");
  const double t = seconds_since(t0);
  const double rss = peak_rss_mb();
  return {manifest.records.size() == 400 && build.index.view_count() == 2000 && t < 600.0 && rss < 2048.0,
          fmt("%zu components, %zu views indexed in %.1f s; peak RSS %.0f MB (%.0f MB before)",
              manifest.records.size(), build.index.view_count(), t, rss, rss_before)};
}

}  // namespace

int main() {
  std::cout << "kernels: " << simd::active().name << std::endl;
  int failures = 0;
  auto run = [&](int n, const char* name, auto&& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << n << "] " << name << ": " << o.detail << std::endl;
  };

  Suite suite;
  run(1, "GLB round trip and fuzzing", glb_round_trip_and_fuzz);
  run(2, "rasterizer vs ray caster", raster_vs_raycast);
  run(3, "projection round trip", projection_round_trip);
  run(4, "OBB recovery", obb_recovery);
  run(5, "alignment exactness", alignment_exactness);
  run(6, "self-retrieval", [&] { return self_retrieval(suite); });
  run(7, "replacement validity", [&] { return replacement_validity(suite); });
  run(8, "pipeline determinism", [&] { return pipeline_determinism(suite); });
  run(9, "service isolation", [&] { return service_isolation(suite); });
  run(10, "catalog scale", catalog_scale);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
