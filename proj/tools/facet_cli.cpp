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

// Command-line front end. Each subcommand wraps one library entry point;
// `facet --help` lists them.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "facet/asset_io.hpp"
#include "facet/camera.hpp"
#include "facet/catalog.hpp"
#include "facet/error.hpp"
#include "facet/fixtures.hpp"
#include "facet/obb.hpp"
#include "facet/pipeline.hpp"
#include "facet/raster.hpp"
#include "facet/retrieval.hpp"
#include "facet/segmentation.hpp"
#include "facet/service.hpp"
#include "facet/simd.hpp"
#include "facet/sketch.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace facet;

namespace {

struct Globals {
  bool json_output = false;
  std::optional<std::uint64_t> seed;
  std::string config_path;
};

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoFailure, "cannot read " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::InvalidArgument, path.string() + " is not valid JSON");
  return j;
}

std::optional<fs::path> config_file(const Globals& g) {
  if (!g.config_path.empty()) return fs::path(g.config_path);
  if (const char* env = std::getenv("FACET_CONFIG"); env && *env) return fs::path(env);
  return std::nullopt;
}

/// Retrieval parameters: defaults, then the config's "retrieval" section,
/// then --seed.
RetrievalParams retrieval_params(const Globals& g) {
  RetrievalParams p;
  if (auto path = config_file(g)) {
    const json j = read_json_file(*path);
    if (j.contains("retrieval")) p = retrieval_params_from_json(j.at("retrieval"));
  }
  if (g.seed) p.seed = *g.seed;
  return p;
}

TriangleMesh load_mesh(const std::string& path) { return flatten_scene(parse_glb(read_file_bytes(path))); }

Camera camera_for(const TriangleMesh& mesh, const std::string& camera_path, double yaw, double elev, int size) {
  if (!camera_path.empty()) return camera_from_json(read_json_file(camera_path));
  if (yaw == 0.0 && elev == 0.0) return default_front_camera(mesh, size, size);
  const Sphere s = bounding_sphere(mesh);
  return orbit_camera(s.center, 2.5 * s.radius, yaw, elev, size, size, kDefaultFovDeg);
}

void write_depth(const DepthBuffer& depth, const Camera& camera, const fs::path& out) {
  write_file_bytes(out.string(), depth_to_bytes(depth));
  json header = depth_header(depth);
  header["camera"] = to_json(camera);
  fs::path header_path = out;
  header_path.replace_extension(".json");
  std::ofstream(header_path) << header.dump(2) << "\n";
}

/// Prints `result` as JSON or as indented text.
void emit(const Globals& g, const json& result, const std::string& text = {}) {
  if (g.json_output || text.empty()) {
    std::cout << result.dump(g.json_output ? -1 : 2) << std::endl;
  } else {
    std::cout << text << std::flush;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"facet: sketch-driven component replacement for building models"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_flag("--json", g.json_output, "Machine-readable JSON on stdout");
  auto* seed_opt = app.add_option("--seed", seed_value, "Seed for every random choice");
  app.add_option("--config", g.config_path, "JSON config file (default: $FACET_CONFIG)");

  // catalog build
  auto* catalog = app.add_subcommand("catalog", "Component catalogs")->require_subcommand(1);
  auto* catalog_build = catalog->add_subcommand("build", "Ingest a directory of GLB components and index it");
  std::string cat_dir, cat_out;
  catalog_build->add_option("directory", cat_dir, "Component directory")->required()->check(CLI::ExistingDirectory);
  catalog_build->add_option("-o,--output", cat_out, "Catalog archive to write")->required();

  // index build
  auto* index = app.add_subcommand("index", "Retrieval indexes")->require_subcommand(1);
  auto* index_build = index->add_subcommand("build", "Rebuild the index of an existing catalog");
  std::string idx_catalog, idx_out, idx_standalone;
  index_build->add_option("catalog", idx_catalog, "Catalog archive")->required()->check(CLI::ExistingFile);
  index_build->add_option("-o,--output", idx_out, "Catalog archive to write (default: in place)");
  index_build->add_option("--index-out", idx_standalone, "Also write the bare index (SKRIDX1) here");

  // render depth|lineart|turntable
  auto* render = app.add_subcommand("render", "Render a model")->require_subcommand(1);
  std::string r_model, r_out, r_camera;
  double r_yaw = 0.0, r_elev = 0.0;
  int r_size = 512, r_views = 8;
  double r_depth_ratio = 0.05, r_normal_deg = 30.0;
  auto add_view_options = [&](CLI::App* sub) {
    sub->add_option("model", r_model, "GLB model")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--output", r_out, "Output path")->required();
    sub->add_option("--size", r_size, "Image width and height")->check(CLI::Range(1, 8192));
    sub->add_option("--elev", r_elev, "Elevation in degrees");
  };
  auto* render_depth_cmd = render->add_subcommand("depth", "Depth buffer as float32 .bin plus .json header");
  auto* render_lineart = render->add_subcommand("lineart", "Line drawing as PNG");
  auto* turntable_cmd = render->add_subcommand("turntable", "Depth buffers from n yaws around the model");
  for (auto* sub : {render_depth_cmd, render_lineart}) {
    add_view_options(sub);
    sub->add_option("--yaw", r_yaw, "Orbit yaw in degrees (0 = front)");
    sub->add_option("--camera", r_camera, "Camera JSON overriding yaw/elev/size")->check(CLI::ExistingFile);
  }
  render_lineart->add_option("--depth-ratio", r_depth_ratio, "Depth jump threshold as a fraction of the radius");
  render_lineart->add_option("--normal-deg", r_normal_deg, "Crease threshold in degrees");
  add_view_options(turntable_cmd);
  turntable_cmd->add_option("-n,--views", r_views, "Number of views")->check(CLI::Range(1, 3600));

  // fit-obb
  auto* fit = app.add_subcommand("fit-obb", "Fit an oriented box to a masked region (or the whole model)");
  std::string f_model, f_mask, f_camera;
  double f_lo = 2.0, f_hi = 98.0;
  int f_size = 512;
  fit->add_option("model", f_model, "GLB model")->required()->check(CLI::ExistingFile);
  fit->add_option("--mask", f_mask, "Mask image; omitted: fit all vertices")->check(CLI::ExistingFile);
  fit->add_option("--camera", f_camera, "Camera JSON (default: front camera)")->check(CLI::ExistingFile);
  fit->add_option("--size", f_size, "Front camera resolution when no camera is given");
  fit->add_option("--band-lo", f_lo, "Lower depth percentile")->check(CLI::Range(0.0, 100.0));
  fit->add_option("--band-hi", f_hi, "Upper depth percentile")->check(CLI::Range(0.0, 100.0));

  // retrieve
  auto* retrieve = app.add_subcommand("retrieve", "Rank catalog components against a sketch");
  std::string q_catalog, q_sketch, q_category;
  int q_top_k = 5;
  retrieve->add_option("catalog", q_catalog, "Catalog archive")->required()->check(CLI::ExistingFile);
  retrieve->add_option("sketch", q_sketch, "Sketch image")->required()->check(CLI::ExistingFile);
  retrieve->add_option("-k,--top-k", q_top_k, "Number of results")->check(CLI::PositiveNumber);
  retrieve->add_option("--category", q_category, "Only this category");

  // serve
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  int s_port = -1;
  std::string s_catalog;
  serve->add_option("--port", s_port, "Listening port (0 picks a free one)");
  serve->add_option("--catalog", s_catalog, "Catalog archive");

  // eval self-retrieval
  auto* eval = app.add_subcommand("eval", "Evaluations")->require_subcommand(1);
  auto* eval_self = eval->add_subcommand("self-retrieval", "Query every component with its own front view");
  std::string e_catalog;
  double e_dropout = 0.2;
  eval_self->add_option("catalog", e_catalog, "Catalog archive")->required()->check(CLI::ExistingFile);
  eval_self->add_option("--dropout", e_dropout, "Fraction of stroke pixels removed")->check(CLI::Range(0.0, 1.0));

  // pipeline run
  auto* pipeline = app.add_subcommand("pipeline", "End-to-end replacement")->require_subcommand(1);
  auto* pipeline_run = pipeline->add_subcommand("run", "Model + masks + sketch + catalog -> edited model");
  PipelineInputs p_in;
  std::string p_camera, p_mode = "per_axis", p_category;
  pipeline_run->add_option("--model", p_in.model, "Building GLB")->required()->check(CLI::ExistingFile);
  pipeline_run->add_option("--masks", p_in.masks, "Mask directory with masks.json")->required()->check(
      CLI::ExistingDirectory);
  pipeline_run->add_option("--sketch", p_in.sketch, "Sketch image")->required()->check(CLI::ExistingFile);
  pipeline_run->add_option("--catalog", p_in.catalog, "Catalog archive")->required()->check(CLI::ExistingFile);
  pipeline_run->add_option("-o,--out", p_in.output, "Edited GLB to write")->required();
  pipeline_run->add_option("--camera", p_camera, "Camera JSON (default: front camera)")->check(CLI::ExistingFile);
  pipeline_run->add_option("--size", p_in.image_size, "Front camera resolution");
  pipeline_run->add_option("--prompt", p_in.prompt, "Segmentation prompt");
  pipeline_run->add_option("--target", p_in.target, "Index of the detected component to replace");
  pipeline_run->add_option("--mode", p_mode, "Scaling mode: per_axis or uniform");
  pipeline_run->add_option("--inflation", p_in.inflation, "Region inflation")->check(CLI::NonNegativeNumber);
  pipeline_run->add_option("--category", p_category, "Only retrieve this category");

  // fixtures generate
  auto* fixtures = app.add_subcommand("fixtures", "Synthetic test data")->require_subcommand(1);
  auto* fixtures_gen = fixtures->add_subcommand("generate", "Write a component suite and a fixture house");
  std::string x_out;
  int x_count = 60, x_variant = 0;
  fixtures_gen->add_option("directory", x_out, "Output directory")->required();
  fixtures_gen->add_option("--count", x_count, "Number of components")->check(CLI::Range(1, 100000));
  fixtures_gen->add_option("--variant", x_variant, "Fixture house variant")->check(CLI::Range(0, 100));

  auto* info = app.add_subcommand("info", "Report the SIMD kernel set in use");

  CLI11_PARSE(app, argc, argv);
  if (seed_opt->count() > 0) g.seed = seed_value;

  try {
    if (catalog_build->parsed()) {
      const auto t0 = std::chrono::steady_clock::now();
      std::vector<TriangleMesh> meshes;
      CatalogManifest manifest = ingest_directory(cat_dir, default_category_rule(cat_dir), &meshes);
      const IndexBuild build = build_catalog_index(manifest, retrieval_params(g), &meshes);
      save_catalog(manifest, build.index, cat_out);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      json errors = json::array();
      for (const auto& e : manifest.ingest_errors) errors.push_back({{"path", e.path}, {"code", e.code}, {"message", e.message}});
      const json result = {{"catalog", cat_out},           {"components", manifest.records.size()},
                           {"views", build.index.view_count()}, {"codebook_k", build.index.codebook.k},
                           {"ingest_errors", errors},      {"warnings", build.warnings},
                           {"seconds", secs}};
      std::string text = "indexed " + std::to_string(manifest.records.size()) + " components (" +
                         std::to_string(build.index.view_count()) + " views, k=" +
                         std::to_string(build.index.codebook.k) + ") into " + cat_out + "\n";
      for (const auto& e : manifest.ingest_errors) text += "skipped " + e.path + ": " + e.code + ": " + e.message + "\n";
      for (const auto& w : build.warnings) text += "warning: " + w + "\n";
      emit(g, result, text);
    } else if (index_build->parsed()) {
      LoadedCatalog loaded = load_catalog(idx_catalog);
      RetrievalParams params = loaded.index.params;
      if (config_file(g)) params = retrieval_params(g);
      if (g.seed) params.seed = *g.seed;
      const IndexBuild build = build_catalog_index(loaded.manifest, params);
      const std::string out = idx_out.empty() ? idx_catalog : idx_out;
      save_catalog(loaded.manifest, build.index, out);
      if (!idx_standalone.empty()) save_index(build.index, idx_standalone);
      emit(g, {{"catalog", out}, {"views", build.index.view_count()}, {"warnings", build.warnings}},
           "rebuilt index of " + out + " (" + std::to_string(build.index.view_count()) + " views)\n");
    } else if (render_depth_cmd->parsed()) {
      const TriangleMesh mesh = load_mesh(r_model);
      const Camera camera = camera_for(mesh, r_camera, r_yaw, r_elev, r_size);
      write_depth(render_depth(mesh, camera), camera, r_out);
      emit(g, {{"depth", r_out}, {"camera", to_json(camera)}}, "wrote " + r_out + "\n");
    } else if (render_lineart->parsed()) {
      const TriangleMesh mesh = load_mesh(r_model);
      const Camera camera = camera_for(mesh, r_camera, r_yaw, r_elev, r_size);
      const double threshold = r_depth_ratio * bounding_sphere(mesh).radius;
      const SketchImage art = render_line_art(mesh, camera, threshold, r_normal_deg);
      write_image(r_out, sketch_to_image(art));
      emit(g, {{"image", r_out}, {"ink_pixels", art.ink_count()}, {"camera", to_json(camera)}},
           "wrote " + r_out + " (" + std::to_string(art.ink_count()) + " ink pixels)\n");
    } else if (turntable_cmd->parsed()) {
      const TriangleMesh mesh = load_mesh(r_model);
      const auto views = render_turntable(mesh, r_views, r_elev, 2.5, r_size, r_size);
      fs::create_directories(r_out);
      json files = json::array();
      for (std::size_t i = 0; i < views.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "view_%03zu.bin", i);
        write_depth(views[i].depth, views[i].camera, fs::path(r_out) / name);
        files.push_back({{"file", name}, {"yaw_deg", views[i].yaw_deg}});
      }
      emit(g, {{"directory", r_out}, {"views", files}},
           "wrote " + std::to_string(views.size()) + " views to " + r_out + "\n");
    } else if (fit->parsed()) {
      const TriangleMesh mesh = load_mesh(f_model);
      OrientedBoundingBox obb;
      std::size_t points = 0;
      if (f_mask.empty()) {
        obb = fit_obb(mesh.positions);
        points = mesh.positions.size();
      } else {
        const Camera camera = camera_for(mesh, f_camera, 0.0, 0.0, f_size);
        const ComponentMask mask = load_mask(f_mask).mask;
        const PointCloud cloud = extract_foreground(mask, render_depth(mesh, camera), camera, {f_lo, f_hi});
        obb = fit_obb(cloud);
        points = cloud.size();
      }
      emit(g, {{"obb", to_json(obb)}, {"point_count", points}});
    } else if (retrieve->parsed()) {
      const LoadedCatalog loaded = load_catalog(q_catalog);
      const SketchImage sketch = sketch_from_image(read_image(q_sketch));
      const auto hits = query(sketch, loaded.index, q_top_k,
                              q_category.empty() ? std::nullopt : std::optional<std::string>(q_category));
      json results = json::array();
      std::string text;
      for (const auto& h : hits) {
        const ComponentRecord* rec = loaded.manifest.find(h.component_id);
        const std::string name = rec ? rec->name : "?";
        results.push_back({{"component_id", h.component_id},
                           {"score", h.score},
                           {"name", name},
                           {"category", rec ? rec->category : ""}});
        char line[256];
        std::snprintf(line, sizeof line, "%6u  %.4f  %s\n", h.component_id, h.score, name.c_str());
        text += line;
      }
      emit(g, {{"results", results}, {"warnings", loaded.warnings}}, text.empty() ? "no results\n" : text);
    } else if (serve->parsed()) {
      ServiceConfig cfg = load_service_config(config_file(g));
      if (s_port >= 0) cfg.port = s_port;
      if (!s_catalog.empty()) cfg.catalog_path = s_catalog;
      PipelineService service(cfg);
      serve_http(service);
    } else if (eval_self->parsed()) {
      const LoadedCatalog loaded = load_catalog(e_catalog);
      const auto report = run_eval_self_retrieval(loaded.manifest, loaded.index, g.seed.value_or(0), e_dropout);
      char text[256];
      std::snprintf(text, sizeof text, "queries %zu  top1 %.4f  top5 %.4f  top5@dropout %.4f\n",
                    report.overall.queries, report.overall.top1, report.overall.top5,
                    report.overall.top5_under_dropout);
      emit(g, to_json(report), text);
    } else if (pipeline_run->parsed()) {
      if (!p_camera.empty()) p_in.camera = p_camera;
      if (!p_category.empty()) p_in.category = p_category;
      p_in.mode = parse_scaling_mode(p_mode);
      const PipelineResult result = run_pipeline(p_in);
      emit(g, to_json(result));
    } else if (fixtures_gen->parsed()) {
      const fs::path root = x_out;
      const auto specs = component_suite(x_count, g.seed.value_or(7));
      write_component_suite(root / "components", specs);
      const FixtureHouse house = make_fixture_house(x_variant);
      write_fixture_house(root / "house", house);
      // A sketch to query with: the front line art of the first component.
      const RetrievalParams params = retrieval_params(g);
      const SketchImage sketch = render_front_view(canonicalize_component(make_component(specs.front())).mesh, params);
      write_image((root / "sketch.png").string(), sketch_to_image(sketch));
      emit(g, {{"components", specs.size()}, {"directory", root.string()}},
           "wrote " + std::to_string(specs.size()) + " components, a fixture house and sketch.png to " +
               root.string() + "\n");
    } else if (info->parsed()) {
      emit(g, {{"kernels", std::string(simd::active().name)}},
           std::string("kernels: ") + std::string(simd::active().name) + "\n");
    }
  } catch (const Error& e) {
    if (g.json_output) {
      std::cout << json{{"error", {{"code", std::string(e.code_name())}, {"message", e.what()}}}}.dump() << std::endl;
    } else {
      std::cerr << "error: " << e.code_name() << ": " << e.what() << std::endl;
    }
    return 1;
  } catch (const std::exception& e) {
    if (g.json_output) {
      std::cout << json{{"error", {{"code", "InternalError"}, {"message", e.what()}}}}.dump() << std::endl;
    } else {
      std::cerr << "error: " << e.what() << std::endl;
    }
    return 1;
  }
  return 0;
}
