#include "hy3d/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hy3d/cfg.hpp"
#include "hy3d/surface.hpp"

namespace hy3d {

namespace fs = std::filesystem;
using nlohmann::json;

SdfPtr make_fixture(const std::string& name) {
  if (name == "sphere") return make_sphere(0.45);
  if (name == "box") return make_box(Eigen::Vector3d(0.35, 0.3, 0.25));
  if (name == "torus") return make_torus(0.35, 0.15);
  if (name == "dented_sphere")
    return make_dented_sphere(0.45, Eigen::Vector3d(0, 0, 1), 0.12, 0.10);
  if (name == "two_spheres")
    return make_union(make_sphere(0.3, Eigen::Vector3d(-0.35, 0, 0)),
                      make_sphere(0.3, Eigen::Vector3d(0.35, 0, 0)));
  throw std::invalid_argument("unknown fixture: " + name);
}

std::vector<std::string> fixture_names() {
  return {"sphere", "box", "torus", "dented_sphere", "two_spheres"};
}

namespace {

std::string variant_name(Variant v) { return v == Variant::Lite ? "lite" : "std"; }
std::string backend_name(Backend b) { return b == Backend::Learned ? "learned" : "carve"; }

Variant parse_variant(const std::string& s) {
  if (s == "lite") return Variant::Lite;
  if (s == "std") return Variant::Std;
  throw std::invalid_argument("unknown variant: " + s);
}

Backend parse_backend(const std::string& s) {
  if (s == "learned") return Backend::Learned;
  if (s == "carve") return Backend::Carve;
  throw std::invalid_argument("unknown backend: " + s);
}

json config_to_json(const PipelineConfig& c) {
  json j;
  j["variant"] = variant_name(c.variant);
  j["backend"] = backend_name(c.backend);
  j["seed"] = c.seed;
  j["fixture"] = c.fixture;
  j["render_resolution"] = c.render_resolution;
  j["voxel_resolution"] = c.voxel_resolution;
  j["field_resolution"] = c.field_resolution;
  j["include_condition"] = c.include_condition;
  j["align"] = c.align;
  j["eval_points"] = c.eval_points;
  j["thresholds"] = c.thresholds;
  j["schedule"] = {{"base", c.schedule.base},
                   {"amplitude", c.schedule.amplitude},
                   {"exponent", c.schedule.exponent},
                   {"t_max", c.schedule.t_max},
                   {"tau_front", c.schedule.tau_front},
                   {"tau_back", c.schedule.tau_back},
                   {"interp", c.schedule.interp == CfgSchedule::TauInterp::Linear ? "linear"
                                                                                  : "cosine"}};
  j["out_dir"] = c.out_dir;
  return j;
}

}  // namespace

std::string PipelineConfig::to_json() const { return config_to_json(*this).dump(2); }

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json j = json::parse(text);
  PipelineConfig c;
  if (j.contains("variant")) c.variant = parse_variant(j["variant"]);
  if (j.contains("backend")) c.backend = parse_backend(j["backend"]);
  if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("fixture")) c.fixture = j["fixture"];
  if (j.contains("render_resolution")) c.render_resolution = j["render_resolution"];
  if (j.contains("voxel_resolution")) c.voxel_resolution = j["voxel_resolution"];
  if (j.contains("field_resolution")) c.field_resolution = j["field_resolution"];
  if (j.contains("include_condition")) c.include_condition = j["include_condition"];
  if (j.contains("align")) c.align = j["align"];
  if (j.contains("eval_points")) c.eval_points = j["eval_points"];
  if (j.contains("thresholds")) c.thresholds = j["thresholds"].get<std::vector<double>>();
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    if (s.contains("base")) c.schedule.base = s["base"];
    if (s.contains("amplitude")) c.schedule.amplitude = s["amplitude"];
    if (s.contains("exponent")) c.schedule.exponent = s["exponent"];
    if (s.contains("t_max")) c.schedule.t_max = s["t_max"];
    if (s.contains("tau_front")) c.schedule.tau_front = s["tau_front"];
    if (s.contains("tau_back")) c.schedule.tau_back = s["tau_back"];
    if (s.contains("interp"))
      c.schedule.interp = s["interp"] == "cosine" ? CfgSchedule::TauInterp::Cosine
                                                  : CfgSchedule::TauInterp::Linear;
  }
  if (j.contains("out_dir")) c.out_dir = j["out_dir"];
  return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return from_json(ss.str());
}

double RunReport::total_seconds() const {
  double s = 0;
  for (const auto& [name, t] : stage_seconds) s += t;
  return s;
}

std::string RunReport::to_json() const {
  json j;
  j["backend"] = backend_label;
  j["artifacts"] = artifacts;
  j["metrics"] = json::parse(metrics.to_json());
  j["config"] = json::parse(config_echo);
  return j.dump(2);
}

std::string RunReport::timings_json() const {
  json j;
  json stages = json::array();
  for (const auto& [name, t] : stage_seconds) stages.push_back({{"stage", name}, {"seconds", t}});
  j["stages"] = stages;
  j["total_seconds"] = total_seconds();
  return j.dump(2);
}

namespace {

/// Ground truth: marching cubes over the analytic fixture SDF.
Mesh analytic_mesh(const Sdf& shape, int resolution) {
  SdfGrid grid(resolution);
  for (int iz = 0; iz < resolution; ++iz)
    for (int iy = 0; iy < resolution; ++iy)
      for (int ix = 0; ix < resolution; ++ix)
        grid.at(ix, iy, iz) = shape.eval(grid.point(ix, iy, iz));
  return marching_cubes(grid);
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& config) {
  RunReport report;
  report.backend_label = backend_name(config.backend);
  report.config_echo = config.to_json();

  fs::create_directories(config.out_dir);
  auto artifact = [&](const std::string& key, const std::string& file) {
    std::string path = (fs::path(config.out_dir) / file).string();
    report.artifacts[key] = path;
    return path;
  };

  std::string current_stage;
  auto timed = [&](const std::string& name, const std::function<void()>& fn) {
    current_stage = name;
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    report.stage_seconds.emplace_back(name, std::chrono::duration<double>(t1 - t0).count());
  };

  try {
    Rng rng(config.seed);

    SdfPtr shape;
    FixtureSet fixture;
    Mesh gt_mesh;
    timed("render-fixtures", [&] {
      shape = make_fixture(config.fixture);
      fixture = render_fixture_set(*shape, config.render_resolution, config.include_condition, rng);
      json manifest;
      manifest["fixture"] = config.fixture;
      json poses = json::array();
      for (int i = 0; i < 6; ++i) {
        const CameraPose& p = fixture.views.poses[i];
        write_png(artifact("view_" + std::to_string(i), "view_" + std::to_string(i) + ".png"),
                  fixture.views.images[i]);
        write_mask_png(artifact("mask_" + std::to_string(i), "mask_" + std::to_string(i) + ".png"),
                       fixture.silhouettes[i]);
        poses.push_back({{"elevation_deg", p.elevation_deg},
                         {"azimuth_deg", p.azimuth_deg},
                         {"distance", p.distance},
                         {"fov_deg", p.fov_deg}});
      }
      manifest["orbit_poses"] = poses;
      if (fixture.condition) {
        const CameraPose& p = fixture.condition->pose;
        write_png(artifact("condition", "condition.png"), fixture.condition->image);
        write_mask_png(artifact("condition_mask", "condition_mask.png"),
                       fixture.condition->silhouette);
        manifest["condition_pose"] = {{"elevation_deg", p.elevation_deg},
                                      {"azimuth_deg", p.azimuth_deg},
                                      {"distance", p.distance},
                                      {"fov_deg", p.fov_deg}};
      }
      std::ofstream(artifact("manifest", "manifest.json")) << manifest.dump(2) << "\n";

      gt_mesh = analytic_mesh(*shape, config.voxel_resolution);
      save_obj(artifact("gt_mesh", "gt_mesh.obj"), gt_mesh);
    });

    timed("sampler-bypass", [&] {
      // No trained denoiser: ground-truth views stand in for the sampler
      // output, tiled at the variant's grid size.
      ViewSet tiles;
      tiles.poses = fixture.views.poses;
      for (int i = 0; i < 6; ++i)
        tiles.images[i] = resize_image(fixture.views.images[i], config.tile_size(),
                                       config.tile_size());
      ViewGrid grid = assemble(tiles);
      write_png(artifact("view_grid", "view_grid.png"), grid.pixels);
    });

    SdfGrid field;
    timed("reconstruct", [&] {
      if (config.backend == Backend::Carve) {
        std::vector<SilhouetteView> views;
        for (int i = 0; i < 6; ++i)
          views.push_back({fixture.silhouettes[i], fixture.views.poses[i]});
        if (fixture.condition)
          views.push_back({fixture.condition->silhouette, fixture.condition->pose});
        CarveConfig carve_cfg;
        carve_cfg.resolution = config.voxel_resolution;
        field = carve(views, carve_cfg).sdf;
      } else {
        ReconModel model = ReconModel::random(config.seed);
        UnpatchifyWeights weights = UnpatchifyWeights::random(model.dims, config.seed + 1);
        SdfDecoder decoder = SdfDecoder::random(config.seed + 2, model.dims.high_channels);
        std::optional<Image> condition;
        if (fixture.condition) condition = fixture.condition->image;
        field = reconstruct_learned(fixture.views, condition, model, weights, decoder,
                                    config.field_resolution);
      }
      save_grid(artifact("sdf_grid", "sdf_grid.bin"), field);
    });

    Mesh mesh;
    timed("extract-mesh", [&] {
      mesh = marching_cubes(field);
      if (mesh.empty()) throw std::runtime_error("extracted mesh is empty");
      save_obj(artifact("mesh", "mesh.obj"), mesh);
    });

    timed("evaluate", [&] {
      EvaluateOptions opts;
      opts.align = config.align;
      opts.points = config.eval_points;
      opts.seed = config.seed;
      opts.thresholds = config.thresholds;
      report.metrics = evaluate_pair(mesh, gt_mesh, opts);
    });

    std::ofstream(artifact("report", "report.json")) << report.to_json() << "\n";
    std::ofstream(artifact("timings", "timings.json")) << report.timings_json() << "\n";
  } catch (const std::exception& e) {
    throw std::runtime_error("pipeline stage '" + current_stage + "' failed: " + e.what());
  }
  return report;
}

std::string emit_plot_data(const std::vector<RunReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("emit_plot_data: no reports");
  std::ostringstream os;
  os.precision(17);
  os << "total_seconds,fscore_0.1,fscore_0.2,fscore_0.5,chamfer,backend\n";
  for (const RunReport& r : reports) {
    os << r.total_seconds();
    for (double tau : {0.1, 0.2, 0.5}) {
      auto it = r.metrics.fscore.find(tau);
      os << "," << (it != r.metrics.fscore.end() ? it->second : 0.0);
    }
    os << "," << r.metrics.chamfer << "," << r.backend_label << "\n";
  }
  return os.str();
}

std::string cfg_table_csv(const CfgSchedule& schedule, int t_step) {
  std::ostringstream os;
  os.precision(17);
  os << "t,azimuth_deg,weight\n";
  for (int t = 0; t <= static_cast<int>(schedule.t_max); t += t_step)
    for (int slot = 0; slot < 6; ++slot) {
      double az = tile_azimuth(slot);
      os << t << "," << az << "," << schedule.view_weight(t, az) << "\n";
    }
  return os.str();
}

}  // namespace hy3d
