#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "hy3d/cfg.hpp"
#include "hy3d/pipeline.hpp"
#include "hy3d/recon.hpp"
#include "hy3d/renderer.hpp"
#include "hy3d/surface.hpp"

namespace fs = std::filesystem;
using namespace hy3d;

namespace {

PipelineConfig load_config(const std::string& config_path) {
  if (config_path.empty()) return PipelineConfig{};
  return PipelineConfig::from_json_file(config_path);
}

void apply_overrides(PipelineConfig* cfg, const std::optional<std::uint64_t>& seed,
                     const std::string& variant, const std::string& backend,
                     const std::string& out) {
  if (seed) cfg->seed = *seed;
  if (variant == "lite") cfg->variant = Variant::Lite;
  if (variant == "std") cfg->variant = Variant::Std;
  if (backend == "learned") cfg->backend = Backend::Learned;
  if (backend == "carve") cfg->backend = Backend::Carve;
  if (!out.empty()) cfg->out_dir = out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage image-to-3D pipeline: multi-view grid generation with adaptive CFG "
               "and sparse-view SDF reconstruction with mesh evaluation"};
  app.require_subcommand(1);

  std::string config_path, variant, backend, out_dir, fixture = "sphere";
  std::optional<std::uint64_t> seed;
  bool brute_force = false;
  app.add_option("--config", config_path, "JSON config file")->capture_default_str();
  app.add_option("--seed", seed, "Random seed override");
  app.add_option("--variant", variant, "Model variant")->check(CLI::IsMember({"lite", "std"}));
  app.add_option("--backend", backend, "Reconstruction backend")
      ->check(CLI::IsMember({"learned", "carve"}));
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--brute-force", brute_force, "Use the O(n^2) nearest-neighbor oracle");

  auto* cmd_render = app.add_subcommand("render-fixtures", "Render orbit + condition views of a fixture");
  int render_res = 256;
  cmd_render->add_option("--fixture", fixture, "Fixture name")->check(CLI::IsMember(fixture_names()));
  cmd_render->add_option("--res", render_res, "Render resolution");

  auto* cmd_sample = app.add_subcommand("sample", "Run the guided sampler loop on a toy denoiser");
  int sample_steps = 50;
  cmd_sample->add_option("--steps", sample_steps, "Sampler steps");

  auto* cmd_recon = app.add_subcommand("reconstruct", "Reconstruct an SDF grid from a fixture");
  auto* cmd_extract = app.add_subcommand("extract-mesh", "Marching cubes on a binary SDF grid");
  std::string grid_path, mesh_path = "mesh.obj";
  cmd_extract->add_option("grid", grid_path, "Input SDF grid (.bin)")->required();
  cmd_extract->add_option("mesh", mesh_path, "Output OBJ path");

  auto* cmd_eval = app.add_subcommand("evaluate", "Chamfer/F-score/ICP between two OBJ meshes");
  std::string pred_path, gt_path;
  bool align = false;
  int eval_points = 10000;
  cmd_eval->add_option("pred", pred_path, "Predicted mesh OBJ")->required();
  cmd_eval->add_option("gt", gt_path, "Ground-truth mesh OBJ")->required();
  cmd_eval->add_flag("--align", align, "ICP-align pred onto gt first");
  cmd_eval->add_option("--points", eval_points, "Surface samples per mesh");

  auto* cmd_run = app.add_subcommand("run", "Full pipeline on a fixture");
  cmd_run->add_option("--fixture", fixture, "Fixture name")->check(CLI::IsMember(fixture_names()));

  auto* cmd_table = app.add_subcommand("cfg-table", "CSV of (t, azimuth, guidance weight)");
  auto* cmd_plot = app.add_subcommand("plot-data", "Runtime-vs-metric CSV from run directories");
  std::vector<std::string> run_dirs;
  cmd_plot->add_option("dirs", run_dirs, "Run output directories")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    PipelineConfig cfg = load_config(config_path);
    apply_overrides(&cfg, seed, variant, backend, out_dir);
    cfg.fixture = fixture;

    if (cmd_render->parsed()) {
      cfg.render_resolution = render_res;
      SdfPtr shape = make_fixture(cfg.fixture);
      Rng rng(cfg.seed);
      fs::create_directories(cfg.out_dir);
      FixtureSet set = render_fixture_set(*shape, cfg.render_resolution, true, rng);
      for (int i = 0; i < 6; ++i) {
        write_png((fs::path(cfg.out_dir) / ("view_" + std::to_string(i) + ".png")).string(),
                  set.views.images[i]);
        write_mask_png((fs::path(cfg.out_dir) / ("mask_" + std::to_string(i) + ".png")).string(),
                       set.silhouettes[i]);
      }
      write_png((fs::path(cfg.out_dir) / "condition.png").string(), set.condition->image);
      std::cout << "rendered " << cfg.fixture << " at " << cfg.render_resolution << "^2 into "
                << cfg.out_dir << "\n";
    } else if (cmd_sample->parsed()) {
      // Toy denoiser pulling the latent toward zero; exercises the adaptive
      // per-tile guidance without a trained model.
      int tile = 16;
      Field latent(2 * tile, 3 * tile, 1);
      Rng rng(cfg.seed);
      for (double& v : latent.v) v = uniform(rng, -1.0, 1.0);
      Denoiser denoiser = [](const Field& x, double) { return std::make_pair(x, x); };
      Field final = sample_loop(latent, denoiser, cfg.schedule, sample_steps);
      double max_abs = 0;
      for (double v : final.v) max_abs = std::max(max_abs, std::abs(v));
      std::cout << "sampled " << sample_steps << " steps; max |latent| = " << max_abs << "\n";
    } else if (cmd_recon->parsed() || cmd_run->parsed()) {
      RunReport report = run_pipeline(cfg);
      std::cout << report.to_json() << "\n";
      std::cout << "total seconds: " << report.total_seconds() << "\n";
    } else if (cmd_extract->parsed()) {
      Mesh mesh = marching_cubes(load_grid(grid_path));
      save_obj(mesh_path, mesh);
      std::cout << "extracted " << mesh.vertices.size() << " vertices, " << mesh.faces.size()
                << " faces into " << mesh_path << "\n";
    } else if (cmd_eval->parsed()) {
      EvaluateOptions opts;
      opts.align = align;
      opts.points = eval_points;
      opts.seed = seed.value_or(0);
      opts.brute_force = brute_force;
      MetricsReport report = evaluate_pair(load_obj(pred_path), load_obj(gt_path), opts);
      std::cout << report.to_json() << "\n";
      std::cout << "csv: " << report.to_csv_row() << "\n";
    } else if (cmd_table->parsed()) {
      std::string csv = cfg_table_csv(cfg.schedule);
      if (out_dir.empty()) {
        std::cout << csv;
      } else {
        fs::create_directories(out_dir);
        std::ofstream((fs::path(out_dir) / "cfg_table.csv").string()) << csv;
      }
    } else if (cmd_plot->parsed()) {
      std::vector<RunReport> reports;
      for (const std::string& dir : run_dirs) {
        RunReport r;
        std::ifstream rep(fs::path(dir) / "report.json"), tim(fs::path(dir) / "timings.json");
        if (!rep || !tim) throw std::runtime_error("missing report/timings in " + dir);
        auto j = nlohmann::json::parse(rep);
        auto t = nlohmann::json::parse(tim);
        r.backend_label = j["backend"];
        r.metrics.chamfer = j["metrics"]["chamfer"];
        for (auto& [key, val] : j["metrics"]["fscore"].items())
          r.metrics.fscore[std::stod(key)] = val.get<double>();
        for (auto& s : t["stages"])
          r.stage_seconds.emplace_back(s["stage"].get<std::string>(), s["seconds"].get<double>());
        reports.push_back(std::move(r));
      }
      std::cout << emit_plot_data(reports);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
