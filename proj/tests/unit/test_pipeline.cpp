#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hy3d/image.hpp"
#include "hy3d/pipeline.hpp"
#include "hy3d/surface.hpp"

using namespace hy3d;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  REQUIRE(is.good());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

PipelineConfig fast_config(const std::string& out_dir) {
  PipelineConfig cfg;
  cfg.fixture = "sphere";
  cfg.backend = Backend::Carve;
  cfg.seed = 42;
  cfg.render_resolution = 128;
  cfg.voxel_resolution = 48;
  cfg.eval_points = 4000;
  cfg.out_dir = out_dir;
  return cfg;
}

}  // namespace

TEST_CASE("fixture registry") {
  for (const auto& name : fixture_names()) CHECK(make_fixture(name) != nullptr);
  CHECK_THROWS(make_fixture("no_such_shape"));
}

TEST_CASE("config JSON round trip") {
  PipelineConfig cfg;
  cfg.variant = Variant::Std;
  cfg.backend = Backend::Learned;
  cfg.seed = 1234;
  cfg.fixture = "torus";
  cfg.render_resolution = 192;
  cfg.voxel_resolution = 64;
  cfg.include_condition = false;
  cfg.align = true;
  cfg.eval_points = 777;
  cfg.schedule.tau_back = 0.6;
  cfg.out_dir = "/tmp/somewhere";

  PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
  CHECK(back.variant == Variant::Std);
  CHECK(back.backend == Backend::Learned);
  CHECK(back.seed == 1234);
  CHECK(back.fixture == "torus");
  CHECK(back.render_resolution == 192);
  CHECK(back.voxel_resolution == 64);
  CHECK(back.include_condition == false);
  CHECK(back.align == true);
  CHECK(back.eval_points == 777);
  CHECK(back.schedule.tau_back == doctest::Approx(0.6));
  CHECK(back.out_dir == "/tmp/somewhere");
  CHECK(back.tile_size() == 512);
}

TEST_CASE("carve run on the sphere fixture meets the oracle bound") {
  fs::path dir = fs::temp_directory_path() / "hy3d_run_sphere";
  fs::remove_all(dir);
  PipelineConfig cfg = fast_config(dir.string());
  cfg.render_resolution = 512;
  cfg.voxel_resolution = 96;
  cfg.include_condition = false;  // the six orbit views only
  cfg.eval_points = 10000;
  RunReport report = run_pipeline(cfg);

  CHECK(report.metrics.chamfer <= 0.05);
  CHECK(report.metrics.fscore.at(0.1) >= 0.95);
  CHECK(report.backend_label == "carve");
  CHECK(report.total_seconds() >= 0.0);

  // All advertised artifacts exist.
  for (const auto& [name, path] : report.artifacts) {
    INFO(name << " -> " << path);
    CHECK(fs::exists(path));
  }
  // The mesh artifact is watertight and loadable.
  Mesh mesh = load_obj(report.artifacts.at("mesh"));
  CHECK(is_watertight(mesh).watertight);
  fs::remove_all(dir);
}

TEST_CASE("pipeline determinism: identical bytes for identical config and seed") {
  fs::path dir = fs::temp_directory_path() / "hy3d_det";
  fs::remove_all(dir);
  PipelineConfig cfg = fast_config(dir.string());
  RunReport r1 = run_pipeline(cfg);
  std::string mesh1 = slurp(r1.artifacts.at("mesh"));
  std::string report1 = slurp(r1.artifacts.at("report"));
  RunReport r2 = run_pipeline(cfg);

  CHECK(mesh1 == slurp(r2.artifacts.at("mesh")));
  CHECK(report1 == slurp(r2.artifacts.at("report")));
  CHECK(r1.metrics.chamfer == r2.metrics.chamfer);
  for (const auto& [tau, f] : r1.metrics.fscore) CHECK(r2.metrics.fscore.at(tau) == f);
  CHECK(r1.to_json() == r2.to_json());
  fs::remove_all(dir);
}

TEST_CASE("config echo replays the run") {
  fs::path d1 = fs::temp_directory_path() / "hy3d_echo_a";
  fs::path d2 = fs::temp_directory_path() / "hy3d_echo_b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunReport r1 = run_pipeline(fast_config(d1.string()));
  PipelineConfig echoed = PipelineConfig::from_json(r1.config_echo);
  echoed.out_dir = d2.string();
  RunReport r2 = run_pipeline(echoed);
  CHECK(slurp(r1.artifacts.at("mesh")) == slurp(r2.artifacts.at("mesh")));
  CHECK(r1.metrics.chamfer == r2.metrics.chamfer);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("lite variant emits a 960x640 grid image") {
  fs::path dir = fs::temp_directory_path() / "hy3d_lite_grid";
  fs::remove_all(dir);
  PipelineConfig cfg = fast_config(dir.string());
  cfg.variant = Variant::Lite;
  RunReport report = run_pipeline(cfg);
  Image grid = read_png(report.artifacts.at("view_grid"));
  CHECK(grid.height == 960);
  CHECK(grid.width == 640);
  fs::remove_all(dir);
}

TEST_CASE("run report JSON is deterministic and timings are split out") {
  fs::path dir = fs::temp_directory_path() / "hy3d_report_json";
  fs::remove_all(dir);
  RunReport report = run_pipeline(fast_config(dir.string()));
  std::string json = report.to_json();
  CHECK(json.find("seconds") == std::string::npos);
  std::string timings = report.timings_json();
  for (const auto& [stage, secs] : report.stage_seconds) {
    CHECK(timings.find(stage) != std::string::npos);
    CHECK(secs >= 0.0);
  }
  fs::remove_all(dir);
}

TEST_CASE("plot data rows mirror the source reports") {
  fs::path d1 = fs::temp_directory_path() / "hy3d_plot_a";
  fs::path d2 = fs::temp_directory_path() / "hy3d_plot_b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  RunReport r1 = run_pipeline(fast_config(d1.string()));
  PipelineConfig c2 = fast_config(d2.string());
  c2.voxel_resolution = 32;
  RunReport r2 = run_pipeline(c2);

  std::string csv = emit_plot_data({r1, r2});
  std::istringstream lines(csv);
  std::string header, row1, row2, extra;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row1));
  REQUIRE(std::getline(lines, row2));
  CHECK_FALSE(std::getline(lines, extra));
  CHECK(header == "total_seconds,fscore_0.1,fscore_0.2,fscore_0.5,chamfer,backend");

  auto field = [](const std::string& row, int idx) {
    std::istringstream ss(row);
    std::string f;
    for (int i = 0; i <= idx; ++i) std::getline(ss, f, ',');
    return f;
  };
  CHECK(std::stod(field(row1, 1)) == doctest::Approx(r1.metrics.fscore.at(0.1)).epsilon(1e-12));
  CHECK(std::stod(field(row1, 4)) == doctest::Approx(r1.metrics.chamfer).epsilon(1e-12));
  CHECK(field(row1, 5) == "carve");
  CHECK(std::stod(field(row2, 4)) == doctest::Approx(r2.metrics.chamfer).epsilon(1e-12));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("schedule table covers the grid of time and azimuth") {
  CfgSchedule s;
  std::string csv = cfg_table_csv(s, 250);
  std::istringstream lines(csv);
  std::string header;
  REQUIRE(std::getline(lines, header));
  CHECK(header == "t,azimuth_deg,weight");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 5 * 6);  // t in {0,250,500,750,1000} x six azimuths
}

TEST_CASE("a failing stage is reported by name") {
  PipelineConfig cfg = fast_config((fs::temp_directory_path() / "hy3d_fail").string());
  cfg.fixture = "bogus";
  try {
    run_pipeline(cfg);
    FAIL("expected a stage failure");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("render-fixtures") != std::string::npos);
  }
}
