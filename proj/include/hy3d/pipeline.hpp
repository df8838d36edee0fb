#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hy3d/cfg.hpp"
#include "hy3d/metrics.hpp"
#include "hy3d/recon.hpp"
#include "hy3d/renderer.hpp"
#include "hy3d/sdf.hpp"

namespace hy3d {

enum class Variant { Lite, Std };
enum class Backend { Learned, Carve };

/// Named analytic fixtures standing in for rendered ground truth.
SdfPtr make_fixture(const std::string& name);
std::vector<std::string> fixture_names();

struct PipelineConfig {
  Variant variant = Variant::Lite;          // lite: 320 tiles / 960x640 grid
  Backend backend = Backend::Carve;
  std::uint64_t seed = 0;
  std::string fixture = "sphere";
  int render_resolution = 256;
  int voxel_resolution = 96;                // carve backend / ground-truth grid
  int field_resolution = 64;                // learned backend SDF grid
  bool include_condition = true;
  bool align = false;
  int eval_points = 10000;
  std::vector<double> thresholds = {0.1, 0.2, 0.5};
  CfgSchedule schedule;
  std::string out_dir = "out";

  int tile_size() const { return variant == Variant::Lite ? 320 : 512; }

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig from_json_file(const std::string& path);
};

struct RunReport {
  std::vector<std::pair<std::string, double>> stage_seconds;
  std::map<std::string, std::string> artifacts;
  MetricsReport metrics;
  std::string config_echo;  // JSON, replaying it reproduces the run
  std::string backend_label;

  double total_seconds() const;
  /// Deterministic report (no timings).
  std::string to_json() const;
  /// Wall-clock timings, written separately so report.json is reproducible.
  std::string timings_json() const;
};

RunReport run_pipeline(const PipelineConfig& config);

/// One CSV row per run: total_seconds, fscore@0.1/0.2/0.5, chamfer, backend.
std::string emit_plot_data(const std::vector<RunReport>& reports);

/// CSV of (t, azimuth_deg, weight) over the schedule for plotting.
std::string cfg_table_csv(const CfgSchedule& schedule, int t_step = 10);

}  // namespace hy3d
