#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "hy3d/camera.hpp"
#include "hy3d/grid.hpp"
#include "hy3d/image.hpp"
#include "hy3d/mvgrid.hpp"
#include "hy3d/triplane.hpp"

namespace hy3d {

enum class TokenBranch { Calibrated, Condition };

struct ViewToken {
  Eigen::VectorXd feature;        // token_dim
  CameraEmbedding embedding;      // zero for the condition branch
  TokenBranch branch = TokenBranch::Calibrated;
  int view_index = -1;            // 0..5 for orbit views, -1 for condition
};

struct TokenSequence {
  std::vector<ViewToken> tokens;
  int patch = 16;
};

/// Forward-only attention-fusion reconstruction model. Weights are pseudo-random
/// from a seed; triplane queries cross-attend to the view tokens.
struct ReconModel {
  int token_dim = 64;
  int patch = 16;
  int heads = 4;
  int emb_dim = CameraEmbedding::kSize;
  TriplaneDims dims;  // output TriplaneLow geometry

  Eigen::MatrixXd patch_embed;   // token_dim x (patch*patch*3)
  Eigen::MatrixXd emb_proj;      // token_dim x emb_dim
  Eigen::VectorXd branch_bias_calibrated;
  Eigen::VectorXd branch_bias_condition;
  Eigen::MatrixXd queries;       // (3 * low_res^2) x token_dim

  struct Block {
    Eigen::MatrixXd wq, wk, wv, wo;  // token_dim x token_dim
  };
  std::vector<Block> blocks;

  Eigen::MatrixXd out_proj;      // low_channels x token_dim
  Eigen::VectorXd out_bias;

  static ReconModel random(std::uint64_t seed, const TriplaneDims& dims = {}, int token_dim = 64,
                           int patch = 16, int heads = 4, int num_blocks = 2);
};

struct AttentionStats {
  // Per block: extreme attention row sums (each should be 1).
  std::vector<double> row_sum_min;
  std::vector<double> row_sum_max;
};

/// Patch-embeds each view (non-overlapping patch x patch tiles), adds the
/// projected camera embedding per token. Condition tokens carry the all-zero
/// embedding and the condition branch tag.
TokenSequence tokenize_views(const ViewSet& views, const std::optional<Image>& condition,
                             const ReconModel& model);

Triplane forward(const ReconModel& model, const TokenSequence& tokens,
                 AttentionStats* stats = nullptr);

SdfGrid reconstruct_learned(const ViewSet& views, const std::optional<Image>& condition,
                            const ReconModel& model, const UnpatchifyWeights& weights,
                            const SdfDecoder& decoder, int grid_resolution);

struct CarveConfig {
  int resolution = 96;              // voxels per axis over [-1,1]^3
  double threshold = 0.5;           // silhouette occupancy threshold
  double truncation_voxels = 4.0;   // SDF truncation distance in voxel widths
};

struct SilhouetteView {
  Mask mask;
  CameraPose pose;
};

struct CarveResult {
  SdfGrid sdf;
  std::vector<std::uint8_t> occupancy;  // same layout as sdf.values
  std::size_t occupied_count = 0;
};

/// Visual hull: a voxel survives iff its center projects inside the silhouette
/// in every provided view. Signed distance comes from an exact Euclidean
/// distance transform of the occupancy boundary, negative inside, truncated.
CarveResult carve(const std::vector<SilhouetteView>& views, const CarveConfig& cfg = {});

/// Exact squared Euclidean distance transform of a 3D indicator (distance in
/// voxel units to the nearest "on" voxel). Used by carving; exposed for tests.
std::vector<double> distance_transform_3d(const std::vector<std::uint8_t>& on, int nx, int ny,
                                          int nz);

}  // namespace hy3d
