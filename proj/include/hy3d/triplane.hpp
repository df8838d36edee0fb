#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>

#include "hy3d/grid.hpp"

namespace hy3d {

/// Plane order: XY (indexed by x,y), XZ (x,z), YZ (y,z). Token (row, col)
/// lives at flat index row * res + col; channels are contiguous per token.
struct TriplaneDims {
  int low_res = 64;
  int low_channels = 1024;
  int high_channels = 120;
  int factor = 4;

  int high_res() const { return low_res * factor; }
  int block_outputs() const { return factor * factor * high_channels; }
};

struct Triplane {
  int res = 0;
  int channels = 0;
  // One matrix per plane: (res * res) tokens x channels.
  std::array<Eigen::MatrixXd, 3> planes;

  Triplane() = default;
  Triplane(int res_, int channels_);
  bool all_finite() const;
};

Triplane make_low(const TriplaneDims& dims);

/// Shared linear map expanding one low token into a factor x factor block of
/// high tokens: (factor^2 * high_channels) outputs from low_channels inputs.
struct UnpatchifyWeights {
  TriplaneDims dims;
  Eigen::MatrixXd weight;  // block_outputs x low_channels
  Eigen::VectorXd bias;    // block_outputs

  static UnpatchifyWeights zero(const TriplaneDims& dims);
  static UnpatchifyWeights random(const TriplaneDims& dims, std::uint64_t seed);
};

/// Applies the shared linear map to an arbitrary token batch (rows = tokens).
Eigen::MatrixXd unpatchify_tokens(const Eigen::MatrixXd& tokens, const UnpatchifyWeights& w);

/// Each low token (r, c) independently fills high tokens
/// (r * factor + sr, c * factor + sc); output index (sr * factor + sc) * high_channels + ch.
Triplane unpatchify(const Triplane& low, const UnpatchifyWeights& w);

/// Bilinear plane sample at p in [-1,1]^3 (clamped outside; *clamped flags it),
/// aggregated over the three planes by elementwise sum.
Eigen::VectorXd sample_triplane(const Triplane& high, const Eigen::Vector3d& p,
                                bool* clamped = nullptr);

/// 120 -> 64 -> 64 -> 4 MLP with softplus activations; output 0 is the SDF,
/// outputs 1..3 are squashed to [0,1] colors.
struct SdfDecoder {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  static SdfDecoder zero(int in_channels = 120, int hidden = 64);
  static SdfDecoder random(std::uint64_t seed, int in_channels = 120, int hidden = 64);
};

struct DecodedSample {
  double sdf = 0.0;
  Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
};

DecodedSample decode(const Eigen::VectorXd& feature, const SdfDecoder& decoder);

/// Dense SDF by sampling the nodes of a regular grid over [-1,1]^3.
SdfGrid field_from_triplane(const Triplane& high, const SdfDecoder& decoder, int resolution);

// Binary float32 little-endian formats with dimension headers.
void save_triplane(const std::string& path, const Triplane& tp);
Triplane load_triplane(const std::string& path);
void save_unpatchify_weights(const std::string& path, const UnpatchifyWeights& w);
UnpatchifyWeights load_unpatchify_weights(const std::string& path);

}  // namespace hy3d
