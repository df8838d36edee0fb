#include "hy3d/triplane.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "hy3d/rng.hpp"

namespace hy3d {

Triplane::Triplane(int res_, int channels_) : res(res_), channels(channels_) {
  if (res < 1 || channels < 1) throw std::invalid_argument("Triplane: bad dims");
  for (auto& p : planes) p = Eigen::MatrixXd::Zero(static_cast<long>(res) * res, channels);
}

bool Triplane::all_finite() const {
  for (const auto& p : planes)
    if (!p.allFinite()) return false;
  return true;
}

Triplane make_low(const TriplaneDims& dims) { return Triplane(dims.low_res, dims.low_channels); }

UnpatchifyWeights UnpatchifyWeights::zero(const TriplaneDims& dims) {
  UnpatchifyWeights w;
  w.dims = dims;
  w.weight = Eigen::MatrixXd::Zero(dims.block_outputs(), dims.low_channels);
  w.bias = Eigen::VectorXd::Zero(dims.block_outputs());
  return w;
}

UnpatchifyWeights UnpatchifyWeights::random(const TriplaneDims& dims, std::uint64_t seed) {
  UnpatchifyWeights w = zero(dims);
  Rng rng(seed);
  double scale = 1.0 / std::sqrt(static_cast<double>(dims.low_channels));
  for (long i = 0; i < w.weight.rows(); ++i)
    for (long j = 0; j < w.weight.cols(); ++j) w.weight(i, j) = uniform(rng, -scale, scale);
  for (long i = 0; i < w.bias.size(); ++i) w.bias[i] = uniform(rng, -0.01, 0.01);
  return w;
}

Eigen::MatrixXd unpatchify_tokens(const Eigen::MatrixXd& tokens, const UnpatchifyWeights& w) {
  if (tokens.cols() != w.weight.cols())
    throw std::invalid_argument("unpatchify_tokens: channel count mismatch");
  Eigen::MatrixXd out = tokens * w.weight.transpose();
  out.rowwise() += w.bias.transpose();
  return out;
}

Triplane unpatchify(const Triplane& low, const UnpatchifyWeights& w) {
  const TriplaneDims& d = w.dims;
  if (low.res != d.low_res || low.channels != d.low_channels)
    throw std::invalid_argument("unpatchify: triplane does not match weight dims");

  Triplane high(d.high_res(), d.high_channels);
  int f = d.factor;
  for (int plane = 0; plane < 3; ++plane) {
    Eigen::MatrixXd blocks = unpatchify_tokens(low.planes[plane], w);
    for (int row = 0; row < d.low_res; ++row) {
      for (int col = 0; col < d.low_res; ++col) {
        long token = static_cast<long>(row) * d.low_res + col;
        for (int sr = 0; sr < f; ++sr) {
          for (int sc = 0; sc < f; ++sc) {
            long high_token = static_cast<long>(row * f + sr) * d.high_res() + (col * f + sc);
            int base = (sr * f + sc) * d.high_channels;
            high.planes[plane].row(high_token) =
                blocks.block(token, base, 1, d.high_channels);
          }
        }
      }
    }
  }
  return high;
}

namespace {

// Bilinear lookup on one plane; (u, v) in [-1,1] map to nodes 0..res-1.
Eigen::VectorXd plane_sample(const Eigen::MatrixXd& plane, int res, double u, double v) {
  auto to_grid = [res](double x) { return (x + 1.0) * 0.5 * (res - 1); };
  double gu = to_grid(u), gv = to_grid(v);
  int u0 = std::clamp(static_cast<int>(std::floor(gu)), 0, res - 2);
  int v0 = std::clamp(static_cast<int>(std::floor(gv)), 0, res - 2);
  double fu = gu - u0, fv = gv - v0;
  auto row = [&](int r, int c) { return plane.row(static_cast<long>(r) * res + c); };
  return ((1 - fv) * ((1 - fu) * row(v0, u0) + fu * row(v0, u0 + 1)) +
          fv * ((1 - fu) * row(v0 + 1, u0) + fu * row(v0 + 1, u0 + 1)))
      .transpose();
}

}  // namespace

Eigen::VectorXd sample_triplane(const Triplane& high, const Eigen::Vector3d& p, bool* clamped) {
  if (!p.allFinite()) throw std::domain_error("sample_triplane: non-finite point");
  Eigen::Vector3d q = p.cwiseMax(-1.0).cwiseMin(1.0);
  if (clamped) *clamped = (q.array() != p.array()).any();
  return plane_sample(high.planes[0], high.res, q.x(), q.y()) +
         plane_sample(high.planes[1], high.res, q.x(), q.z()) +
         plane_sample(high.planes[2], high.res, q.y(), q.z());
}

SdfDecoder SdfDecoder::zero(int in_channels, int hidden) {
  SdfDecoder d;
  d.w1 = Eigen::MatrixXd::Zero(hidden, in_channels);
  d.w2 = Eigen::MatrixXd::Zero(hidden, hidden);
  d.w3 = Eigen::MatrixXd::Zero(4, hidden);
  d.b1 = Eigen::VectorXd::Zero(hidden);
  d.b2 = Eigen::VectorXd::Zero(hidden);
  d.b3 = Eigen::VectorXd::Zero(4);
  return d;
}

SdfDecoder SdfDecoder::random(std::uint64_t seed, int in_channels, int hidden) {
  SdfDecoder d = zero(in_channels, hidden);
  Rng rng(seed);
  auto fill = [&rng](Eigen::MatrixXd& m) {
    double scale = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (long i = 0; i < m.rows(); ++i)
      for (long j = 0; j < m.cols(); ++j) m(i, j) = uniform(rng, -scale, scale);
  };
  fill(d.w1);
  fill(d.w2);
  fill(d.w3);
  return d;
}

namespace {
double softplus(double x) { return x > 30 ? x : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

DecodedSample decode(const Eigen::VectorXd& feature, const SdfDecoder& decoder) {
  if (!feature.allFinite()) throw std::domain_error("decode: non-finite feature");
  if (feature.size() != decoder.w1.cols())
    throw std::invalid_argument("decode: feature width mismatch");
  Eigen::VectorXd h1 = (decoder.w1 * feature + decoder.b1).unaryExpr([](double x) { return softplus(x); });
  Eigen::VectorXd h2 = (decoder.w2 * h1 + decoder.b2).unaryExpr([](double x) { return softplus(x); });
  Eigen::VectorXd raw = decoder.w3 * h2 + decoder.b3;
  DecodedSample out;
  out.sdf = raw[0];
  out.rgb = Eigen::Vector3d(sigmoid(raw[1]), sigmoid(raw[2]), sigmoid(raw[3]));
  return out;
}

SdfGrid field_from_triplane(const Triplane& high, const SdfDecoder& decoder, int resolution) {
  if (resolution < 8) throw std::invalid_argument("field_from_triplane: resolution must be >= 8");
  SdfGrid grid(resolution);
  for (int iz = 0; iz < resolution; ++iz)
    for (int iy = 0; iy < resolution; ++iy)
      for (int ix = 0; ix < resolution; ++ix)
        grid.at(ix, iy, iz) = decode(sample_triplane(high, grid.point(ix, iy, iz)), decoder).sdf;
  return grid;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f32_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      float f = static_cast<float>(m(i, j));
      std::uint32_t u;
      std::memcpy(&u, &f, 4);
      put_u32(os, u);
    }
}

void get_f32_matrix(std::istream& is, Eigen::MatrixXd& m) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) {
      std::uint32_t u = get_u32(is);
      float f;
      std::memcpy(&f, &u, 4);
      m(i, j) = f;
    }
}

}  // namespace

void save_triplane(const std::string& path, const Triplane& tp) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_triplane: cannot open " + path);
  os.write("TPLN", 4);
  put_u32(os, static_cast<std::uint32_t>(tp.res));
  put_u32(os, static_cast<std::uint32_t>(tp.channels));
  for (const auto& p : tp.planes) put_f32_matrix(os, p);
  if (!os) throw std::runtime_error("save_triplane: write failed");
}

Triplane load_triplane(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_triplane: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "TPLN", 4) != 0) throw std::runtime_error("load_triplane: bad magic");
  int res = static_cast<int>(get_u32(is));
  int ch = static_cast<int>(get_u32(is));
  Triplane tp(res, ch);
  for (auto& p : tp.planes) get_f32_matrix(is, p);
  if (!is) throw std::runtime_error("load_triplane: truncated file");
  return tp;
}

void save_unpatchify_weights(const std::string& path, const UnpatchifyWeights& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_unpatchify_weights: cannot open " + path);
  os.write("UPWT", 4);
  put_u32(os, static_cast<std::uint32_t>(w.dims.low_res));
  put_u32(os, static_cast<std::uint32_t>(w.dims.low_channels));
  put_u32(os, static_cast<std::uint32_t>(w.dims.high_channels));
  put_u32(os, static_cast<std::uint32_t>(w.dims.factor));
  put_f32_matrix(os, w.weight);
  Eigen::MatrixXd b = w.bias;
  put_f32_matrix(os, b);
  if (!os) throw std::runtime_error("save_unpatchify_weights: write failed");
}

UnpatchifyWeights load_unpatchify_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_unpatchify_weights: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::memcmp(magic, "UPWT", 4) != 0) throw std::runtime_error("load_unpatchify_weights: bad magic");
  TriplaneDims dims;
  dims.low_res = static_cast<int>(get_u32(is));
  dims.low_channels = static_cast<int>(get_u32(is));
  dims.high_channels = static_cast<int>(get_u32(is));
  dims.factor = static_cast<int>(get_u32(is));
  UnpatchifyWeights w = UnpatchifyWeights::zero(dims);
  get_f32_matrix(is, w.weight);
  Eigen::MatrixXd b(w.bias.size(), 1);
  get_f32_matrix(is, b);
  w.bias = b.col(0);
  if (!is) throw std::runtime_error("load_unpatchify_weights: truncated file");
  return w;
}

}  // namespace hy3d
