#include "hy3d/recon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hy3d/rng.hpp"

namespace hy3d {

namespace {

void fill_uniform(Rng& rng, Eigen::MatrixXd& m, double scale) {
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) m(i, j) = uniform(rng, -scale, scale);
}

void fill_uniform(Rng& rng, Eigen::VectorXd& v, double scale) {
  for (long i = 0; i < v.size(); ++i) v[i] = uniform(rng, -scale, scale);
}

}  // namespace

ReconModel ReconModel::random(std::uint64_t seed, const TriplaneDims& dims, int token_dim,
                              int patch, int heads, int num_blocks) {
  if (token_dim % heads != 0) throw std::invalid_argument("ReconModel: heads must divide token_dim");
  ReconModel m;
  m.token_dim = token_dim;
  m.patch = patch;
  m.heads = heads;
  m.dims = dims;

  Rng rng(seed);
  double s_in = 1.0 / std::sqrt(static_cast<double>(patch * patch * 3));
  double s_tok = 1.0 / std::sqrt(static_cast<double>(token_dim));

  m.patch_embed.resize(token_dim, patch * patch * 3);
  fill_uniform(rng, m.patch_embed, s_in);
  m.emb_proj.resize(token_dim, m.emb_dim);
  fill_uniform(rng, m.emb_proj, 1.0 / std::sqrt(static_cast<double>(m.emb_dim)));
  m.branch_bias_calibrated.resize(token_dim);
  fill_uniform(rng, m.branch_bias_calibrated, 0.1);
  m.branch_bias_condition.resize(token_dim);
  fill_uniform(rng, m.branch_bias_condition, 0.1);

  long n_queries = 3L * dims.low_res * dims.low_res;
  m.queries.resize(n_queries, token_dim);
  fill_uniform(rng, m.queries, 1.0);

  m.blocks.resize(num_blocks);
  for (auto& b : m.blocks) {
    b.wq.resize(token_dim, token_dim);
    b.wk.resize(token_dim, token_dim);
    b.wv.resize(token_dim, token_dim);
    b.wo.resize(token_dim, token_dim);
    fill_uniform(rng, b.wq, s_tok);
    fill_uniform(rng, b.wk, s_tok);
    fill_uniform(rng, b.wv, s_tok);
    fill_uniform(rng, b.wo, s_tok);
  }

  m.out_proj.resize(dims.low_channels, token_dim);
  fill_uniform(rng, m.out_proj, s_tok);
  m.out_bias.resize(dims.low_channels);
  fill_uniform(rng, m.out_bias, 0.01);
  return m;
}

namespace {

void append_image_tokens(const Image& img, const CameraEmbedding& emb, TokenBranch branch,
                         int view_index, const ReconModel& model, TokenSequence* seq) {
  int patch = model.patch;
  if (img.width != img.height) throw std::invalid_argument("tokenize_views: images must be square");
  if (img.width % patch != 0)
    throw std::invalid_argument("tokenize_views: image size not divisible by patch size");
  int per_side = img.width / patch;

  Eigen::VectorXd emb_vec(model.emb_dim);
  for (int i = 0; i < model.emb_dim; ++i) emb_vec[i] = emb.values[i];
  Eigen::VectorXd emb_term = model.emb_proj * emb_vec;
  const Eigen::VectorXd& bias = branch == TokenBranch::Calibrated ? model.branch_bias_calibrated
                                                                  : model.branch_bias_condition;

  Eigen::VectorXd pix(patch * patch * 3);
  for (int py = 0; py < per_side; ++py) {
    for (int px = 0; px < per_side; ++px) {
      int k = 0;
      for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x) {
          const std::uint8_t* p = img.px(px * patch + x, py * patch + y);
          for (int c = 0; c < 3; ++c) pix[k++] = p[c] / 255.0;
        }
      ViewToken token;
      token.feature = model.patch_embed * pix + emb_term + bias;
      token.embedding = emb;
      token.branch = branch;
      token.view_index = view_index;
      seq->tokens.push_back(std::move(token));
    }
  }
}

}  // namespace

TokenSequence tokenize_views(const ViewSet& views, const std::optional<Image>& condition,
                             const ReconModel& model) {
  int size = views.images[0].width;
  for (const Image& img : views.images)
    if (img.width != size || img.height != size)
      throw std::invalid_argument("tokenize_views: views must share one resolution");

  TokenSequence seq;
  seq.patch = model.patch;
  for (int v = 0; v < 6; ++v) {
    CameraEmbedding emb = camera_embedding(views.poses[v]);
    append_image_tokens(views.images[v], emb, TokenBranch::Calibrated, v, model, &seq);
  }
  if (condition) {
    append_image_tokens(*condition, camera_embedding(std::nullopt), TokenBranch::Condition, -1,
                        model, &seq);
  }
  return seq;
}

Triplane forward(const ReconModel& model, const TokenSequence& tokens, AttentionStats* stats) {
  if (tokens.tokens.empty()) throw std::invalid_argument("forward: empty token sequence");
  long n = static_cast<long>(tokens.tokens.size());
  int d = model.token_dim;
  if (tokens.tokens[0].feature.size() != d)
    throw std::invalid_argument("forward: token feature width mismatch");

  Eigen::MatrixXd keys(n, d);
  for (long i = 0; i < n; ++i) keys.row(i) = tokens.tokens[i].feature.transpose();

  if (stats) {
    stats->row_sum_min.clear();
    stats->row_sum_max.clear();
  }

  int head_dim = d / model.heads;
  double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  Eigen::MatrixXd q = model.queries;
  for (const ReconModel::Block& block : model.blocks) {
    Eigen::MatrixXd qp = q * block.wq;
    Eigen::MatrixXd kp = keys * block.wk;
    Eigen::MatrixXd vp = keys * block.wv;

    Eigen::MatrixXd attended(q.rows(), d);
    double sum_min = std::numeric_limits<double>::infinity(), sum_max = 0;
    for (int h = 0; h < model.heads; ++h) {
      auto qh = qp.middleCols(h * head_dim, head_dim);
      auto kh = kp.middleCols(h * head_dim, head_dim);
      auto vh = vp.middleCols(h * head_dim, head_dim);
      Eigen::MatrixXd logits = qh * kh.transpose() * inv_sqrt;
      for (long r = 0; r < logits.rows(); ++r) {
        double mx = logits.row(r).maxCoeff();
        Eigen::ArrayXd w = (logits.row(r).array() - mx).exp();
        double total = w.sum();
        sum_min = std::min(sum_min, (w / total).sum());
        sum_max = std::max(sum_max, (w / total).sum());
        attended.block(r, h * head_dim, 1, head_dim) = (w / total).matrix().transpose() * vh;
      }
    }
    q += attended * block.wo;
    if (stats) {
      stats->row_sum_min.push_back(sum_min);
      stats->row_sum_max.push_back(sum_max);
    }
  }

  Eigen::MatrixXd low = q * model.out_proj.transpose();
  low.rowwise() += model.out_bias.transpose();

  Triplane tp = make_low(model.dims);
  long per_plane = static_cast<long>(model.dims.low_res) * model.dims.low_res;
  for (int plane = 0; plane < 3; ++plane)
    tp.planes[plane] = low.middleRows(plane * per_plane, per_plane);
  return tp;
}

SdfGrid reconstruct_learned(const ViewSet& views, const std::optional<Image>& condition,
                            const ReconModel& model, const UnpatchifyWeights& weights,
                            const SdfDecoder& decoder, int grid_resolution) {
  TokenSequence tokens = tokenize_views(views, condition, model);
  Triplane low = forward(model, tokens);
  Triplane high = unpatchify(low, weights);
  return field_from_triplane(high, decoder, grid_resolution);
}

// ---- Space carving -------------------------------------------------------

namespace {

// Felzenszwalb-Huttenlocher 1D squared distance transform.
void dt_1d(const std::vector<double>& f, std::vector<double>& out, std::vector<int>& v,
           std::vector<double>& z) {
  int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int qi = 1; qi < n; ++qi) {
    double s;
    while (true) {
      s = ((f[qi] + qi * qi) - (f[v[k]] + v[k] * v[k])) / (2.0 * qi - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = qi;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int qi = 0; qi < n; ++qi) {
    while (z[k + 1] < qi) ++k;
    double dq = qi - v[k];
    out[qi] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> distance_transform_3d(const std::vector<std::uint8_t>& on, int nx, int ny,
                                          int nz) {
  const double inf = 1e18;
  std::vector<double> d(on.size());
  for (std::size_t i = 0; i < on.size(); ++i) d[i] = on[i] ? 0.0 : inf;

  int nmax = std::max({nx, ny, nz});
  std::vector<double> f(nmax), out(nmax), z(nmax + 1);
  std::vector<int> v(nmax);
  auto idx = [nx, ny](int x, int y, int zi) {
    return (static_cast<std::size_t>(zi) * ny + y) * nx + x;
  };

  for (int zi = 0; zi < nz; ++zi)
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[x] = d[idx(x, y, zi)];
      dt_1d({f.begin(), f.begin() + nx}, out, v, z);
      for (int x = 0; x < nx; ++x) d[idx(x, y, zi)] = out[x];
    }
  for (int zi = 0; zi < nz; ++zi)
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) f[y] = d[idx(x, y, zi)];
      dt_1d({f.begin(), f.begin() + ny}, out, v, z);
      for (int y = 0; y < ny; ++y) d[idx(x, y, zi)] = out[y];
    }
  for (int y = 0; y < ny; ++y)
    for (int x = 0; x < nx; ++x) {
      for (int zi = 0; zi < nz; ++zi) f[zi] = d[idx(x, y, zi)];
      dt_1d({f.begin(), f.begin() + nz}, out, v, z);
      for (int zi = 0; zi < nz; ++zi) d[idx(x, y, zi)] = out[zi];
    }

  for (double& val : d) val = std::sqrt(val);
  return d;
}

CarveResult carve(const std::vector<SilhouetteView>& views, const CarveConfig& cfg) {
  if (views.empty()) throw std::invalid_argument("carve: no views provided");
  if (cfg.resolution < 16) throw std::invalid_argument("carve: resolution must be >= 16");
  if (!(cfg.threshold > 0 && cfg.threshold < 1))
    throw std::invalid_argument("carve: threshold must be in (0,1)");

  int n = cfg.resolution;
  CarveResult result;
  result.sdf = SdfGrid(n);
  result.occupancy.assign(result.sdf.values.size(), 1);

  struct ProjView {
    CameraMatrices matrices;
    const Mask* mask;
  };
  std::vector<ProjView> proj;
  proj.reserve(views.size());
  for (const SilhouetteView& sv : views)
    proj.push_back({pose_to_matrices(sv.pose, sv.mask.width, sv.mask.height), &sv.mask});

  for (int iz = 0; iz < n; ++iz)
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        Eigen::Vector3d p = result.sdf.point(ix, iy, iz);
        bool inside_all = true;
        for (const ProjView& pv : proj) {
          Eigen::Vector2d pixel;
          if (!pv.matrices.project(p, &pixel)) {
            inside_all = false;
            break;
          }
          int px = static_cast<int>(std::floor(pixel.x()));
          int py = static_cast<int>(std::floor(pixel.y()));
          if (px < 0 || py < 0 || px >= pv.mask->width || py >= pv.mask->height ||
              pv.mask->at(px, py) < cfg.threshold) {
            inside_all = false;
            break;
          }
        }
        if (!inside_all) result.occupancy[result.sdf.index(ix, iy, iz)] = 0;
      }

  result.occupied_count = 0;
  for (std::uint8_t o : result.occupancy) result.occupied_count += o;
  if (result.occupied_count == 0)
    throw std::runtime_error("carve: empty hull, no voxel survived all silhouettes");

  // Signed distance in voxel units: +-0.5 at boundary voxels, zero crossing
  // midway between an occupied voxel and its unoccupied neighbor.
  std::vector<std::uint8_t> complement(result.occupancy.size());
  for (std::size_t i = 0; i < complement.size(); ++i) complement[i] = result.occupancy[i] ? 0 : 1;
  std::vector<double> d_to_occ = distance_transform_3d(result.occupancy, n, n, n);
  std::vector<double> d_to_free = distance_transform_3d(complement, n, n, n);

  double voxel = result.sdf.spacing().x();
  double trunc = cfg.truncation_voxels;
  for (std::size_t i = 0; i < result.sdf.values.size(); ++i) {
    double sd = result.occupancy[i] ? -(d_to_free[i] - 0.5) : (d_to_occ[i] - 0.5);
    result.sdf.values[i] = std::clamp(sd, -trunc, trunc) * voxel;
  }
  return result;
}

}  // namespace hy3d
