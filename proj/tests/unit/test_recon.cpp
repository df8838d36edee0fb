#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hy3d/recon.hpp"
#include "hy3d/renderer.hpp"

using namespace hy3d;

namespace {

// Small geometry for fast forward passes; the full-size configuration shares
// the same code paths.
TriplaneDims tiny_dims() {
  TriplaneDims d;
  d.low_res = 8;
  d.low_channels = 48;
  d.high_channels = 6;
  return d;
}

Image noise_image(int size, std::uint64_t seed) {
  Image img(size, size);
  Rng rng(seed);
  for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

ViewSet noise_views(int size, std::uint64_t seed) {
  ViewSet v;
  for (int i = 0; i < 6; ++i) v.images[i] = noise_image(size, seed + i);
  return v;
}

std::vector<SilhouetteView> orbit_silhouettes(const Sdf& shape, int resolution) {
  Rng rng(0);
  FixtureSet fs = render_fixture_set(shape, resolution, false, rng);
  std::vector<SilhouetteView> views;
  for (int i = 0; i < 6; ++i) views.push_back({fs.silhouettes[i], fs.views.poses[i]});
  return views;
}

}  // namespace

TEST_CASE("tokenize: token counts and branch tags") {
  ReconModel model = ReconModel::random(60, tiny_dims(), 64, 16, 4, 2);
  ViewSet v = noise_views(320, 61);

  SUBCASE("six 320x320 views at patch 16 give 6*400 calibrated tokens") {
    TokenSequence seq = tokenize_views(v, std::nullopt, model);
    CHECK(seq.tokens.size() == 6 * 400);
    for (const auto& t : seq.tokens) {
      CHECK(t.branch == TokenBranch::Calibrated);
      CHECK_FALSE(t.embedding.is_zero());
      CHECK(t.view_index >= 0);
      CHECK(t.view_index < 6);
    }
  }

  SUBCASE("condition tokens carry exactly the zero embedding") {
    TokenSequence seq = tokenize_views(v, noise_image(320, 67), model);
    CHECK(seq.tokens.size() == 7 * 400);
    int condition_tokens = 0;
    for (const auto& t : seq.tokens) {
      if (t.branch == TokenBranch::Condition) {
        ++condition_tokens;
        CHECK(t.embedding.is_zero());
        CHECK(t.view_index == -1);
      }
    }
    CHECK(condition_tokens == 400);
  }

  SUBCASE("malformed inputs are rejected") {
    ViewSet bad = v;
    bad.images[2] = noise_image(64, 68);
    CHECK_THROWS(tokenize_views(bad, std::nullopt, model));
    Image rect(30, 20);
    ViewSet rect_views;
    for (auto& img : rect_views.images) img = rect;
    CHECK_THROWS(tokenize_views(rect_views, std::nullopt, model));
  }
}

TEST_CASE("forward: permutation of calibrated views leaves the output unchanged") {
  ReconModel model = ReconModel::random(62, tiny_dims(), 64, 16, 4, 2);
  ViewSet v = noise_views(64, 63);
  TokenSequence seq = tokenize_views(v, noise_image(64, 64), model);

  Triplane base = forward(model, seq);

  // Reverse the calibrated views as whole blocks (tokens keep their own
  // embeddings); attention treats keys as an unordered set.
  TokenSequence permuted = seq;
  const int per_view = (64 / 16) * (64 / 16);
  std::vector<ViewToken> reordered;
  for (int view = 5; view >= 0; --view)
    for (int k = 0; k < per_view; ++k)
      reordered.push_back(seq.tokens[static_cast<std::size_t>(view) * per_view + k]);
  for (std::size_t i = 6 * per_view; i < seq.tokens.size(); ++i)
    reordered.push_back(seq.tokens[i]);
  permuted.tokens = reordered;

  Triplane shuffled = forward(model, permuted);
  for (int p = 0; p < 3; ++p)
    CHECK((base.planes[p] - shuffled.planes[p]).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("forward: attention rows sum to one and outputs are finite") {
  ReconModel model = ReconModel::random(65, tiny_dims(), 64, 16, 4, 2);
  ViewSet v = noise_views(64, 66);
  TokenSequence seq = tokenize_views(v, std::nullopt, model);
  AttentionStats stats;
  Triplane out = forward(model, seq, &stats);
  CHECK(out.all_finite());
  REQUIRE(stats.row_sum_min.size() == 2);
  for (std::size_t b = 0; b < stats.row_sum_min.size(); ++b) {
    CHECK(std::abs(stats.row_sum_min[b] - 1.0) <= 1e-6);
    CHECK(std::abs(stats.row_sum_max[b] - 1.0) <= 1e-6);
  }
}

TEST_CASE("forward: sensitive to the condition image") {
  ReconModel model = ReconModel::random(69, tiny_dims(), 64, 16, 4, 2);
  ViewSet v = noise_views(64, 70);
  Triplane with_a = forward(model, tokenize_views(v, noise_image(64, 71), model));
  Triplane with_b = forward(model, tokenize_views(v, noise_image(64, 72), model));
  double max_delta = 0.0;
  for (int p = 0; p < 3; ++p)
    max_delta = std::max(max_delta, (with_a.planes[p] - with_b.planes[p]).cwiseAbs().maxCoeff());
  CHECK(max_delta > 0.0);
}

TEST_CASE("forward rejects empty and mismatched token sequences") {
  ReconModel model = ReconModel::random(73, tiny_dims(), 64, 16, 4, 2);
  TokenSequence empty;
  CHECK_THROWS(forward(model, empty));

  TokenSequence bad;
  ViewToken t;
  t.feature = Eigen::VectorXd::Zero(32);  // wrong width
  bad.tokens.push_back(t);
  CHECK_THROWS(forward(model, bad));
}

TEST_CASE("reconstruct_learned is deterministic end to end") {
  TriplaneDims dims = tiny_dims();
  ReconModel model = ReconModel::random(74, dims, 64, 16, 4, 2);
  UnpatchifyWeights w = UnpatchifyWeights::random(dims, 75);
  SdfDecoder dec = SdfDecoder::random(76, dims.high_channels, 16);
  ViewSet v = noise_views(32, 77);
  std::optional<Image> cond = noise_image(32, 78);

  SdfGrid a = reconstruct_learned(v, cond, model, w, dec, 16);
  SdfGrid b = reconstruct_learned(v, cond, model, w, dec, 16);
  CHECK(a.all_finite());
  REQUIRE(a.values.size() == b.values.size());
  for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

  SdfGrid without = reconstruct_learned(v, std::nullopt, model, w, dec, 16);
  double delta = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    delta = std::max(delta, std::abs(a.values[i] - without.values[i]));
  CHECK(delta > 0.0);
}

TEST_CASE("exact distance transform matches brute force on a random pattern") {
  const int nx = 9, ny = 7, nz = 6;
  std::vector<std::uint8_t> on(static_cast<std::size_t>(nx) * ny * nz, 0);
  Rng rng(79);
  for (auto& v : on) v = (rng() % 5 == 0) ? 1 : 0;
  on[0] = 1;  // ensure non-empty
  std::vector<double> d2 = distance_transform_3d(on, nx, ny, nz);
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        double best = 1e18;
        for (int z2 = 0; z2 < nz; ++z2)
          for (int y2 = 0; y2 < ny; ++y2)
            for (int x2 = 0; x2 < nx; ++x2)
              if (on[(static_cast<std::size_t>(z2) * ny + y2) * nx + x2]) {
                double dd = double(x - x2) * (x - x2) + double(y - y2) * (y - y2) +
                            double(z - z2) * (z - z2);
                best = std::min(best, dd);
              }
        std::size_t idx = (static_cast<std::size_t>(z) * ny + y) * nx + x;
        CHECK(d2[idx] == doctest::Approx(std::sqrt(best)).epsilon(1e-12));
      }
}

TEST_CASE("carving a sphere keeps every interior voxel (visual-hull soundness)") {
  auto sphere = make_sphere(0.4);
  auto views = orbit_silhouettes(*sphere, 192);
  CarveConfig cfg;
  cfg.resolution = 48;
  CarveResult result = carve(views, cfg);
  CHECK(result.occupied_count > 0);

  const SdfGrid& g = result.sdf;
  double voxel = g.spacing().x();
  for (int iz = 0; iz < cfg.resolution; ++iz)
    for (int iy = 0; iy < cfg.resolution; ++iy)
      for (int ix = 0; ix < cfg.resolution; ++ix) {
        Eigen::Vector3d p = g.point(ix, iy, iz);
        // Strictly inside (with a pixel-safety margin of one voxel width).
        if (sphere->eval(p) < -voxel) {
          CHECK(result.occupancy[g.index(ix, iy, iz)] == 1);
          CHECK(g.at(ix, iy, iz) < 0.0);
        }
      }
  // SDF is truncated and signed consistently with the occupancy.
  double bound = cfg.truncation_voxels * voxel + 1e-12;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    CHECK(std::abs(g.values[i]) <= bound);
    if (result.occupancy[i])
      CHECK(g.values[i] <= 0.0);
    else
      CHECK(g.values[i] > 0.0);
  }
}

TEST_CASE("carving monotonicity: adding a view never grows the hull") {
  auto sphere = make_sphere(0.4);
  auto views = orbit_silhouettes(*sphere, 160);
  CarveConfig cfg;
  cfg.resolution = 32;
  CarveResult all6 = carve(views, cfg);
  std::vector<SilhouetteView> three(views.begin(), views.begin() + 3);
  CarveResult first3 = carve(three, cfg);
  CHECK(first3.occupied_count >= all6.occupied_count);
  for (std::size_t i = 0; i < all6.occupancy.size(); ++i)
    if (all6.occupancy[i]) CHECK(first3.occupancy[i] == 1);
}

TEST_CASE("orbit-only carving cannot see a top-pole dent") {
  auto plain = make_sphere(0.45);
  auto dented = make_dented_sphere(0.45, Eigen::Vector3d(0, 0, 1), 0.12, 0.10);
  CarveConfig cfg;
  cfg.resolution = 48;
  CarveResult hull = carve(orbit_silhouettes(*dented, 256), cfg);

  // Count voxels inside the analytic plain sphere: the hull of the dented
  // shape from side views keeps at least 99% of that volume (no dent carved).
  SdfGrid probe(cfg.resolution);
  std::size_t plain_volume = 0, hull_volume_in_plain = 0;
  for (int iz = 0; iz < cfg.resolution; ++iz)
    for (int iy = 0; iy < cfg.resolution; ++iy)
      for (int ix = 0; ix < cfg.resolution; ++ix)
        if (plain->eval(probe.point(ix, iy, iz)) <= 0.0) {
          ++plain_volume;
          if (hull.occupancy[probe.index(ix, iy, iz)]) ++hull_volume_in_plain;
        }
  CHECK(hull_volume_in_plain >= static_cast<std::size_t>(0.99 * plain_volume));

  // In particular the dent region itself (outside the true dented shape but
  // inside the plain sphere) stays occupied.
  Eigen::Vector3d dent_probe(0.0, 0.0, 0.40);
  CHECK(dented->eval(dent_probe) > 0.0);
  int ix = static_cast<int>(std::lround((dent_probe.x() + 1.0) / probe.spacing().x()));
  int iy = static_cast<int>(std::lround((dent_probe.y() + 1.0) / probe.spacing().y()));
  int iz = static_cast<int>(std::lround((dent_probe.z() + 1.0) / probe.spacing().z()));
  CHECK(hull.occupancy[probe.index(ix, iy, iz)] == 1);
}

TEST_CASE("carve rejects bad configurations and empty hulls") {
  auto sphere = make_sphere(0.3);
  auto views = orbit_silhouettes(*sphere, 64);
  CarveConfig cfg;
  cfg.resolution = 8;
  CHECK_THROWS(carve(views, cfg));
  cfg.resolution = 32;
  cfg.threshold = 1.5;
  CHECK_THROWS(carve(views, cfg));
  CHECK_THROWS(carve({}, CarveConfig{}));

  // All-empty silhouettes leave no voxel -> explicit empty-hull error.
  std::vector<SilhouetteView> blank = views;
  for (auto& v : blank) std::fill(v.mask.on.begin(), v.mask.on.end(), 0);
  CHECK_THROWS_AS(carve(blank, CarveConfig{}), std::runtime_error);
}
