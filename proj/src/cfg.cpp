#include "hy3d/cfg.hpp"

#include <cmath>
#include <stdexcept>

namespace hy3d {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double CfgSchedule::base_weight(double t) const {
  if (t < 0 || t > t_max) throw std::domain_error("base_weight: t outside [0, t_max]");
  return base + amplitude * std::pow(t / t_max, exponent);
}

double CfgSchedule::view_tau(double azimuth_deg) const {
  double a = std::fmod(azimuth_deg, 360.0);
  if (a < 0) a += 360.0;
  double delta = a <= 180.0 ? a : 360.0 - a;  // angular distance to the front view
  double u = delta / 180.0;
  if (interp == TauInterp::Cosine) u = (1.0 - std::cos(kPi * u)) / 2.0;
  return tau_front + (tau_back - tau_front) * u;
}

double CfgSchedule::view_weight(double t, double azimuth_deg) const {
  return base_weight(t) * view_tau(azimuth_deg);
}

GuidanceWeightMap weight_map(const CfgSchedule& schedule, double t) {
  GuidanceWeightMap map;
  for (int slot = 0; slot < 6; ++slot)
    map.weights[slot] = schedule.view_weight(t, tile_azimuth(slot));
  return map;
}

Field guided_prediction(const Field& eps_uncond, const Field& eps_cond,
                        const GuidanceWeightMap& map) {
  if (!eps_uncond.same_shape(eps_cond))
    throw std::invalid_argument("guided_prediction: field shapes differ");
  if (eps_uncond.height % ViewGrid::kRows != 0 || eps_uncond.width % ViewGrid::kCols != 0)
    throw std::invalid_argument("guided_prediction: field is not 3x2 grid shaped");
  int tile_h = eps_uncond.height / ViewGrid::kRows;
  int tile_w = eps_uncond.width / ViewGrid::kCols;

  Field out = eps_uncond;
  for (int y = 0; y < out.height; ++y) {
    int row = y / tile_h;
    for (int x = 0; x < out.width; ++x) {
      int slot = row * ViewGrid::kCols + x / tile_w;
      double w = map.at_slot(slot);
      for (int c = 0; c < out.channels; ++c) {
        double u = eps_uncond.at(x, y, c), cnd = eps_cond.at(x, y, c);
        // w == 1 must return eps_cond bit-exactly, not u + (cnd - u).
        out.at(x, y, c) = (w == 1.0) ? cnd : u + w * (cnd - u);
      }
    }
  }
  return out;
}

Field sample_loop(Field latent, const Denoiser& denoiser, const CfgSchedule& schedule,
                  int steps, double rate) {
  if (steps < 1) throw std::invalid_argument("sample_loop: steps must be >= 1");
  for (int i = 0; i < steps; ++i) {
    double t = schedule.t_max * (steps - 1 - i) / (steps > 1 ? steps - 1 : 1);
    auto [eps_cond, eps_uncond] = denoiser(latent, t);
    Field guided = guided_prediction(eps_uncond, eps_cond, weight_map(schedule, t));
    for (std::size_t k = 0; k < latent.v.size(); ++k) latent.v[k] -= rate * guided.v[k];
  }
  return latent;
}

}  // namespace hy3d
