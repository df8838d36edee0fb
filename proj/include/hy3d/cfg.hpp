#pragma once

#include <array>
#include <functional>
#include <utility>

#include "hy3d/image.hpp"
#include "hy3d/mvgrid.hpp"

namespace hy3d {

/// Adaptive classifier-free guidance schedule:
///   w_t     = base + amplitude * (t / t_max)^exponent
///   w_{t,v} = w_t * tau_v
/// with tau_front at azimuth 0 falling to tau_back at azimuth 180.
struct CfgSchedule {
  double base = 2.0;
  double amplitude = 16.0;
  double exponent = 5.0;
  double t_max = 1000.0;
  double tau_front = 1.0;
  double tau_back = 0.5;

  enum class TauInterp { Linear, Cosine };
  TauInterp interp = TauInterp::Linear;

  double base_weight(double t) const;
  double view_tau(double azimuth_deg) const;
  double view_weight(double t, double azimuth_deg) const;
};

/// Per-tile guidance weights on the 3x2 grid layout at one time step.
struct GuidanceWeightMap {
  std::array<double, 6> weights{};  // tile order (row-major ascending azimuth)
  double at_slot(int slot) const { return weights[slot]; }
};

GuidanceWeightMap weight_map(const CfgSchedule& schedule, double t);

/// Per pixel: out = eps_uncond + w(tile) * (eps_cond - eps_uncond).
/// w == 1 reproduces eps_cond exactly; eps_cond == eps_uncond reproduces
/// eps_uncond exactly. Fields must be grid-shaped (height = 3k, width = 2k).
Field guided_prediction(const Field& eps_uncond, const Field& eps_cond,
                        const GuidanceWeightMap& map);

/// Produces (eps_cond, eps_uncond) for the current latent at time t.
using Denoiser = std::function<std::pair<Field, Field>(const Field&, double)>;

/// Deterministic first-order sampler: iterates t from t_max down to 0 over
/// `steps` updates, subtracting rate * guided_prediction each step.
Field sample_loop(Field latent, const Denoiser& denoiser, const CfgSchedule& schedule,
                  int steps, double rate = 0.2);

}  // namespace hy3d
