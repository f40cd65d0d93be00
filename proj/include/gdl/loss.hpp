#pragma once

#include <utility>
#include <vector>

#include "gdl/map2d.hpp"

namespace gdl::loss {

struct LossConfig {
  double lambda_s = 10.0;    // smoothness weight
  double lambda_adv = 0.0;   // adversarial weight; must stay 0 (unsupported)
  // Per-scale weights; scale i pools by factor 2^i. Size defines M.
  std::vector<double> scale_weights = {1.0, 0.5, 0.25, 0.125};
  bool aleatoric = true;

  int scales() const { return static_cast<int>(scale_weights.size()); }
};

// Mean absolute depth difference over valid pixels.
double l1_loss(const Map2D<double>& gt, const Map2D<double>& pred, const Mask& mask);

// Exact negative log of the Laplacian likelihood with scale sigma:
// |r - r_hat| / sigma + log(sigma) + log(2).
double laplace_nll(double r, double r_hat, double sigma);

// Laplacian NLL averaged over valid pixels in the log-variance
// parameterization s = log(sigma), with the constant log(2) dropped:
// mean(|r - r_hat| * exp(-s) + s).
double aleatoric_l1(const Map2D<double>& gt, const Map2D<double>& pred,
                    const Map2D<double>& log_sigma, const Mask& mask);

// Block pooling by `factor` that averages only valid pixels; blocks without
// any valid pixel become invalid in the output mask.
std::pair<Map2D<double>, Mask> downsample_for_scale(const Map2D<double>& map,
                                                    const Mask& mask, int factor);

struct ScaleLevel {
  Map2D<double> gt;
  Map2D<double> pred;
  Map2D<double> log_sigma;
  Mask mask;
};

// Sum of per-level aleatoric losses weighted by scale_weights[i].
double multiscale_aleatoric(const std::vector<ScaleLevel>& levels,
                            const std::vector<double>& scale_weights);

// Builds the factor-2^i pyramid for multiscale_aleatoric. Ground truth uses
// the provided (possibly sparse) mask; prediction and log-variance pool over
// all pixels.
std::vector<ScaleLevel> make_pyramid(const Map2D<double>& gt,
                                     const Map2D<double>& pred,
                                     const Map2D<double>& log_sigma,
                                     const Mask& mask, int scales);

// Edge-aware total variation with forward differences: the per-direction
// mean of |d(pred)| * exp(-|d(guide)|).
double smoothness_loss(const Map2D<double>& pred, const Map2D<double>& guide);

// multiscale_aleatoric + lambda_s * smoothness. A nonzero lambda_adv throws
// UnsupportedFeatureError (no adversarial term is available).
double total_loss(const std::vector<ScaleLevel>& levels, const Map2D<double>& guide,
                  const LossConfig& config);

}  // namespace gdl::loss
