#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gdl/map2d.hpp"
#include "gdl/sensor.hpp"

namespace gdl::estimate {

enum class TimesliceMethod { kRisingEdge, kArgmax, kWeightedAverage };

// Depth from a per-pixel intensity sequence captured at K gate delays.
// Delay k maps to range c * delay_k / 2. Rising-edge returns the first
// range whose intensity reaches threshold * max; argmax breaks ties toward
// the smaller range; weighted average is sum(r_k z_k) / sum(z_k).
// Throws NoSignalError for an all-zero profile.
double estimate_timeslice(std::span<const double> intensities,
                          std::span<const double> delays_s,
                          TimesliceMethod method, double rising_threshold = 0.5);

// Two-slice ratio on an interval where both profiles are linear ramps with
// opposite slopes: r = r0 + (r1 - r0) * z2 / (z1 + z2), clamped to [r0, r1].
// The ratio cancels albedo. Throws NoSignalError when z1 + z2 = 0.
double estimate_triangular_ratio(double z1, double z2, double r0, double r1);

// Normalized slice combination used as the polynomial regressor input.
// Monotone in range over the region where consecutive profiles overlap.
double ratio_feature(double z1, double z2, double z3);

struct PolyRatioModel {
  std::array<double, 6> coeffs{};  // c0..c5, r(q) = sum c_k q^k
  double q_lo = 0.0, q_hi = 0.0;   // ratio interval seen during fitting
  double residual_rmse = 0.0;

  double evaluate(double q) const;
  double estimate(double z1, double z2, double z3) const;
};

// Least-squares 5th-order polynomial of the ratio feature, solved by
// column-equilibrated normal equations. Throws FitFailureError on a
// rank-deficient design matrix.
PolyRatioModel fit_ratio_polynomial(std::span<const std::array<double, 3>> z,
                                    std::span<const double> r);

enum class Activation { kSoftplus };

// Small fully connected network applied per pixel: slice triple in, depth
// and log-variance out. The depth head passes through an affine sigmoid
// onto [range_lo, range_hi]; the log-variance head is unconstrained.
struct PixelRegressor {
  std::vector<int> widths;  // e.g. {3, 32, 32, 2}
  std::vector<std::vector<double>> weights;  // per layer, row-major [out][in]
  std::vector<std::vector<double>> biases;
  Activation activation = Activation::kSoftplus;
  double input_scale = 1.0 / 1023.0;
  double range_lo = 3.0;
  double range_hi = 150.0;

  std::size_t parameter_count() const;
};

PixelRegressor init_regressor(std::span<const int> widths, std::uint64_t seed,
                              double range_lo, double range_hi);

struct Estimate {
  double depth;      // m
  double log_sigma;  // s = log(sigma)
};

// Applies the network to one raw slice triple (counts; normalization is
// internal). Throws std::invalid_argument on non-finite input.
Estimate regressor_forward(const PixelRegressor& model,
                           const std::array<double, 3>& z);

struct PixelSample {
  std::array<double, 3> z;
  double r;
};

struct TrainConfig {
  double learning_rate = 1e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int epochs = 15;
  int batch_size = 32;
  double val_fraction = 0.2;
  bool aleatoric = true;  // false freezes the uncertainty head at s = 0
  std::uint64_t seed = 0;
};

struct EpochStats {
  double train_loss;
  double val_mae;
};

struct TrainResult {
  PixelRegressor best;  // parameters of the best validation-MAE epoch
  PixelRegressor last;  // parameters after the final epoch
  std::vector<EpochStats> history;
  int best_epoch = 0;   // 1-based
};

// Adam training of the per-sample aleatoric loss |r - r_hat| e^{-s} + s
// (plain L1 when aleatoric is off) with exact backpropagation, seeded
// shuffling, and a deterministic train/validation split. Throws
// TrainingFailureError naming the epoch if the loss goes non-finite.
TrainResult train_regressor(const PixelRegressor& init,
                            std::span<const PixelSample> dataset,
                            const TrainConfig& config);

// Loss and gradient of one batch at the current parameters; gradient layout
// matches checkpoint order (per layer: weights row-major, then biases).
// Exposed for gradient verification.
double batch_loss_and_gradient(const PixelRegressor& model,
                               std::span<const PixelSample> batch,
                               bool aleatoric, std::span<double> gradient);

struct EstimateMaps {
  Map2D<double> depth;
  Map2D<double> log_sigma;
};

// Per-pixel application of the regressor over a gated stack (row-parallel).
EstimateMaps infer_maps(const PixelRegressor& model, const sensor::GatedStack& stack);

// Versioned binary checkpoint, magic "GDLR", little-endian throughout.
void save_checkpoint(const PixelRegressor& model, const std::filesystem::path& path);
PixelRegressor load_checkpoint(const std::filesystem::path& path);

// Flattens stack, ground truth and mask into training samples.
std::vector<PixelSample> collect_samples(const sensor::GatedStack& stack,
                                         const Map2D<double>& gt_depth,
                                         const Mask& mask);

}  // namespace gdl::estimate
