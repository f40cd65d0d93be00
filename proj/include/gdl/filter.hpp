#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "gdl/estimate.hpp"
#include "gdl/map2d.hpp"
#include "gdl/sensor.hpp"

namespace gdl::filter {

// Per-pixel intensity spread max(z) - min(z) across the three slices.
Map2D<double> slice_spread(const sensor::GatedStack& stack);

// Keeps pixels whose slice spread reaches min_spread; a pixel is invalid
// iff spread < min_spread (boundary kept).
Mask snr_filter(const sensor::GatedStack& stack, double min_spread);

// Keeps pixels with log_sigma <= max_log_sigma (boundary kept).
Mask uncertainty_filter(const Map2D<double>& log_sigma, double max_log_sigma);

double coverage(const Mask& mask);

// Smallest log-sigma threshold that keeps at least ceil(c * N) pixels under
// the keep-low convention. Ties at the cut all survive, so on plateaus the
// achieved coverage can exceed c (all-equal values give coverage 1).
double threshold_for_coverage(const Map2D<double>& log_sigma, double c);

// Mirror of threshold_for_coverage for the keep-high spread filter.
double spread_threshold_for_coverage(const Map2D<double>& spread, double c);

struct CurvePoint {
  double threshold;
  double coverage;
  double mae_m;   // NaN when no pixel survives the threshold
  double rmse_m;  // NaN when no pixel survives the threshold
};

struct FilterCurve {
  std::vector<CurvePoint> points;
};

// Coverage-vs-error curves. For each threshold the filter mask is
// intersected with gt_mask; coverage is counted over gt_mask and MAE/RMSE
// are evaluated on the intersection with the standard clamp range. An empty
// cut is recorded with NaN errors instead of failing the whole sweep.
FilterCurve sweep_uncertainty(const estimate::EstimateMaps& maps,
                              const Map2D<double>& gt, const Mask& gt_mask,
                              std::span<const double> thresholds,
                              double r_lo = 3.0, double r_hi = 150.0);

FilterCurve sweep_snr(const estimate::EstimateMaps& maps,
                      const sensor::GatedStack& stack, const Map2D<double>& gt,
                      const Mask& gt_mask, std::span<const double> thresholds,
                      double r_lo = 3.0, double r_hi = 150.0);

// CSV with header threshold,coverage,mae_m,rmse_m.
void write_csv(const FilterCurve& curve, const std::filesystem::path& path);

}  // namespace gdl::filter
