#include "gdl/filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "gdl/error.hpp"
#include "gdl/eval.hpp"

namespace gdl::filter {

namespace {

void check_stack(const sensor::GatedStack& stack) {
  if (stack.slices[0].empty())
    throw std::invalid_argument("filter: empty slice stack");
  for (const auto& slice : stack.slices)
    if (!slice.same_shape(stack.slices[0]))
      throw std::invalid_argument("filter: slice shape mismatch");
}

}  // namespace

Map2D<double> slice_spread(const sensor::GatedStack& stack) {
  check_stack(stack);
  Map2D<double> spread(stack.width(), stack.height());
  for (int y = 0; y < stack.height(); ++y)
    for (int x = 0; x < stack.width(); ++x) {
      const double z0 = stack.slices[0].at(x, y);
      const double z1 = stack.slices[1].at(x, y);
      const double z2 = stack.slices[2].at(x, y);
      spread.at(x, y) = std::max({z0, z1, z2}) - std::min({z0, z1, z2});
    }
  return spread;
}

Mask snr_filter(const sensor::GatedStack& stack, double min_spread) {
  if (!(min_spread >= 0.0))
    throw std::invalid_argument("snr_filter: threshold must be nonnegative");
  const Map2D<double> spread = slice_spread(stack);
  Mask mask(spread.width(), spread.height());
  for (int y = 0; y < spread.height(); ++y)
    for (int x = 0; x < spread.width(); ++x)
      mask.at(x, y) = spread.at(x, y) >= min_spread ? 1 : 0;
  return mask;
}

Mask uncertainty_filter(const Map2D<double>& log_sigma, double max_log_sigma) {
  if (log_sigma.empty())
    throw std::invalid_argument("uncertainty_filter: empty map");
  for (double s : log_sigma.values())
    if (!std::isfinite(s))
      throw std::invalid_argument("uncertainty_filter: non-finite log-sigma");
  Mask mask(log_sigma.width(), log_sigma.height());
  for (int y = 0; y < log_sigma.height(); ++y)
    for (int x = 0; x < log_sigma.width(); ++x)
      mask.at(x, y) = log_sigma.at(x, y) <= max_log_sigma ? 1 : 0;
  return mask;
}

double coverage(const Mask& mask) {
  if (mask.empty()) throw std::invalid_argument("coverage: empty mask");
  return static_cast<double>(valid_count(mask)) /
         static_cast<double>(mask.size());
}

namespace {

// k-th order statistic with k = ceil(c * N) of the keep-first sorted order.
double quantile_cut(std::vector<double> values, double c, bool keep_low) {
  const auto n = values.size();
  auto k = static_cast<std::size_t>(
      std::ceil(c * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  if (keep_low)
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
  else
    std::nth_element(values.begin(), values.begin() + (k - 1), values.end(),
                     std::greater<>());
  return values[k - 1];
}

}  // namespace

double threshold_for_coverage(const Map2D<double>& log_sigma, double c) {
  if (log_sigma.empty())
    throw std::invalid_argument("threshold_for_coverage: empty map");
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument("threshold_for_coverage: coverage must be in (0, 1]");
  for (double s : log_sigma.values())
    if (!std::isfinite(s))
      throw std::invalid_argument("threshold_for_coverage: non-finite log-sigma");
  return quantile_cut({log_sigma.values().begin(), log_sigma.values().end()},
                      c, /*keep_low=*/true);
}

double spread_threshold_for_coverage(const Map2D<double>& spread, double c) {
  if (spread.empty())
    throw std::invalid_argument("spread_threshold_for_coverage: empty map");
  if (!(c > 0.0 && c <= 1.0))
    throw std::invalid_argument(
        "spread_threshold_for_coverage: coverage must be in (0, 1]");
  for (double s : spread.values())
    if (!std::isfinite(s))
      throw std::invalid_argument("spread_threshold_for_coverage: non-finite spread");
  return quantile_cut({spread.values().begin(), spread.values().end()}, c,
                      /*keep_low=*/false);
}

namespace {

template <typename MaskAt>
FilterCurve sweep_impl(const estimate::EstimateMaps& maps,
                       const Map2D<double>& gt, const Mask& gt_mask,
                       std::span<const double> thresholds, double r_lo,
                       double r_hi, const MaskAt& mask_at) {
  if (maps.depth.empty() || !maps.depth.same_shape(gt) ||
      gt.width() != gt_mask.width() || gt.height() != gt_mask.height())
    throw std::invalid_argument("sweep: map shapes must match");
  if (thresholds.empty())
    throw std::invalid_argument("sweep: need at least one threshold");
  if (thresholds.size() > 1) {
    const bool increasing = thresholds[1] > thresholds[0];
    for (std::size_t i = 1; i < thresholds.size(); ++i) {
      const bool ok = increasing ? thresholds[i] > thresholds[i - 1]
                                 : thresholds[i] < thresholds[i - 1];
      if (!ok)
        throw std::invalid_argument("sweep: thresholds must be strictly monotone");
    }
  }
  const long long gt_total = valid_count(gt_mask);
  if (gt_total == 0)
    throw std::invalid_argument("sweep: ground-truth mask is empty");

  FilterCurve curve;
  curve.points.reserve(thresholds.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double threshold : thresholds) {
    const Mask fmask = mask_at(threshold);
    Mask inter(gt_mask.width(), gt_mask.height());
    long long kept = 0;
    for (int y = 0; y < gt_mask.height(); ++y)
      for (int x = 0; x < gt_mask.width(); ++x) {
        const std::uint8_t v = (gt_mask.at(x, y) && fmask.at(x, y)) ? 1 : 0;
        inter.at(x, y) = v;
        kept += v;
      }
    CurvePoint point{threshold,
                     static_cast<double>(kept) / static_cast<double>(gt_total),
                     nan, nan};
    if (kept > 0) {
      try {
        const eval::EvalReport rep = eval::evaluate(maps.depth, gt, inter, r_lo, r_hi);
        point.mae_m = rep.mae;
        point.rmse_m = rep.rmse;
      } catch (const EmptySetError&) {
        // Clamp removed every surviving pixel; keep the NaN marker.
      }
    }
    curve.points.push_back(point);
  }
  return curve;
}

}  // namespace

FilterCurve sweep_uncertainty(const estimate::EstimateMaps& maps,
                              const Map2D<double>& gt, const Mask& gt_mask,
                              std::span<const double> thresholds, double r_lo,
                              double r_hi) {
  if (!maps.log_sigma.same_shape(maps.depth))
    throw std::invalid_argument("sweep: map shapes must match");
  return sweep_impl(maps, gt, gt_mask, thresholds, r_lo, r_hi,
                    [&](double t) { return uncertainty_filter(maps.log_sigma, t); });
}

FilterCurve sweep_snr(const estimate::EstimateMaps& maps,
                      const sensor::GatedStack& stack, const Map2D<double>& gt,
                      const Mask& gt_mask, std::span<const double> thresholds,
                      double r_lo, double r_hi) {
  check_stack(stack);
  if (stack.width() != gt.width() || stack.height() != gt.height())
    throw std::invalid_argument("sweep: stack shape must match the maps");
  return sweep_impl(maps, gt, gt_mask, thresholds, r_lo, r_hi,
                    [&](double t) { return snr_filter(stack, t); });
}

void write_csv(const FilterCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_csv: cannot open " + path.string());
  out << "threshold,coverage,mae_m,rmse_m\n";
  char buf[256];
  for (const auto& p : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g\n", p.threshold,
                  p.coverage, p.mae_m, p.rmse_m);
    out << buf;
  }
  if (!out) throw IoError("write_csv: write failed for " + path.string());
}

}  // namespace gdl::filter
