#pragma once

#include <filesystem>
#include <string>

#include "gdl/map2d.hpp"

namespace gdl::eval {

struct EvalReport {
  double mae = 0.0;     // m
  double rmse = 0.0;    // m
  double silog = 0.0;   // 100 * sqrt(mean d^2 - (mean d)^2), d = ln(pred) - ln(gt)
  double delta1 = 0.0;  // fraction with max(pred/gt, gt/pred) < 1.25
  double delta2 = 0.0;  // ... < 1.25^2
  double delta3 = 0.0;  // ... < 1.25^3
  double coverage = 0.0;  // evaluated pixels / all pixels
  double r_lo = 0.0, r_hi = 0.0;  // ground-truth clamp range, m
  long long valid_count = 0;
};

// Masked depth metrics. The evaluation set is the masked pixels whose
// ground truth lies in [r_lo, r_hi]; pixels outside the clamp never touch
// any metric. Throws EmptySetError when that set is empty and
// InvalidPredictionError when a prediction on it is nonpositive or
// non-finite (the log metrics are undefined there). Delta thresholds are
// strict: a ratio of exactly 1.25 does not count toward delta1.
EvalReport evaluate(const Map2D<double>& pred, const Map2D<double>& gt,
                    const Mask& mask, double r_lo = 3.0, double r_hi = 150.0);

// One named-header CSV row.
std::string report_csv(const EvalReport& report);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);

// Human-readable table; states the SIlog variant in a comment line.
std::string report_table(const EvalReport& report);

}  // namespace gdl::eval
