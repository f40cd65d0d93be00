#include "gdl/eval.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "gdl/error.hpp"

namespace gdl::eval {

EvalReport evaluate(const Map2D<double>& pred, const Map2D<double>& gt,
                    const Mask& mask, double r_lo, double r_hi) {
  if (pred.empty() || !pred.same_shape(gt) ||
      gt.width() != mask.width() || gt.height() != mask.height())
    throw std::invalid_argument("evaluate: map shapes must match");
  if (!std::isfinite(r_lo) || !std::isfinite(r_hi) || !(0.0 < r_lo) ||
      !(r_lo < r_hi))
    throw std::invalid_argument("evaluate: need 0 < r_lo < r_hi");

  std::vector<double> abs_err, sq_err, logd, logd2;
  long long d1 = 0, d2 = 0, d3 = 0;
  constexpr double kT1 = 1.25;
  constexpr double kT2 = 1.25 * 1.25;
  constexpr double kT3 = 1.25 * 1.25 * 1.25;

  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      if (!mask.at(x, y)) continue;
      const double r = gt.at(x, y);
      if (!(r >= r_lo && r <= r_hi)) continue;  // NaN gt is excluded here too
      const double p = pred.at(x, y);
      if (!std::isfinite(p) || p <= 0.0)
        throw InvalidPredictionError(
            "evaluate: nonpositive or non-finite prediction in the "
            "evaluation set");
      const double e = p - r;
      abs_err.push_back(std::fabs(e));
      sq_err.push_back(e * e);
      const double d = std::log(p) - std::log(r);
      logd.push_back(d);
      logd2.push_back(d * d);
      const double ratio = p > r ? p / r : r / p;
      d1 += ratio < kT1;
      d2 += ratio < kT2;
      d3 += ratio < kT3;
    }

  const auto n = static_cast<long long>(abs_err.size());
  if (n == 0)
    throw EmptySetError("evaluate: no masked pixel has ground truth inside "
                        "the clamp range");

  const double inv_n = 1.0 / static_cast<double>(n);
  EvalReport rep;
  rep.mae = pairwise_sum(abs_err) * inv_n;
  rep.rmse = std::sqrt(pairwise_sum(sq_err) * inv_n);
  const double mean_d = pairwise_sum(logd) * inv_n;
  const double mean_d2 = pairwise_sum(logd2) * inv_n;
  rep.silog = 100.0 * std::sqrt(std::max(0.0, mean_d2 - mean_d * mean_d));
  rep.delta1 = static_cast<double>(d1) * inv_n;
  rep.delta2 = static_cast<double>(d2) * inv_n;
  rep.delta3 = static_cast<double>(d3) * inv_n;
  rep.coverage = static_cast<double>(n) / static_cast<double>(gt.size());
  rep.r_lo = r_lo;
  rep.r_hi = r_hi;
  rep.valid_count = n;
  return rep;
}

std::string report_csv(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "mae_m,rmse_m,silog,delta1,delta2,delta3,coverage,"
                "valid_count,r_lo_m,r_hi_m\n"
                "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%lld,%.10g,%.10g\n",
                r.mae, r.rmse, r.silog, r.delta1, r.delta2, r.delta3,
                r.coverage, r.valid_count, r.r_lo, r.r_hi);
  return buf;
}

void write_report_csv(const EvalReport& report,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_report_csv: cannot open " + path.string());
  out << report_csv(report);
  if (!out) throw IoError("write_report_csv: write failed for " + path.string());
}

std::string report_table(const EvalReport& r) {
  char buf[1024];
  std::snprintf(
      buf, sizeof(buf),
      "# depth metrics over %lld pixels, gt clamp [%.6g, %.6g] m\n"
      "# silog = 100*sqrt(mean(d^2) - mean(d)^2), d = ln(pred) - ln(gt)\n"
      "mae      %12.6f m\n"
      "rmse     %12.6f m\n"
      "silog    %12.6f\n"
      "delta1   %12.6f\n"
      "delta2   %12.6f\n"
      "delta3   %12.6f\n"
      "coverage %12.6f\n",
      r.valid_count, r.r_lo, r.r_hi, r.mae, r.rmse, r.silog, r.delta1,
      r.delta2, r.delta3, r.coverage);
  return buf;
}

}  // namespace gdl::eval
