#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gdl::rip {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

enum class ProfileKind { kRectangular, kTriangular, kGaussian };

// Laser-pulse or camera-gate intensity shape over time, supported on
// [0, duration] (the gaussian kind keeps its analytic tails). Samples
// tabulate the shape on a uniform grid; value() evaluates the underlying
// parametric shape, which is what the correlator integrates.
struct TemporalProfile {
  ProfileKind kind = ProfileKind::kRectangular;
  double duration = 0.0;   // s
  double amplitude = 1.0;  // peak value, dimensionless
  double dt = 0.0;         // sample step, s
  std::vector<double> samples;

  double value(double t) const;
  // Interval outside which value() is zero (or negligible for gaussian).
  std::pair<double, double> support() const;
  // Kink/jump positions of the shape, relative to t = 0.
  std::vector<double> breakpoints() const;
};

TemporalProfile make_profile(ProfileKind kind, double duration_s, double dt_s);

enum class AttenuationKind { kNone, kBeerLambert };

// Distance-dependent atmospheric factor applied to the profile; Beer-Lambert
// uses the round-trip path, exp(-2*kappa*r).
struct AttenuationModel {
  AttenuationKind kind = AttenuationKind::kNone;
  double kappa = 0.0;  // extinction coefficient, 1/m
};

double attenuation_factor(const AttenuationModel& beta, double range_m);

// Intensity-vs-range response of one gated slice on a uniform range grid.
struct RangeIntensityProfile {
  double r_min = 0.0;  // m
  double dr = 0.0;     // m
  double delay = 0.0;  // gate delay, s
  std::vector<double> samples;

  double r_max() const { return r_min + dr * (static_cast<double>(samples.size()) - 1.0); }
  double range_at(std::size_t i) const { return r_min + dr * static_cast<double>(i); }
  // Linear interpolation on the grid. Throws OutOfGridError outside it.
  double value(double r) const;
};

// Correlates gate (delayed by delay_s) against the pulse echo from range r
// and scales by the attenuation factor. The integral is evaluated piecewise
// between profile breakpoints with two-point Gauss quadrature, which is
// exact for the polynomial pulse/gate shapes.
RangeIntensityProfile synthesize_rip(const TemporalProfile& pulse,
                                     const TemporalProfile& gate,
                                     double delay_s,
                                     const AttenuationModel& beta,
                                     double r_min, double r_max, double dr);

// Smallest range interval outside which the profile is below 1e-9 of its
// peak. Throws EmptySupportError for an all-zero profile.
std::pair<double, double> rip_support(const RangeIntensityProfile& rip);

// Copy with samples rescaled so the peak equals `peak` (digital counts).
RangeIntensityProfile scaled_to_peak(const RangeIntensityProfile& rip, double peak);

// Union span of consecutive-slice support overlaps; the region where the
// slice triple disambiguates range. Empty overlap throws EmptySupportError.
std::pair<double, double> overlap_span(const std::vector<RangeIntensityProfile>& rips);

// CSV with header "r_m,c", one row per grid point.
void write_csv(const RangeIntensityProfile& rip, std::ostream& out);

ProfileKind profile_kind_from_string(const std::string& name);

}  // namespace gdl::rip
