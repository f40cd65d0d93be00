#include "gdl/rip.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gdl/error.hpp"

namespace gdl::rip {
namespace {

// Gaussian kind: centered at duration/2 with sigma = duration/6, so the
// nominal duration spans +-3 sigma. Tails beyond 8 sigma are treated as zero.
constexpr double kGaussianSigmaFraction = 1.0 / 6.0;
constexpr double kGaussianTailSigmas = 8.0;

double shape_value(ProfileKind kind, double duration, double t) {
  switch (kind) {
    case ProfileKind::kRectangular:
      return (t >= 0.0 && t <= duration) ? 1.0 : 0.0;
    case ProfileKind::kTriangular: {
      if (t < 0.0 || t > duration) return 0.0;
      return 1.0 - std::fabs(2.0 * t / duration - 1.0);
    }
    case ProfileKind::kGaussian: {
      const double sigma = duration * kGaussianSigmaFraction;
      const double z = (t - 0.5 * duration) / sigma;
      if (std::fabs(z) > kGaussianTailSigmas) return 0.0;
      return std::exp(-0.5 * z * z);
    }
  }
  return 0.0;
}

}  // namespace

double TemporalProfile::value(double t) const {
  return amplitude * shape_value(kind, duration, t);
}

std::pair<double, double> TemporalProfile::support() const {
  if (kind == ProfileKind::kGaussian) {
    const double half = kGaussianTailSigmas * duration * kGaussianSigmaFraction;
    return {0.5 * duration - half, 0.5 * duration + half};
  }
  return {0.0, duration};
}

std::vector<double> TemporalProfile::breakpoints() const {
  switch (kind) {
    case ProfileKind::kRectangular:
      return {0.0, duration};
    case ProfileKind::kTriangular:
      return {0.0, 0.5 * duration, duration};
    case ProfileKind::kGaussian:
      return {};  // smooth
  }
  return {};
}

TemporalProfile make_profile(ProfileKind kind, double duration_s, double dt_s) {
  if (!(duration_s > 0.0) || !(dt_s > 0.0))
    throw std::invalid_argument("make_profile: duration and dt must be positive");
  if (duration_s / dt_s < 4.0)
    throw std::invalid_argument("make_profile: need at least 4 samples per duration");

  TemporalProfile p;
  p.kind = kind;
  p.duration = duration_s;
  p.amplitude = 1.0;

  const auto intervals = static_cast<std::size_t>(std::ceil(duration_s / dt_s));
  p.dt = duration_s / static_cast<double>(intervals);  // regularized to span [0, duration]
  p.samples.resize(intervals + 1);
  for (std::size_t i = 0; i <= intervals; ++i)
    p.samples[i] = shape_value(kind, duration_s, p.dt * static_cast<double>(i));
  return p;
}

double attenuation_factor(const AttenuationModel& beta, double range_m) {
  if (range_m < 0.0) throw std::invalid_argument("attenuation_factor: negative range");
  if (beta.kind == AttenuationKind::kNone) return 1.0;
  if (beta.kappa < 0.0) throw std::invalid_argument("attenuation_factor: negative kappa");
  return std::exp(-2.0 * beta.kappa * range_m);  // round trip
}

double RangeIntensityProfile::value(double r) const {
  if (samples.size() < 2 || !(dr > 0.0))
    throw std::invalid_argument("RangeIntensityProfile: invalid grid");
  if (!(r >= r_min) || !(r <= r_max()))
    throw OutOfGridError("range " + std::to_string(r) + " m outside RIP grid [" +
                         std::to_string(r_min) + ", " + std::to_string(r_max()) + "]");
  const double pos = (r - r_min) / dr;
  const auto i = std::min(static_cast<std::size_t>(pos), samples.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return samples[i] + frac * (samples[i + 1] - samples[i]);
}

namespace {

// Integrates gate(t - delay) * pulse(t - echo_shift) over t. Both factors are
// piecewise polynomials, so splitting at every (shifted) breakpoint and
// applying a two-point Gauss rule per piece integrates the product exactly
// for the rectangular and triangular kinds; the gaussian kind is smooth and
// converges at fourth order in the node spacing.
double correlate_at_shift(const TemporalProfile& pulse, const TemporalProfile& gate,
                          double delay, double echo_shift) {
  const auto [pulse_lo, pulse_hi] = pulse.support();
  const auto [gate_lo, gate_hi] = gate.support();
  const double lo = std::max(gate_lo + delay, pulse_lo + echo_shift);
  const double hi = std::min(gate_hi + delay, pulse_hi + echo_shift);
  if (!(hi > lo)) return 0.0;

  std::vector<double> nodes;
  nodes.push_back(lo);
  nodes.push_back(hi);
  for (double b : gate.breakpoints()) {
    const double t = b + delay;
    if (t > lo && t < hi) nodes.push_back(t);
  }
  for (double b : pulse.breakpoints()) {
    const double t = b + echo_shift;
    if (t > lo && t < hi) nodes.push_back(t);
  }
  const double step = std::min(pulse.dt, gate.dt);
  if (step > 0.0) {
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t < hi; t += step)
      if (t > lo) nodes.push_back(t);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [&](double a, double b) { return b - a < 1e-6 * step; }),
              nodes.end());

  constexpr double kGauss = 0.28867513459481288225;  // 1/(2*sqrt(3))
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double u = nodes[i], v = nodes[i + 1];
    const double mid = 0.5 * (u + v), h = v - u;
    const double x1 = mid - kGauss * h;
    const double x2 = mid + kGauss * h;
    acc += 0.5 * h *
           (gate.value(x1 - delay) * pulse.value(x1 - echo_shift) +
            gate.value(x2 - delay) * pulse.value(x2 - echo_shift));
  }
  return acc;
}

}  // namespace

RangeIntensityProfile synthesize_rip(const TemporalProfile& pulse,
                                     const TemporalProfile& gate,
                                     double delay_s,
                                     const AttenuationModel& beta,
                                     double r_min, double r_max, double dr) {
  if (!(r_min >= 0.0) || !(r_max > r_min) || !(dr > 0.0))
    throw std::invalid_argument("synthesize_rip: need 0 <= r_min < r_max and dr > 0");
  if (!(pulse.dt > 0.0) || !(gate.dt > 0.0) || pulse.samples.size() < 2 ||
      gate.samples.size() < 2)
    throw std::invalid_argument("synthesize_rip: profiles lack a usable sample grid");
  if (!std::isfinite(delay_s))
    throw std::invalid_argument("synthesize_rip: non-finite delay");

  RangeIntensityProfile rip;
  rip.r_min = r_min;
  rip.dr = dr;
  rip.delay = delay_s;
  const auto n = static_cast<std::size_t>(std::floor((r_max - r_min) / dr + 0.5)) + 1;
  rip.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = r_min + dr * static_cast<double>(i);
    const double c = correlate_at_shift(pulse, gate, delay_s, 2.0 * r / kSpeedOfLight);
    rip.samples[i] = attenuation_factor(beta, r) * c;
  }
  return rip;
}

std::pair<double, double> rip_support(const RangeIntensityProfile& rip) {
  const double peak = *std::max_element(rip.samples.begin(), rip.samples.end());
  if (!(peak > 0.0)) throw EmptySupportError("rip_support: all-zero profile");
  const double threshold = 1e-9 * peak;
  std::size_t lo = 0;
  while (lo < rip.samples.size() && rip.samples[lo] < threshold) ++lo;
  std::size_t hi = rip.samples.size() - 1;
  while (hi > lo && rip.samples[hi] < threshold) --hi;
  return {rip.range_at(lo), rip.range_at(hi)};
}

RangeIntensityProfile scaled_to_peak(const RangeIntensityProfile& rip, double peak) {
  if (!(peak > 0.0)) throw std::invalid_argument("scaled_to_peak: peak must be positive");
  const double current = *std::max_element(rip.samples.begin(), rip.samples.end());
  if (!(current > 0.0)) throw EmptySupportError("scaled_to_peak: all-zero profile");
  RangeIntensityProfile out = rip;
  const double k = peak / current;
  for (double& v : out.samples) v *= k;
  return out;
}

std::pair<double, double> overlap_span(const std::vector<RangeIntensityProfile>& rips) {
  if (rips.size() < 2)
    throw std::invalid_argument("overlap_span: need at least two profiles");
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i + 1 < rips.size(); ++i) {
    const auto a = rip_support(rips[i]);
    const auto b = rip_support(rips[i + 1]);
    const double olo = std::max(a.first, b.first);
    const double ohi = std::min(a.second, b.second);
    if (ohi > olo) {
      lo = any ? std::min(lo, olo) : olo;
      hi = any ? std::max(hi, ohi) : ohi;
      any = true;
    }
  }
  if (!any) throw EmptySupportError("overlap_span: consecutive profiles do not overlap");
  return {lo, hi};
}

void write_csv(const RangeIntensityProfile& rip, std::ostream& out) {
  out << "r_m,c\n";
  for (std::size_t i = 0; i < rip.samples.size(); ++i)
    out << rip.range_at(i) << ',' << rip.samples[i] << '\n';
}

ProfileKind profile_kind_from_string(const std::string& name) {
  if (name == "rectangular") return ProfileKind::kRectangular;
  if (name == "triangular") return ProfileKind::kTriangular;
  if (name == "gaussian") return ProfileKind::kGaussian;
  throw std::invalid_argument("unknown profile kind: " + name);
}

}  // namespace gdl::rip
