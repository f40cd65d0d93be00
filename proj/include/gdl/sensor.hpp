#pragma once

#include <array>
#include <cstdint>

#include "gdl/map2d.hpp"
#include "gdl/rip.hpp"
#include "gdl/scene.hpp"

namespace gdl::sensor {

inline constexpr int kBitDepth = 10;
inline constexpr int kMaxCount = (1 << kBitDepth) - 1;  // 1023

/// Poissonian-Gaussian sensor noise: scaled photon shot noise plus additive
// read noise, so Var(z) = a * signal + b away from the clip bounds.
struct NoiseParams {
  double a = 1.0;      // digital counts per photoelectron-equivalent
  double b = 4.0;      // read-noise variance, counts^2
  std::uint64_t seed = 0;
};

using SliceImage = Map2D<std::uint16_t>;

// The three measured gated slices.
struct GatedStack {
  std::array<SliceImage, 3> slices;

  int width() const { return slices[0].width(); }
  int height() const { return slices[0].height(); }
};

// Renders one noisy quantized slice. Per-pixel signal is
// albedo * C(depth) with C linearly interpolated on the RIP grid; the
// Poisson stage uses y = a * Poisson(signal / a) (skipped when a = 0),
// Gaussian read noise has variance b, and the result is clipped to
// [0, 1023] and rounded half-up. Deterministic in (seed, slice_index, row).
// Throws OutOfGridError when a scene depth falls outside the RIP grid.
SliceImage render_slice(const scene::Scene& scene,
                        const rip::RangeIntensityProfile& rip,
                        const NoiseParams& noise, int slice_index);

// Three slices with independent noise streams derived from (seed, index).
GatedStack render_stack(const scene::Scene& scene,
                        const std::array<rip::RangeIntensityProfile, 3>& rips,
                        const NoiseParams& noise);

// Fraction of pixels at full scale (1023) in any slice.
double saturate_check(const GatedStack& stack);

}  // namespace gdl::sensor
