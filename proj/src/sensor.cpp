#include "gdl/sensor.hpp"

#include <cmath>
#include <stdexcept>

#include "gdl/error.hpp"
#include "gdl/parallel.hpp"
#include "gdl/rng.hpp"

namespace gdl::sensor {
namespace {

std::uint16_t quantize(double z) {
  if (z <= 0.0) return 0;
  if (z >= static_cast<double>(kMaxCount)) return kMaxCount;
  return static_cast<std::uint16_t>(std::floor(z + 0.5));  // round half-up
}

}  // namespace

SliceImage render_slice(const scene::Scene& scene,
                        const rip::RangeIntensityProfile& rip,
                        const NoiseParams& noise, int slice_index) {
  if (!(noise.a >= 0.0) || !(noise.b >= 0.0))
    throw std::invalid_argument("render_slice: noise parameters must be nonnegative");
  if (scene.width <= 0 || scene.height <= 0)
    throw std::invalid_argument("render_slice: empty scene");

  SliceImage img(scene.width, scene.height, 0);
  const double sigma_read = std::sqrt(noise.b);

  // Fail fast on depths outside the grid before touching any noise stream.
  for (int y = 0; y < scene.height; ++y)
    for (int x = 0; x < scene.width; ++x)
      (void)rip.value(scene.depth.at(x, y));

  parallel_rows(scene.height, [&](int y) {
    rng::Stream stream(noise.seed, static_cast<std::uint64_t>(slice_index),
                       static_cast<std::uint64_t>(y));
    for (int x = 0; x < scene.width; ++x) {
      const double signal = scene.albedo.at(x, y) * rip.value(scene.depth.at(x, y));
      double z;
      if (noise.a > 0.0) {
        z = noise.a * static_cast<double>(stream.poisson(signal / noise.a));
      } else {
        z = signal;
      }
      if (noise.b > 0.0) z += sigma_read * stream.normal();
      img.at(x, y) = quantize(z);
    }
  });
  return img;
}

GatedStack render_stack(const scene::Scene& scene,
                        const std::array<rip::RangeIntensityProfile, 3>& rips,
                        const NoiseParams& noise) {
  GatedStack stack;
  for (int i = 0; i < 3; ++i)
    stack.slices[i] = render_slice(scene, rips[i], noise, i);
  return stack;
}

double saturate_check(const GatedStack& stack) {
  long long saturated = 0;
  const auto n = stack.slices[0].size();
  for (std::size_t p = 0; p < n; ++p) {
    for (const auto& slice : stack.slices) {
      if (slice.data()[p] == kMaxCount) {
        ++saturated;
        break;
      }
    }
  }
  return static_cast<double>(saturated) / static_cast<double>(n);
}

}  // namespace gdl::sensor
