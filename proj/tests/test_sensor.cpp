#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "gdl/error.hpp"
#include "gdl/sensor.hpp"

using namespace gdl;

namespace {

scene::Scene flat_scene(int width, int height, double depth, double albedo) {
  scene::Scene s;
  s.width = width;
  s.height = height;
  s.depth = Map2D<double>(width, height, depth);
  s.albedo = Map2D<double>(width, height, albedo);
  return s;
}

rip::RangeIntensityProfile const_rip(double value, double r_max = 100.0) {
  rip::RangeIntensityProfile rip;
  rip.r_min = 0.0;
  rip.dr = r_max;
  rip.samples = {value, value};
  return rip;
}

double sample_mean(const sensor::SliceImage& img) {
  double acc = 0.0;
  for (auto v : img.values()) acc += static_cast<double>(v);
  return acc / static_cast<double>(img.size());
}

double sample_variance(const sensor::SliceImage& img) {
  const double mean = sample_mean(img);
  double acc = 0.0;
  for (auto v : img.values()) {
    const double d = static_cast<double>(v) - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(img.size() - 1);
}

}  // namespace

TEST_CASE("noiseless rendering returns the quantized signal") {
  const auto scene = flat_scene(8, 6, 50.0, 1.0);
  const auto img = sensor::render_slice(scene, const_rip(500.0), {0.0, 0.0, 1}, 0);
  for (auto v : img.values()) CHECK(v == 500);
}

TEST_CASE("albedo scales the noiseless signal") {
  const auto scene = flat_scene(8, 6, 50.0, 0.5);
  const auto img = sensor::render_slice(scene, const_rip(500.0), {0.0, 0.0, 1}, 0);
  for (auto v : img.values()) CHECK(v == 250);
}

TEST_CASE("quantization rounds half up and clips to the 10-bit range") {
  const auto scene = flat_scene(4, 4, 50.0, 1.0);
  CHECK(sensor::render_slice(scene, const_rip(10.4), {0, 0, 1}, 0).at(0, 0) == 10);
  CHECK(sensor::render_slice(scene, const_rip(10.5), {0, 0, 1}, 0).at(0, 0) == 11);
  CHECK(sensor::render_slice(scene, const_rip(10.6), {0, 0, 1}, 0).at(0, 0) == 11);
  CHECK(sensor::render_slice(scene, const_rip(2000.0), {0, 0, 1}, 0).at(0, 0) == 1023);
  CHECK(sensor::render_slice(scene, const_rip(1023.49), {0, 0, 1}, 0).at(0, 0) == 1023);
}

TEST_CASE("scaled poisson noise preserves the mean") {
  const auto scene = flat_scene(256, 256, 50.0, 1.0);
  const auto img = sensor::render_slice(scene, const_rip(400.0), {2.0, 1.0, 42}, 0);
  CHECK(std::fabs(sample_mean(img) - 400.0) / 400.0 < 0.01);
}

TEST_CASE("variance follows a*chi + b for scaled poisson plus read noise") {
  const auto scene = flat_scene(256, 256, 50.0, 1.0);
  const auto img = sensor::render_slice(scene, const_rip(400.0), {2.0, 1.0, 42}, 0);
  const double expected = 2.0 * 400.0 + 1.0;
  CHECK(std::fabs(sample_variance(img) - expected) / expected < 0.05);
}

TEST_CASE("pure read noise has variance b") {
  const auto scene = flat_scene(256, 256, 50.0, 1.0);
  const auto img = sensor::render_slice(scene, const_rip(500.0), {0.0, 16.0, 7}, 0);
  CHECK(std::fabs(sample_mean(img) - 500.0) < 0.5);
  CHECK(std::fabs(sample_variance(img) - 16.0) / 16.0 < 0.05);
}

TEST_CASE("measured variance is linear in the signal level") {
  const double a = 1.0, b = 4.0;
  const std::vector<double> chis = {50.0, 100.0, 200.0, 400.0, 800.0};
  std::vector<double> vars;
  for (double chi : chis) {
    const auto scene = flat_scene(192, 192, 50.0, 1.0);
    const auto img = sensor::render_slice(scene, const_rip(chi), {a, b, 99}, 0);
    vars.push_back(sample_variance(img));
  }
  // Least-squares line through (chi, var).
  const auto n = static_cast<double>(chis.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < chis.size(); ++i) {
    sx += chis[i];
    sy += vars[i];
    sxx += chis[i] * chis[i];
    sxy += chis[i] * vars[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  for (std::size_t i = 0; i < chis.size(); ++i) {
    const double fit = slope * chis[i] + intercept;
    ss_res += (vars[i] - fit) * (vars[i] - fit);
    ss_tot += (vars[i] - sy / n) * (vars[i] - sy / n);
  }
  CHECK(std::fabs(slope - a) / a < 0.1);
  CHECK(1.0 - ss_res / ss_tot >= 0.99);
}

TEST_CASE("rendering is deterministic per seed and slice index") {
  const auto scene = flat_scene(32, 32, 50.0, 1.0);
  const sensor::NoiseParams noise{1.0, 4.0, 5};
  const auto a = sensor::render_slice(scene, const_rip(300.0), noise, 0);
  const auto b = sensor::render_slice(scene, const_rip(300.0), noise, 0);
  CHECK(a == b);
  const auto other_slice = sensor::render_slice(scene, const_rip(300.0), noise, 1);
  CHECK_FALSE(a == other_slice);
  const auto other_seed = sensor::render_slice(scene, const_rip(300.0), {1.0, 4.0, 6}, 0);
  CHECK_FALSE(a == other_seed);
}

TEST_CASE("thread count does not change rendered pixels") {
  const auto scene = flat_scene(64, 48, 50.0, 1.0);
  const sensor::NoiseParams noise{1.0, 4.0, 5};
  setenv("GDL_THREADS", "1", 1);
  const auto serial = sensor::render_slice(scene, const_rip(300.0), noise, 0);
  setenv("GDL_THREADS", "4", 1);
  const auto parallel = sensor::render_slice(scene, const_rip(300.0), noise, 0);
  unsetenv("GDL_THREADS");
  CHECK(serial == parallel);
}

TEST_CASE("zero albedo yields zero counts under pure poisson noise") {
  const auto scene = flat_scene(16, 16, 50.0, 0.0);
  const auto img = sensor::render_slice(scene, const_rip(800.0), {1.0, 0.0, 3}, 0);
  for (auto v : img.values()) CHECK(v == 0);
}

TEST_CASE("depth outside the profile grid fails before any pixel is drawn") {
  const auto scene = flat_scene(8, 8, 150.0, 1.0);
  CHECK_THROWS_AS(sensor::render_slice(scene, const_rip(500.0, 100.0), {1, 4, 1}, 0),
                  OutOfGridError);
}

TEST_CASE("negative noise parameters are rejected") {
  const auto scene = flat_scene(8, 8, 50.0, 1.0);
  CHECK_THROWS_AS(sensor::render_slice(scene, const_rip(500.0), {-1.0, 4.0, 1}, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(sensor::render_slice(scene, const_rip(500.0), {1.0, -4.0, 1}, 0),
                  std::invalid_argument);
}

TEST_CASE("saturation counts pixels maxed out in any slice") {
  sensor::GatedStack stack;
  for (auto& s : stack.slices) s = sensor::SliceImage(2, 2, 100);
  stack.slices[0].at(0, 0) = 1023;
  stack.slices[2].at(1, 0) = 1023;
  for (auto& s : stack.slices) s.at(1, 1) = 1023;
  CHECK(sensor::saturate_check(stack) == 0.75);

  const auto scene = flat_scene(8, 8, 50.0, 1.0);
  const std::array<rip::RangeIntensityProfile, 3> rips = {
      const_rip(2000.0), const_rip(2000.0), const_rip(2000.0)};
  CHECK(sensor::saturate_check(sensor::render_stack(scene, rips, {0, 0, 1})) == 1.0);
}

TEST_CASE("stack rendering matches per-slice rendering") {
  const auto scene = flat_scene(16, 16, 50.0, 1.0);
  const sensor::NoiseParams noise{1.0, 4.0, 21};
  const std::array<rip::RangeIntensityProfile, 3> rips = {
      const_rip(200.0), const_rip(400.0), const_rip(600.0)};
  const auto stack = sensor::render_stack(scene, rips, noise);
  for (int i = 0; i < 3; ++i)
    CHECK(stack.slices[static_cast<std::size_t>(i)] ==
          sensor::render_slice(scene, rips[static_cast<std::size_t>(i)], noise, i));
  CHECK(stack.width() == 16);
  CHECK(stack.height() == 16);
}
