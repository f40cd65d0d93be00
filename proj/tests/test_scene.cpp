#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "gdl/scene.hpp"

using namespace gdl;

namespace {

scene::SceneSpec terrain_spec() {
  scene::SceneSpec spec;
  spec.kind = scene::SceneKind::kTerrain;
  spec.width = 64;
  spec.height = 48;
  return spec;
}

}  // namespace

TEST_CASE("scene generation is deterministic in spec and seed") {
  const auto spec = terrain_spec();
  const auto a = scene::generate_scene(spec, 7);
  const auto b = scene::generate_scene(spec, 7);
  CHECK(a.depth == b.depth);
  CHECK(a.albedo == b.albedo);

  const auto c = scene::generate_scene(spec, 8);
  CHECK_FALSE(a.depth == c.depth);
}

TEST_CASE("ground plane puts every pixel at the requested distance") {
  scene::SceneSpec spec;
  spec.kind = scene::SceneKind::kGroundPlane;
  spec.width = 32;
  spec.height = 24;
  spec.plane_distance = 50.0;
  const auto s = scene::generate_scene(spec, 1);
  const double albedo0 = s.albedo.at(0, 0);
  CHECK(albedo0 >= 0.05);
  CHECK(albedo0 <= 1.0);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      CHECK(s.depth.at(x, y) == 50.0);
      CHECK(s.albedo.at(x, y) == albedo0);
    }
}

TEST_CASE("ground plane defaults to the midpoint of the scene range") {
  scene::SceneSpec spec;
  spec.kind = scene::SceneKind::kGroundPlane;
  spec.width = 16;
  spec.height = 16;
  spec.r_near = 10.0;
  spec.r_far = 90.0;
  const auto s = scene::generate_scene(spec, 1);
  CHECK(s.depth.at(5, 5) == 50.0);

  spec.plane_distance = 200.0;  // outside [r_near, r_far]
  CHECK_THROWS_AS(scene::generate_scene(spec, 1), std::invalid_argument);
}

TEST_CASE("every scene kind respects the depth and albedo bounds") {
  const scene::SceneKind kinds[] = {
      scene::SceneKind::kGroundPlane, scene::SceneKind::kBoxes,
      scene::SceneKind::kSpheres, scene::SceneKind::kTerrain};
  for (auto kind : kinds) {
    auto spec = terrain_spec();
    spec.kind = kind;
    const auto s = scene::generate_scene(spec, 11);
    for (int y = 0; y < s.height; ++y)
      for (int x = 0; x < s.width; ++x) {
        CHECK(s.depth.at(x, y) >= spec.r_near);
        CHECK(s.depth.at(x, y) <= spec.r_far);
        CHECK(s.albedo.at(x, y) >= 0.05);  // no shadow patches requested
        CHECK(s.albedo.at(x, y) <= 1.0);
      }
  }
}

TEST_CASE("terrain contains a depth discontinuity along the seam") {
  const auto s = scene::generate_scene(terrain_spec(), 3);
  double max_jump = 0.0;
  for (int y = 0; y < s.height; ++y)
    for (int x = 1; x < s.width; ++x)
      max_jump = std::max(max_jump,
                          std::fabs(s.depth.at(x, y) - s.depth.at(x - 1, y)));
  // Seam step is at least 15% of the span; smooth texture alone stays well below.
  CHECK(max_jump > 0.1 * (150.0 - 3.0));
}

TEST_CASE("shadow patches force albedo to zero somewhere") {
  auto spec = terrain_spec();
  spec.shadow_patches = 3;
  const auto s = scene::generate_scene(spec, 5);
  int zeros = 0;
  for (double a : s.albedo.values()) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
    if (a == 0.0) ++zeros;
  }
  CHECK(zeros >= 9);  // patches are at least 3x3
}

TEST_CASE("scene spec validation") {
  auto spec = terrain_spec();
  spec.width = 8;
  CHECK_THROWS_AS(scene::generate_scene(spec, 1), std::invalid_argument);
  spec = terrain_spec();
  spec.r_near = 1.0;
  CHECK_THROWS_AS(scene::generate_scene(spec, 1), std::invalid_argument);
  spec = terrain_spec();
  spec.r_far = spec.r_near;
  CHECK_THROWS_AS(scene::generate_scene(spec, 1), std::invalid_argument);
  spec = terrain_spec();
  spec.object_count = -1;
  CHECK_THROWS_AS(scene::generate_scene(spec, 1), std::invalid_argument);
}

TEST_CASE("sparse mask concentrates validity on evenly spaced rows") {
  const auto mask = scene::sample_sparse_mask(64, 128, 16, 0.0, 2);
  // Lines land on y = 4*k + 2; off-line rows stay empty.
  for (int x = 0; x < 128; ++x) {
    CHECK(mask.at(x, 0) == 0);
    CHECK(mask.at(x, 2) == 1);
    CHECK(mask.at(x, 3) == 0);
    CHECK(mask.at(x, 62) == 1);
  }
  CHECK(scene::coverage(mask) == 16.0 / 64.0);
}

TEST_CASE("dropout thins the mask to the expected coverage") {
  const auto mask = scene::sample_sparse_mask(64, 128, 16, 0.2, 2);
  const double expected = (16.0 / 64.0) * 0.8;
  CHECK(std::fabs(scene::coverage(mask) - expected) < 0.05);
  // Dropped pixels stay on line rows only.
  for (int x = 0; x < 128; ++x) CHECK(mask.at(x, 1) == 0);
}

TEST_CASE("single-line mask sits near the vertical center") {
  const auto mask = scene::sample_sparse_mask(48, 32, 1, 0.0, 9);
  for (int x = 0; x < 32; ++x) CHECK(mask.at(x, 24) == 1);
  CHECK(scene::coverage(mask) == 1.0 / 48.0);
}

TEST_CASE("full-height mask with no dropout covers everything") {
  const auto mask = scene::sample_sparse_mask(16, 16, 16, 0.0, 1);
  CHECK(scene::coverage(mask) == 1.0);
}

TEST_CASE("mask sampling is deterministic per seed") {
  const auto a = scene::sample_sparse_mask(64, 64, 16, 0.5, 77);
  const auto b = scene::sample_sparse_mask(64, 64, 16, 0.5, 77);
  const auto c = scene::sample_sparse_mask(64, 64, 16, 0.5, 78);
  CHECK(a == b);
  CHECK_FALSE(a == c);
}

TEST_CASE("mask parameter validation") {
  CHECK_THROWS_AS(scene::sample_sparse_mask(0, 16, 1, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(scene::sample_sparse_mask(16, 16, 0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(scene::sample_sparse_mask(16, 16, 17, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(scene::sample_sparse_mask(16, 16, 4, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(scene::sample_sparse_mask(16, 16, 4, -0.1, 1), std::invalid_argument);
}

TEST_CASE("coverage counts valid pixels over all pixels") {
  Mask m(2, 2, 0);
  m.at(0, 0) = 1;
  m.at(1, 0) = 1;
  m.at(0, 1) = 1;
  CHECK(scene::coverage(m) == 0.75);
}

TEST_CASE("scene kind parser") {
  CHECK(scene::scene_kind_from_string("ground_plane") == scene::SceneKind::kGroundPlane);
  CHECK(scene::scene_kind_from_string("boxes") == scene::SceneKind::kBoxes);
  CHECK(scene::scene_kind_from_string("spheres") == scene::SceneKind::kSpheres);
  CHECK(scene::scene_kind_from_string("terrain") == scene::SceneKind::kTerrain);
  CHECK_THROWS_AS(scene::scene_kind_from_string("plane"), std::invalid_argument);
}
