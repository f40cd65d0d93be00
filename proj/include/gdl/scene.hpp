#pragma once

#include <cstdint>
#include <string>

#include "gdl/map2d.hpp"

namespace gdl::scene {

enum class SceneKind { kGroundPlane, kBoxes, kSpheres, kTerrain };

struct SceneSpec {
  SceneKind kind = SceneKind::kTerrain;
  int width = 128;
  int height = 96;
  double r_near = 3.0;  // m
  double r_far = 150.0;  // m
  // ground_plane: fixed distance of the plane; 0 picks the range midpoint.
  double plane_distance = 0.0;
  // boxes/spheres: number of objects placed in front of the backdrop.
  int object_count = 6;
  // Zero-albedo rectangles painted last; they receive no illumination.
  int shadow_patches = 0;
};

// Ground-truth depth (m) and albedo (in [0, 1]) per pixel.
struct Scene {
  int width = 0;
  int height = 0;
  Map2D<double> depth;
  Map2D<double> albedo;
};

// Deterministic in (spec, seed). Depth stays within [r_near, r_far]; albedo
// is drawn per object in [0.05, 1] except for shadow patches, which get 0.
Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

// Validity concentrated on n_lines evenly spaced rows, with per-pixel
// dropout applied on those rows. Deterministic per seed.
Mask sample_sparse_mask(int height, int width, int n_lines, double dropout,
                        std::uint64_t seed);

double coverage(const Mask& mask);

SceneKind scene_kind_from_string(const std::string& name);

}  // namespace gdl::scene
