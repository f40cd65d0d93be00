#include "gdl/scene.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gdl/rng.hpp"

namespace gdl::scene {
namespace {

using rng::Stream;

void validate(const SceneSpec& spec) {
  if (spec.width < 16 || spec.height < 16)
    throw std::invalid_argument("generate_scene: dimensions must be at least 16x16");
  if (!(spec.r_near >= 3.0) || !(spec.r_far > spec.r_near))
    throw std::invalid_argument("generate_scene: need 3 <= r_near < r_far");
  if (spec.object_count < 0 || spec.shadow_patches < 0)
    throw std::invalid_argument("generate_scene: negative object count");
}

double draw_albedo(Stream& s) { return 0.05 + 0.95 * s.uniform(); }

void fill_plane(Scene& out, const SceneSpec& spec, Stream& s) {
  const double d = spec.plane_distance > 0.0
                       ? spec.plane_distance
                       : 0.5 * (spec.r_near + spec.r_far);
  if (d < spec.r_near || d > spec.r_far)
    throw std::invalid_argument("generate_scene: plane distance outside scene range");
  const double albedo = draw_albedo(s);
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      out.depth.at(x, y) = d;
      out.albedo.at(x, y) = albedo;
    }
}

void paint_backdrop(Scene& out, const SceneSpec& spec, Stream& s) {
  // Backdrop sits in the far half of the range with a mild vertical ramp.
  const double span = spec.r_far - spec.r_near;
  const double base = spec.r_near + span * (0.7 + 0.2 * s.uniform());
  const double tilt = span * 0.08 * (s.uniform() - 0.5);
  const double albedo = draw_albedo(s);
  for (int y = 0; y < spec.height; ++y) {
    const double frac = static_cast<double>(y) / (spec.height - 1);
    const double d = std::clamp(base + tilt * (frac - 0.5), spec.r_near, spec.r_far);
    for (int x = 0; x < spec.width; ++x) {
      out.depth.at(x, y) = d;
      out.albedo.at(x, y) = albedo;
    }
  }
}

struct Patch {
  int x0, y0, w, h;
  double depth;
  double albedo;
};

Patch draw_patch(const SceneSpec& spec, Stream& s, double depth_lo, double depth_hi) {
  Patch p;
  p.w = 3 + static_cast<int>(s.below(static_cast<std::uint64_t>(spec.width / 2)));
  p.h = 3 + static_cast<int>(s.below(static_cast<std::uint64_t>(spec.height / 2)));
  p.x0 = static_cast<int>(s.below(static_cast<std::uint64_t>(std::max(1, spec.width - p.w))));
  p.y0 = static_cast<int>(s.below(static_cast<std::uint64_t>(std::max(1, spec.height - p.h))));
  p.depth = depth_lo + (depth_hi - depth_lo) * s.uniform();
  p.albedo = draw_albedo(s);
  return p;
}

void fill_boxes(Scene& out, const SceneSpec& spec, Stream& s) {
  paint_backdrop(out, spec, s);
  const double span = spec.r_far - spec.r_near;
  // Far-to-near painter order so nearer boxes occlude.
  std::vector<Patch> patches;
  for (int i = 0; i < spec.object_count; ++i)
    patches.push_back(draw_patch(spec, s, spec.r_near + 0.05 * span, spec.r_near + 0.65 * span));
  std::sort(patches.begin(), patches.end(),
            [](const Patch& a, const Patch& b) { return a.depth > b.depth; });
  for (const auto& p : patches)
    for (int y = p.y0; y < p.y0 + p.h; ++y)
      for (int x = p.x0; x < p.x0 + p.w; ++x) {
        out.depth.at(x, y) = p.depth;
        out.albedo.at(x, y) = p.albedo;
      }
}

void fill_spheres(Scene& out, const SceneSpec& spec, Stream& s) {
  paint_backdrop(out, spec, s);
  const double span = spec.r_far - spec.r_near;
  for (int i = 0; i < spec.object_count; ++i) {
    const double radius = 2.0 + 0.2 * std::min(spec.width, spec.height) * s.uniform();
    const double cx = radius + (spec.width - 2.0 * radius) * s.uniform();
    const double cy = radius + (spec.height - 2.0 * radius) * s.uniform();
    const double center_depth = spec.r_near + span * (0.1 + 0.55 * s.uniform());
    const double bulge = span * 0.02;  // depth relief across the disc
    const double albedo = draw_albedo(s);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x) {
        const double dx = x - cx, dy = y - cy;
        const double rho2 = dx * dx + dy * dy;
        if (rho2 > radius * radius) continue;
        const double cap = std::sqrt(1.0 - rho2 / (radius * radius));
        const double d = std::clamp(center_depth - bulge * cap, spec.r_near, spec.r_far);
        if (d < out.depth.at(x, y)) {
          out.depth.at(x, y) = d;
          out.albedo.at(x, y) = albedo;
        }
      }
  }
}

// Smooth lattice noise: bilinear interpolation of a coarse random grid with
// smoothstep easing, plus one depth step along a random vertical seam.
void fill_terrain(Scene& out, const SceneSpec& spec, Stream& s) {
  constexpr int kLattice = 9;
  double lattice[kLattice][kLattice];
  for (auto& row : lattice)
    for (double& v : row) v = s.uniform();

  const double seam_x = spec.width * (0.25 + 0.5 * s.uniform());
  const double step_frac = 0.15 + 0.2 * s.uniform();
  const double albedo_a = draw_albedo(s);
  const double albedo_b = draw_albedo(s);

  const double span = spec.r_far - spec.r_near;
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      const double gx = static_cast<double>(x) / (spec.width - 1) * (kLattice - 1);
      const double gy = static_cast<double>(y) / (spec.height - 1) * (kLattice - 1);
      const int ix = std::min(static_cast<int>(gx), kLattice - 2);
      const int iy = std::min(static_cast<int>(gy), kLattice - 2);
      auto ease = [](double t) { return t * t * (3.0 - 2.0 * t); };
      const double fx = ease(gx - ix), fy = ease(gy - iy);
      const double v0 = lattice[iy][ix] + fx * (lattice[iy][ix + 1] - lattice[iy][ix]);
      const double v1 =
          lattice[iy + 1][ix] + fx * (lattice[iy + 1][ix + 1] - lattice[iy + 1][ix]);
      double v = 0.75 * (v0 + fy * (v1 - v0));
      if (x > seam_x) v += step_frac;  // discontinuity at the seam
      out.depth.at(x, y) = std::clamp(spec.r_near + span * v, spec.r_near, spec.r_far);
      out.albedo.at(x, y) = x > seam_x ? albedo_b : albedo_a;
    }
}

void paint_shadows(Scene& out, const SceneSpec& spec, Stream& s) {
  for (int i = 0; i < spec.shadow_patches; ++i) {
    const Patch p = draw_patch(spec, s, spec.r_near, spec.r_far);
    for (int y = p.y0; y < p.y0 + p.h; ++y)
      for (int x = p.x0; x < p.x0 + p.w; ++x) out.albedo.at(x, y) = 0.0;
  }
}

}  // namespace

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  validate(spec);
  Scene out;
  out.width = spec.width;
  out.height = spec.height;
  out.depth = Map2D<double>(spec.width, spec.height);
  out.albedo = Map2D<double>(spec.width, spec.height);

  Stream s(seed, 0x5ce7e, static_cast<std::uint64_t>(spec.kind));
  switch (spec.kind) {
    case SceneKind::kGroundPlane:
      fill_plane(out, spec, s);
      break;
    case SceneKind::kBoxes:
      fill_boxes(out, spec, s);
      break;
    case SceneKind::kSpheres:
      fill_spheres(out, spec, s);
      break;
    case SceneKind::kTerrain:
      fill_terrain(out, spec, s);
      break;
  }
  paint_shadows(out, spec, s);
  return out;
}

Mask sample_sparse_mask(int height, int width, int n_lines, double dropout,
                        std::uint64_t seed) {
  if (height <= 0 || width <= 0)
    throw std::invalid_argument("sample_sparse_mask: dimensions must be positive");
  if (n_lines < 1 || n_lines > height)
    throw std::invalid_argument("sample_sparse_mask: n_lines out of [1, height]");
  if (!(dropout >= 0.0) || !(dropout < 1.0))
    throw std::invalid_argument("sample_sparse_mask: dropout outside [0, 1)");

  Mask mask(width, height, 0);
  Stream s(seed, 0x3a51, 0);
  for (int line = 0; line < n_lines; ++line) {
    const int y = static_cast<int>(
        std::floor((line + 0.5) * static_cast<double>(height) / n_lines));
    for (int x = 0; x < width; ++x)
      mask.at(x, y) = (dropout > 0.0 && s.uniform() < dropout) ? 0 : 1;
  }
  return mask;
}

double coverage(const Mask& mask) {
  return static_cast<double>(valid_count(mask)) / static_cast<double>(mask.size());
}

SceneKind scene_kind_from_string(const std::string& name) {
  if (name == "ground_plane") return SceneKind::kGroundPlane;
  if (name == "boxes") return SceneKind::kBoxes;
  if (name == "spheres") return SceneKind::kSpheres;
  if (name == "terrain") return SceneKind::kTerrain;
  throw std::invalid_argument("unknown scene kind: " + name);
}

}  // namespace gdl::scene
