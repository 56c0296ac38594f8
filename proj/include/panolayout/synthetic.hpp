#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panolayout/layout.hpp"
#include "panolayout/lines.hpp"
#include "panolayout/rng.hpp"
#include "panolayout/types.hpp"

namespace panolayout {

/// Axis-aligned rectangle drawn on a room face (window, door, rug or ceiling panel proxy).
struct ClutterRect {
  int face = 0;        ///< wall index i (edge i -> i+1), -1 for the floor, -2 for the ceiling
  Vec2 lo{0.0, 0.0};   ///< wall: (distance along the wall, z); floor and ceiling: (x, y)
  Vec2 hi{0.0, 0.0};
  float gray = 0.5f;
};

struct SceneSpec {
  /// Ceiling polygon in the room frame, clockwise, camera at the origin, ceiling at z = +1.
  std::vector<Vec2> polygon;
  double floor_height = 1.5;
  double yaw_deg = 0.0;
  double tilt_deg = 0.0;       ///< tilt of the camera's up axis away from the room's
  double tilt_azimuth_deg = 0.0;
  std::vector<ClutterRect> clutter;
  double flip_rate = 0.05;     ///< normal-map label noise
  std::uint64_t seed = 0;

  int wall_count() const { return static_cast<int>(polygon.size()); }
  /// Camera-from-room rotation: camera ray = R * room ray.
  RotationMatrix rotation() const;
  void validate() const;  ///< throws std::invalid_argument
};

struct SceneOptions {
  std::vector<int> wall_counts{4, 6, 8};
  int clutter_rects = 0;
  double max_yaw_deg = 40.0;
  double max_tilt_deg = 0.0;
  double min_height = 1.0;
  double max_height = 2.0;
  double flip_rate = 0.05;
};

/// Random rectilinear room (box, L, or double-notched) whose every wall is fully visible from
/// the camera, with random yaw and optional clutter.
SceneSpec sample_scene_spec(const SceneOptions& opts, std::uint64_t seed);

/// Unit-free box [-a1, a2] x [-b1, b2] with ceiling at +1, yaw 0.
SceneSpec box_scene(double a1, double a2, double b1, double b2, double floor_height);

struct Scene {
  SceneSpec spec;
  LayoutModel layout;                          ///< ground truth, room frame
  RotationMatrix rotation;                     ///< camera = rotation * room
  std::vector<GreatCircleSegment> structural;  ///< camera frame, axis = room axis of the edge
  std::vector<GreatCircleSegment> clutter;
  std::vector<UnitVec3> corners;               ///< camera frame, ceiling then floor

  /// Ground-truth corners in the room frame.
  std::vector<Vec3> room_corners() const;
};

Scene generate_scene(const SceneSpec& spec);

/// Ground-truth orientation labels, by direct 3D ray/face intersection. Independent of
/// evaluation's renderer.
LabeledImage analytic_labels(const Scene& scene, Dims dims);

/// Flat-shaded grayscale panorama: bright ceiling, dark floor, alternating wall tones and
/// distinct clutter tones. `supersample` x `supersample` rays per pixel.
Image render_panorama(const Scene& scene, Dims dims, int supersample = 3);

/// Edge probability map: exp(-d^2 / 2 sigma^2) of the pixel distance d to the nearest
/// rasterized segment pixel, so on-segment pixels are exactly 1.
ProbabilityMap synth_edge_map(std::span<const GreatCircleSegment> segments, Dims dims, double sigma_px);

/// Normal map from labels: the basis axis of each label, rotated into the camera frame. Each pixel
/// is independently flipped to a wrong axis with probability flip_rate or set nil with probability
/// min(flip_rate / 2, 1 - flip_rate). Ceiling pixels are first set nil with probability
/// ceiling_nil_rate (default min(3 * flip_rate, 0.9)).
NormalMap synth_normal_map(const LabeledImage& labels, const RotationMatrix& basis, double flip_rate,
                           std::uint64_t seed, std::optional<double> ceiling_nil_rate = std::nullopt);

/// Noisy rays along a segment: `count` points uniformly along the arc, each perturbed by an
/// isotropic angular Gaussian of sigma_deg.
std::vector<UnitVec3> sample_arc_rays(const GreatCircleSegment& seg, int count, double sigma_deg, Rng& rng);

/// Random arc of length in [min_len_deg, max_len_deg].
GreatCircleSegment random_arc(Rng& rng, double min_len_deg, double max_len_deg);

}  // namespace panolayout
