#pragma once

// Equirectangular conventions: camera at the origin, +z up, row 0 at the +z pole,
// azimuth = atan2(y, x) increasing with column, seam at azimuth +-pi.

#include <span>
#include <utility>
#include <vector>

#include "panolayout/types.hpp"

namespace panolayout {

/// Ray through a (continuous) pixel coordinate. Throws std::invalid_argument when the
/// coordinate lies outside [-0.5, M-0.5] x [-0.5, N-0.5].
UnitVec3 pixel_to_ray(PixelCoord p, Dims dims);
UnitVec3 pixel_to_ray(PixelIndex p, Dims dims);

/// Inverse of pixel_to_ray. Directions at a pole map to column 0.
PixelCoord ray_to_pixel(const Vec3& v, Dims dims);

/// Pixel containing the ray (row clamped, column wrapped).
PixelIndex ray_to_index(const Vec3& v, Dims dims);

/// Wrap a column index into [0, N).
inline int wrap_col(int c, int cols) {
  c %= cols;
  return c < 0 ? c + cols : c;
}

/// Azimuth / elevation of a direction in radians.
double azimuth(const Vec3& v);
double elevation(const Vec3& v);

/// Golden-section spiral: z_k = 1 - (2k+1)/n, azimuth_k = k * pi * (3 - sqrt 5).
std::vector<UnitVec3> golden_spiral_directions(int n);

/// Perspective sub-view of the panorama.
struct ViewSpec {
  UnitVec3 center{1.0, 0.0, 0.0};
  double fov_deg = 70.0;
  int resolution = 320;
  /// In-plane rotation away from the default where view "up" is the projection of world +z.
  double roll_deg = 0.0;

  void validate() const;
  double focal_px() const;
  /// Columns are the view's right, down and forward axes in world coordinates.
  Mat3 rotation() const;
};

/// Views centered on the golden-spiral directions.
std::vector<ViewSpec> spiral_views(int count, double fov_deg, int resolution);

/// Bilinear sample of channel `ch` with azimuth wrap-around and clamped pole rows.
float sample_bilinear(const Image& img, PixelCoord p, int ch);

/// Pinhole projection of the panorama into a square perspective raster.
Image project_to_view(const Image& pano, const ViewSpec& view);

/// Continuous view pixel hit by a world ray, if the ray falls inside the view frustum.
bool world_ray_to_view(const Mat3& view_rotation, double focal, int resolution, const Vec3& ray,
                       PixelCoord& out);

using ViewProbability = std::pair<ViewSpec, Raster<float>>;
using ViewNormals = std::pair<ViewSpec, NormalMap>;

/// Per-pixel maximum over every view covering the pixel; uncovered pixels are 0.
ProbabilityMap stitch_max(std::span<const ViewProbability> views, Dims dims);

/// Rotate view-frame normals into the world frame and average overlaps; no contribution -> nil.
NormalMap stitch_avg_normals(std::span<const ViewNormals> views, Dims dims);

enum class Interpolation { Nearest, Bilinear };

/// Output pixel p samples the input at ray_to_pixel(R^T * pixel_to_ray(p)).
Image rotate_panorama(const Image& img, const RotationMatrix& R,
                      Interpolation mode = Interpolation::Bilinear);

}  // namespace panolayout
