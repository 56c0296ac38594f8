#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panolayout/rng.hpp"
#include "panolayout/types.hpp"

namespace panolayout {

/// Thresholds for edge detection, circle fitting and vanishing-point estimation.
struct LineConfig {
  double theta_th_deg = 0.5;          ///< line / VP inlier angle
  double canny_sigma = 1.4;
  double canny_low = 0.1;             ///< fraction of the maximum gradient magnitude
  double canny_high = 0.2;
  int min_group_size = 30;            ///< pixels, at reference_width
  int reference_width = 1024;
  double ransac_confidence = 0.999;
  int ransac_max_iterations = 500;
  double min_inlier_ratio = 0.5;
  double min_pair_angle_deg = 1.0;    ///< closer ray pairs are resampled
  int max_lines_per_group = 64;
  int vp_iterations = 2000;
  double vp_orthogonality_deg = 0.5;
  std::uint64_t seed = 0;

  /// min_group_size scaled to the actual panorama width.
  int group_size_for(int width) const;
};

/// 8-connected edge pixels and their rays.
struct EdgeGroup {
  std::vector<PixelIndex> pixels;
  std::vector<UnitVec3> rays;
};

/// World line as the normal of its projective plane plus the arc it occupies. The arc runs
/// counter-clockwise about `normal` from d1 to d2.
struct GreatCircleSegment {
  UnitVec3 normal;
  UnitVec3 d1;
  UnitVec3 d2;
  int inlier_count = 0;
  int pixel_length = 0;
  Axis axis = Axis::Unclassified;

  /// Arc length in radians, in (0, 2*pi).
  double span() const;
  /// Counter-clockwise angle of `v` (projected on the circle) measured from d1.
  double arc_position(const Vec3& v) const;
  /// Same segment expressed in another frame: n' = M n, d' = M d.
  GreatCircleSegment transformed(const Mat3& m) const;
};

/// Builds a segment from two 3D points on a world line (camera at the origin).
GreatCircleSegment segment_from_points(const Vec3& a, const Vec3& b, Axis axis = Axis::Unclassified);

/// Orthonormal, gravity-aligned vanishing directions as the columns of R.
struct VanishingBasis {
  RotationMatrix R;
  std::array<int, 3> inliers{0, 0, 0};

  Vec3 vp(int k) const { return R.column(k); }
  Vec3 to_basis(const Vec3& camera_dir) const { return R.matrix().transpose() * camera_dir; }
  Vec3 to_camera(const Vec3& basis_dir) const { return R.matrix() * basis_dir; }
};

/// Canny on the grayscale panorama; the azimuth seam is treated as continuous.
BinaryRaster detect_edges(const Image& img, const LineConfig& cfg);

/// 8-connected components with wrap-around at the seam; small components are dropped.
std::vector<EdgeGroup> cluster_edge_groups(const BinaryRaster& edges, const LineConfig& cfg);

/// Splits a group that traces several arcs (junctions, turns) into contiguous single-circle
/// pieces by repeated consensus extraction. Each piece is itself a valid EdgeGroup.
std::vector<EdgeGroup> split_edge_group(const EdgeGroup& group, Dims dims, const LineConfig& cfg, Rng& rng);

/// RANSAC great-circle fit with least-squares refit; none when fewer than half the rays agree.
std::optional<GreatCircleSegment> fit_great_circle(const EdgeGroup& group, const LineConfig& cfg, Rng& rng);

/// Three orthogonal vanishing directions with the most inlier lines. Throws EstimationError.
VanishingBasis estimate_vanishing_basis(std::span<const GreatCircleSegment> lines, const LineConfig& cfg,
                                        Rng& rng);

/// Labels each line with the vanishing direction it passes through; unmatched lines are removed.
std::vector<GreatCircleSegment> classify_lines(std::span<const GreatCircleSegment> lines,
                                               const VanishingBasis& basis, const LineConfig& cfg);

/// Lines re-expressed in the basis frame (vp_x, vp_y, vp_z become the coordinate axes).
std::vector<GreatCircleSegment> to_basis_frame(std::span<const GreatCircleSegment> lines,
                                               const VanishingBasis& basis);

struct LineDetection {
  std::vector<GreatCircleSegment> raw;         ///< every fitted segment
  std::vector<GreatCircleSegment> classified;  ///< Manhattan lines, camera frame
  VanishingBasis basis;
  int edge_pixels = 0;
  int groups = 0;
};

/// Edges -> groups -> circle fits -> vanishing basis -> classification.
LineDetection detect_lines(const Image& panorama, const LineConfig& cfg);

}  // namespace panolayout
