#pragma once

#include <string>
#include <vector>

#include "panolayout/types.hpp"

namespace panolayout {

/// Closed Manhattan room, up to scale: the ceiling is the plane z = +1 and the floor z = -h,
/// both in the vanishing-basis frame with the camera at the origin.
struct LayoutModel {
  /// Clockwise (seen from above) rectilinear ceiling polygon.
  std::vector<Vec2> polygon;
  double floor_height = 1.0;
  /// Candidate index that produced each vertex; -1 marks an inserted (hidden) corner.
  std::vector<int> vertex_sources;
  /// Number of sampled corners the layout was built from; 0 when not built from a sample.
  int group_size = 0;

  int wall_count() const { return static_cast<int>(polygon.size()); }
  bool inserted(int i) const {
    return i < static_cast<int>(vertex_sources.size()) && vertex_sources[i] < 0;
  }
  Vec3 ceiling_vertex(int i) const { return {polygon[i].x(), polygon[i].y(), 1.0}; }
  Vec3 floor_vertex(int i) const { return {polygon[i].x(), polygon[i].y(), -floor_height}; }
};

struct Validation {
  bool ok = true;
  std::string reason;
  explicit operator bool() const { return ok; }
};

/// Checks every structural invariant of a layout: even vertex count >= 4, axis-parallel edges
/// that alternate orientation, right angles within tolerance, clockwise and simple polygon,
/// origin strictly inside, an odd number of vertices per quadrant, positive floor height and
/// the 2 (n - 1) wall bound when the group size is known.
Validation validate_layout(const LayoutModel& layout, double manhattan_tol_deg = 5.0);

/// Signed area (positive for counter-clockwise).
double signed_area(const std::vector<Vec2>& poly);

/// Even-odd point-in-polygon test with a half-open edge convention.
bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p);

}  // namespace panolayout
