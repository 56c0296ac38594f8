#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "panolayout/lines.hpp"
#include "panolayout/types.hpp"

namespace panolayout {

enum class Hemisphere : std::uint8_t { Ceiling, Floor };

/// Quadrants around the camera, split by the horizontal vanishing directions:
/// q1 = (+x,+y), q2 = (-x,+y), q3 = (-x,-y), q4 = (+x,-y).
enum class Quadrant : std::uint8_t { Q1 = 0, Q2 = 1, Q3 = 2, Q4 = 3 };

const char* to_string(Hemisphere h);
const char* to_string(Quadrant q);

struct CornerClass {
  Hemisphere hemisphere;
  Quadrant quadrant;
  friend bool operator==(const CornerClass&, const CornerClass&) = default;
};

/// Ray towards a potential wall/wall/ceiling-or-floor junction, in the basis frame.
struct CornerCandidate {
  UnitVec3 dir;
  Hemisphere hemisphere = Hemisphere::Ceiling;
  Quadrant quadrant = Quadrant::Q1;
  std::pair<int, int> parents{-1, -1};
  double weight = 0.0;  ///< support used when merging duplicates
};

struct CornerConfig {
  double gap_tolerance_deg = 10.0;  ///< max distance from the corner to a segment endpoint
  double overshoot_deg = 2.0;       ///< how far inside a segment's span a corner may fall
  double merge_deg = 1.0;
};

/// Corner direction where two differently oriented segments meet: the sign of n_a x n_b that
/// lies near an endpoint of both segments without falling inside either span. Both segments must
/// be in the same frame; the result is in that frame.
std::optional<UnitVec3> intersect_lines(const GreatCircleSegment& a, const GreatCircleSegment& b,
                                        const CornerConfig& cfg);

/// Hemisphere by sign(z), quadrant by sign(x), sign(y). Directions on the horizon or on a
/// quadrant divider are not classifiable.
std::optional<CornerClass> classify_corner(const Vec3& dir_in_basis);

/// Greedy angular clustering with a fixed-point pass; each cluster keeps its weighted medoid.
std::vector<CornerCandidate> dedup_corners(std::span<const CornerCandidate> cands, double merge_deg);

/// All pairwise intersections of differently classified lines (camera frame), expressed in the
/// basis frame, classified and deduplicated.
std::vector<CornerCandidate> extract_corner_candidates(std::span<const GreatCircleSegment> lines,
                                                       const VanishingBasis& basis, const CornerConfig& cfg);

}  // namespace panolayout
