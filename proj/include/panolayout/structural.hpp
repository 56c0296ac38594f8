#pragma once

#include <span>
#include <vector>

#include "panolayout/lines.hpp"
#include "panolayout/types.hpp"

namespace panolayout {

struct FilterConfig {
  double tau = 0.2;                 ///< edge-map values below this are noise
  double score_fraction = 0.10;     ///< keep a line iff score >= fraction * pixel_length
  double label_angle_tol_deg = 30.0;
};

/// Values below tau become 0; the rest are unchanged.
ProbabilityMap threshold_probability(const ProbabilityMap& m, double tau);

/// Pixels occupied by the arc d1 -> d2: the circle is walked in steps of half the local
/// pixel angular size, duplicates removed, order preserved. Wraps at the seam.
std::vector<PixelIndex> rasterize_arc(const GreatCircleSegment& seg, Dims dims);

struct LineScore {
  double score = 0.0;
  int pixel_count = 0;
};

/// Sum of map values over the pixels the arc occupies.
LineScore score_line(const GreatCircleSegment& seg, const ProbabilityMap& m);

/// Lines whose score reaches `fraction` of their pixel length.
std::vector<GreatCircleSegment> filter_structural_lines(std::span<const GreatCircleSegment> lines,
                                                        const ProbabilityMap& m, double fraction = 0.10);

/// Per-pixel axis whose vanishing direction (either sign) is closest to the normal, if within
/// angle_tol; otherwise None. Nil normals are None.
LabeledImage label_normals(const NormalMap& nm, const VanishingBasis& basis, double angle_tol_deg);

}  // namespace panolayout
