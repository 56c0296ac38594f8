#pragma once

#include <span>
#include <vector>

#include "panolayout/layout.hpp"
#include "panolayout/types.hpp"

namespace panolayout {

/// Per-pixel rays expressed in the layout (basis) frame, reused across hypotheses.
struct RayGrid {
  Dims dims;
  std::vector<Vec3> rays;
};

/// Rays for every pixel of `dims`; `camera_to_layout` maps camera-frame rays into the layout frame
/// (for a vanishing basis R this is R^T).
RayGrid make_ray_grid(Dims dims, const Mat3& camera_to_layout = Mat3::Identity());

/// Label of the first surface hit along one layout-frame ray. Walls along y (normal along x)
/// are X, walls along x are Y, ceiling and floor are Z.
Label cast_label(const LayoutModel& layout, const Vec3& ray);

/// Orientation image of the layout prism seen from the origin. Throws std::invalid_argument for an
/// invalid layout.
LabeledImage render_labels(const LayoutModel& layout, const RayGrid& grid);
LabeledImage render_labels(const LayoutModel& layout, Dims dims);

/// Fraction of all M*N pixels where both images carry the same (non-None) label.
double eop(const LabeledImage& a, const LabeledImage& b);

struct Selection {
  int index = -1;
  double score = 0.0;
};

/// Highest-EOP hypothesis against ref, rendered at ref's resolution. Ties go to fewer walls, then
/// the earlier index. Throws std::invalid_argument for an empty list.
Selection select_best(std::span<const LayoutModel> hyps, const LabeledImage& ref,
                      const Mat3& camera_to_layout = Mat3::Identity());

/// Nearest-neighbour resampling of a label image to new dimensions.
LabeledImage resample_labels(const LabeledImage& img, Dims dims);

}  // namespace panolayout
