#include "panolayout/evaluation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "panolayout/geometry.hpp"

namespace panolayout {

RayGrid make_ray_grid(Dims dims, const Mat3& camera_to_layout) {
  RayGrid g;
  g.dims = dims;
  g.rays.resize(dims.size());
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      g.rays[static_cast<std::size_t>(r) * dims.cols + c] = camera_to_layout * pixel_to_ray(PixelIndex{r, c}, dims).vec();
    }
  }
  return g;
}

Label cast_label(const LayoutModel& layout, const Vec3& d) {
  const auto& poly = layout.polygon;
  const int n = layout.wall_count();
  const double dx = d.x();
  const double dy = d.y();

  // Distance parameter s (point = s * d) to the first wall crossing of the horizontal projection.
  double s_wall = std::numeric_limits<double>::infinity();
  Label wall_label = Label::None;
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    double s;
    double along;
    double lo;
    double hi;
    Label lab;
    if (std::abs(b.x() - a.x()) < std::abs(b.y() - a.y())) {
      // Wall along y at x = a.x (snapped layouts share x exactly).
      if (dx == 0.0) continue;
      s = 0.5 * (a.x() + b.x()) / dx;
      along = s * dy;
      lo = std::min(a.y(), b.y());
      hi = std::max(a.y(), b.y());
      lab = Label::X;
    } else {
      if (dy == 0.0) continue;
      s = 0.5 * (a.y() + b.y()) / dy;
      along = s * dx;
      lo = std::min(a.x(), b.x());
      hi = std::max(a.x(), b.x());
      lab = Label::Y;
    }
    if (s <= 0.0 || along < lo || along >= hi) continue;
    if (s < s_wall) {
      s_wall = s;
      wall_label = lab;
    }
  }

  double s_plane = std::numeric_limits<double>::infinity();
  if (d.z() > 0.0) {
    s_plane = 1.0 / d.z();
  } else if (d.z() < 0.0) {
    s_plane = layout.floor_height / -d.z();
  }
  if (s_plane <= s_wall) return Label::Z;
  return wall_label;
}

LabeledImage render_labels(const LayoutModel& layout, const RayGrid& grid) {
  if (auto v = validate_layout(layout); !v) throw std::invalid_argument("render_labels: invalid layout: " + v.reason);
  LabeledImage out(grid.dims, Label::None);
  for (std::size_t i = 0; i < grid.rays.size(); ++i) out[i] = cast_label(layout, grid.rays[i]);
  return out;
}

LabeledImage render_labels(const LayoutModel& layout, Dims dims) { return render_labels(layout, make_ray_grid(dims)); }

double eop(const LabeledImage& a, const LabeledImage& b) {
  if (a.dims() != b.dims()) throw std::invalid_argument("eop: dimension mismatch");
  if (a.empty()) throw std::invalid_argument("eop: empty image");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    if (a[i] != Label::None && a[i] == b[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(a.data().size());
}

Selection select_best(std::span<const LayoutModel> hyps, const LabeledImage& ref, const Mat3& camera_to_layout) {
  if (hyps.empty()) throw std::invalid_argument("select_best: no hypotheses");
  const RayGrid grid = make_ray_grid(ref.dims(), camera_to_layout);
  Selection best;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const double score = eop(render_labels(hyps[i], grid), ref);
    const bool better = best.index < 0 || score > best.score ||
                        (score == best.score && hyps[i].wall_count() < hyps[best.index].wall_count());
    if (better) best = {static_cast<int>(i), score};
  }
  return best;
}

LabeledImage resample_labels(const LabeledImage& img, Dims dims) {
  if (img.empty() || dims.rows <= 0 || dims.cols <= 0) throw std::invalid_argument("resample_labels: empty");
  LabeledImage out(dims);
  for (int r = 0; r < dims.rows; ++r) {
    const int sr = std::min(img.rows() - 1, static_cast<int>((r + 0.5) * img.rows() / dims.rows));
    for (int c = 0; c < dims.cols; ++c) {
      const int sc = std::min(img.cols() - 1, static_cast<int>((c + 0.5) * img.cols() / dims.cols));
      out.at(r, c) = img.at(sr, sc);
    }
  }
  return out;
}

}  // namespace panolayout
