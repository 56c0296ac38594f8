#include "panolayout/structural.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "panolayout/geometry.hpp"

namespace panolayout {

ProbabilityMap threshold_probability(const ProbabilityMap& m, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("threshold_probability: tau must be in [0, 1]");
  ProbabilityMap out = m;
  for (float& v : out.data()) {
    if (v < tau) v = 0.0f;
  }
  return out;
}

std::vector<PixelIndex> rasterize_arc(const GreatCircleSegment& seg, Dims dims) {
  std::vector<PixelIndex> out;
  const double span = seg.span();
  if (!(span > 0.0) || span >= 2.0 * kPi) return out;
  const Vec3 e1 = seg.d1.vec();
  const Vec3 e2 = seg.normal.vec().cross(e1);
  const double pixel_angle = kPi / dims.rows;

  std::unordered_set<long long> seen;
  auto push = [&](const Vec3& v) {
    const PixelIndex p = ray_to_index(v, dims);
    if (seen.insert(static_cast<long long>(p.row) * dims.cols + p.col).second) out.push_back(p);
  };
  double t = 0.0;
  while (t < span) {
    const Vec3 v = std::cos(t) * e1 + std::sin(t) * e2;
    push(v);
    // Columns narrow towards the poles; shrink the step so no pixel is skipped.
    const double local = pixel_angle * std::max(std::cos(elevation(v)), 0.02);
    t += 0.5 * local;
  }
  push(seg.d2.vec());
  return out;
}

LineScore score_line(const GreatCircleSegment& seg, const ProbabilityMap& m) {
  LineScore s;
  for (const PixelIndex& p : rasterize_arc(seg, m.dims())) {
    s.score += m.at(p.row, p.col);
    ++s.pixel_count;
  }
  return s;
}

std::vector<GreatCircleSegment> filter_structural_lines(std::span<const GreatCircleSegment> lines,
                                                        const ProbabilityMap& m, double fraction) {
  std::vector<GreatCircleSegment> out;
  for (const auto& l : lines) {
    if (score_line(l, m).score >= fraction * l.pixel_length) out.push_back(l);
  }
  return out;
}

LabeledImage label_normals(const NormalMap& nm, const VanishingBasis& basis, double angle_tol_deg) {
  const double cos_tol = std::cos(deg2rad(angle_tol_deg));
  LabeledImage out(nm.dims(), Label::None);
  const Mat3 rt = basis.R.matrix().transpose();
  for (std::size_t i = 0; i < nm.data().size(); ++i) {
    const Eigen::Vector3f& n = nm[i];
    const float len = n.norm();
    if (len < 1e-6f) continue;
    // |cos| against each axis in the basis frame; sign-insensitive.
    const Vec3 b = (rt * n.cast<double>()) / len;
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (std::abs(b[k]) > std::abs(b[best])) best = k;
    }
    if (std::abs(b[best]) >= cos_tol) out[i] = label_of(static_cast<Axis>(best));
  }
  return out;
}

}  // namespace panolayout
