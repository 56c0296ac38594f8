#include "panolayout/layout.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace panolayout {

double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Vec2& a, const Vec2& b, const Vec2& c, double eps) {
  const double v = cross2(b - a, c - a);
  if (v > eps) return 1;
  if (v < -eps) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p, double eps) {
  return p.x() <= std::max(a.x(), b.x()) + eps && p.x() >= std::min(a.x(), b.x()) - eps &&
         p.y() <= std::max(a.y(), b.y()) + eps && p.y() >= std::min(a.y(), b.y()) - eps;
}

bool segments_touch(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2, double eps) {
  const int o1 = orientation(p1, p2, q1, eps);
  const int o2 = orientation(p1, p2, q2, eps);
  const int o3 = orientation(q1, q2, p1, eps);
  const int o4 = orientation(q1, q2, p2, eps);
  if (o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) return true;
  if (o1 == 0 && on_segment(p1, p2, q1, eps)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2, eps)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1, eps)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2, eps)) return true;
  return false;
}

double distance_to_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + t * ab - p).norm();
}

Validation fail(std::string why) { return {false, std::move(why)}; }

}  // namespace

Validation validate_layout(const LayoutModel& layout, double manhattan_tol_deg) {
  const auto& poly = layout.polygon;
  const int n = static_cast<int>(poly.size());
  if (n < 4) return fail("fewer than 4 vertices");
  if (n % 2 != 0) return fail("odd number of walls");
  if (!(layout.floor_height > 0.0) || !std::isfinite(layout.floor_height)) return fail("non-positive floor height");
  for (const Vec2& p : poly) {
    if (!p.allFinite()) return fail("non-finite vertex");
  }
  if (layout.group_size > 0 && n > 2 * (layout.group_size - 1)) return fail("wall count exceeds 2(group_size - 1)");

  double extent = 0.0;
  for (const Vec2& p : poly) extent = std::max(extent, p.cwiseAbs().maxCoeff());
  const double eps = 1e-9 * std::max(1.0, extent);

  // Axis-parallel edges with strictly alternating orientation.
  const double tol = deg2rad(manhattan_tol_deg);
  std::vector<int> orient(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    if (e.norm() <= eps) return fail("degenerate wall");
    const double off_x = std::atan2(std::abs(e.y()), std::abs(e.x()));  // angle from the x axis
    if (off_x <= tol) {
      orient[i] = 0;
    } else if (kPi / 2 - off_x <= tol) {
      orient[i] = 1;
    } else {
      return fail("wall not axis-parallel");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (orient[i] == orient[(i + 1) % n]) return fail("consecutive walls share an orientation");
    const Vec2 e0 = poly[(i + 1) % n] - poly[i];
    const Vec2 e1 = poly[(i + 2) % n] - poly[(i + 1) % n];
    const double turn = std::abs(std::atan2(cross2(e0, e1), e0.dot(e1)));
    if (std::abs(turn - kPi / 2) > tol) return fail("corner angle outside 90 +- tolerance");
  }

  if (signed_area(poly) >= 0.0) return fail("polygon is not clockwise");

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_touch(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], eps)) {
        return fail("self-intersecting polygon");
      }
    }
  }

  const Vec2 origin = Vec2::Zero();
  for (int i = 0; i < n; ++i) {
    if (distance_to_segment(poly[i], poly[(i + 1) % n], origin) <= eps) return fail("camera on a wall");
  }
  if (!point_in_polygon(poly, origin)) return fail("camera outside the room");

  std::array<int, 4> per_quadrant{0, 0, 0, 0};
  for (const Vec2& p : poly) {
    if (std::abs(p.x()) <= eps || std::abs(p.y()) <= eps) return fail("corner on a quadrant divider");
    const int q = p.x() > 0 ? (p.y() > 0 ? 0 : 3) : (p.y() > 0 ? 1 : 2);
    ++per_quadrant[q];
  }
  for (int c : per_quadrant) {
    if (c % 2 == 0) return fail("even number of corners in a quadrant");
  }
  return {};
}

}  // namespace panolayout
