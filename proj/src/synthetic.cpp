#include "panolayout/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

#include "panolayout/geometry.hpp"
#include "panolayout/structural.hpp"

namespace panolayout {

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec2 wall_dir(const std::vector<Vec2>& poly, int i) {
  return (poly[(i + 1) % poly.size()] - poly[i]).normalized();
}

double wall_length(const std::vector<Vec2>& poly, int i) { return (poly[(i + 1) % poly.size()] - poly[i]).norm(); }

bool wall_along_y(const std::vector<Vec2>& poly, int i) {
  const Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
  return std::abs(e.x()) < std::abs(e.y());
}

// Signed distance of p to the interior side of every edge of a clockwise polygon.
double kernel_margin(const std::vector<Vec2>& poly, const Vec2& p) {
  double m = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = poly[(i + 1) % n] - poly[i];
    const Vec2 w = p - poly[i];
    m = std::min(m, -(e.x() * w.y() - e.y() * w.x()) / e.norm());
  }
  return m;
}

// Counter-clockwise template outline in [0, w] x [0, d].
std::vector<Vec2> room_template(int walls, Rng& rng) {
  const double w = uniform(rng, 3.0, 6.0);
  const double d = uniform(rng, 3.0, 6.0);
  if (walls == 4) return {{0, 0}, {w, 0}, {w, d}, {0, d}};
  if (walls == 6) {
    const double nx = uniform(rng, 0.25, 0.45) * w;
    const double ny = uniform(rng, 0.25, 0.45) * d;
    return {{0, 0}, {w, 0}, {w, d - ny}, {w - nx, d - ny}, {w - nx, d}, {0, d}};
  }
  if (walls == 8) {
    const double nx1 = uniform(rng, 0.2, 0.35) * w;
    const double ny1 = uniform(rng, 0.2, 0.4) * d;
    const double nx2 = uniform(rng, 0.2, 0.35) * w;
    const double ny2 = uniform(rng, 0.2, 0.4) * d;
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
      // Two notches on the same side.
      return {{0, 0}, {w, 0}, {w, d - ny1}, {w - nx1, d - ny1}, {w - nx1, d}, {nx2, d}, {nx2, d - ny2}, {0, d - ny2}};
    }
    // Notches at opposite corners.
    return {{nx2, 0}, {w, 0}, {w, d - ny1}, {w - nx1, d - ny1}, {w - nx1, d}, {0, d}, {0, ny2}, {nx2, ny2}};
  }
  throw std::invalid_argument("sample_scene_spec: wall count must be 4, 6 or 8");
}

std::array<Vec3, 4> clutter_quad(const std::vector<Vec2>& poly, double h, const ClutterRect& c) {
  if (c.face >= 0) {
    const Vec2 o = poly[c.face];
    const Vec2 t = wall_dir(poly, c.face);
    auto at = [&](double u, double z) { return Vec3(o.x() + u * t.x(), o.y() + u * t.y(), z); };
    return {at(c.lo.x(), c.lo.y()), at(c.hi.x(), c.lo.y()), at(c.hi.x(), c.hi.y()), at(c.lo.x(), c.hi.y())};
  }
  const double z = c.face == -2 ? 1.0 : -h;
  return {Vec3(c.lo.x(), c.lo.y(), z), Vec3(c.hi.x(), c.lo.y(), z), Vec3(c.hi.x(), c.hi.y(), z),
          Vec3(c.lo.x(), c.hi.y(), z)};
}

// Clutter edges shorter than this (seen from the camera) would be too short to detect.
constexpr double kMinClutterEdgeDeg = 15.0;

std::vector<ClutterRect> sample_clutter(const std::vector<Vec2>& poly, double h, int count, Rng& rng) {
  std::vector<ClutterRect> out;
  const int n = static_cast<int>(poly.size());
  const double height = 1.0 + h;
  int guard = 0;
  while (static_cast<int>(out.size()) < count && guard++ < 1000 * (count + 1)) {
    ClutterRect r;
    const double pick = uniform(rng, 0.0, 1.0);
    if (pick < 0.6) {
      r.face = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const double len = wall_length(poly, r.face);
      const double u0 = uniform(rng, 0.05, 0.7) * len;
      const double u1 = std::min(u0 + uniform(rng, 0.12, 0.4) * len, 0.95 * len);
      const double z0 = -h + uniform(rng, 0.1, 0.5) * height;
      const double z1 = std::min(z0 + uniform(rng, 0.2, 0.5) * height, 1.0 - 0.1 * height);
      if (u1 - u0 < 0.1 * len || z1 - z0 < 0.15 * height) continue;
      r.lo = {u0, z0};
      r.hi = {u1, z1};
      r.gray = static_cast<float>(uniform(rng, 0.0, 1.0) < 0.5 ? uniform(rng, 0.0, 0.2) : uniform(rng, 0.85, 1.0));
    } else {
      r.face = pick < 0.8 ? -1 : -2;
      Vec2 lo = poly[0];
      Vec2 hi = poly[0];
      for (const Vec2& p : poly) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      const Vec2 a(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
      const Vec2 b = a + Vec2(uniform(rng, 0.4, 1.5), uniform(rng, 0.4, 1.5));
      r.lo = a;
      r.hi = b;
      const std::vector<Vec2> rect{a, {b.x(), a.y()}, b, {a.x(), b.y()}};
      bool ok = true;
      for (const Vec2& c : rect) {
        // Keep rugs and panels well away from the walls.
        if (!point_in_polygon(poly, c)) ok = false;
        for (int i = 0; i < n && ok; ++i) {
          const Vec2 e = poly[(i + 1) % n] - poly[i];
          const Vec2 w = c - poly[i];
          const double t = std::clamp(w.dot(e) / e.squaredNorm(), 0.0, 1.0);
          if ((poly[i] + t * e - c).norm() < 0.3) ok = false;
        }
      }
      for (const Vec2& p : poly) {
        if (p.x() > a.x() - 0.3 && p.x() < b.x() + 0.3 && p.y() > a.y() - 0.3 && p.y() < b.y() + 0.3) ok = false;
      }
      if (!ok) continue;
      r.gray = static_cast<float>(r.face == -1 ? uniform(rng, 0.55, 0.8) : uniform(rng, 0.4, 0.65));
    }
    const auto q = clutter_quad(poly, h, r);
    bool visible = true;
    for (int k = 0; k < 4; ++k) {
      if (angle_between(q[k], q[(k + 1) % 4]) < deg2rad(kMinClutterEdgeDeg)) visible = false;
    }
    if (!visible) continue;
    // Overlapping rectangles would hide each other's edges.
    const double gap = 0.15;
    const bool overlaps = std::any_of(out.begin(), out.end(), [&](const ClutterRect& o) {
      return o.face == r.face && r.lo.x() < o.hi.x() + gap && o.lo.x() < r.hi.x() + gap && r.lo.y() < o.hi.y() + gap &&
             o.lo.y() < r.hi.y() + gap;
    });
    if (overlaps) continue;
    out.push_back(r);
  }
  return out;
}

}  // namespace

RotationMatrix SceneSpec::rotation() const {
  const double ta = deg2rad(tilt_azimuth_deg);
  const RotationMatrix tilt = RotationMatrix::from_axis_angle(Vec3(std::cos(ta), std::sin(ta), 0.0), deg2rad(tilt_deg));
  return RotationMatrix::about_z(deg2rad(yaw_deg)) * tilt;
}

void SceneSpec::validate() const {
  LayoutModel l;
  l.polygon = polygon;
  l.floor_height = floor_height;
  if (auto v = validate_layout(l, 1e-6); !v) throw std::invalid_argument("SceneSpec: " + v.reason);
  if (kernel_margin(polygon, Vec2::Zero()) <= 0.0) throw std::invalid_argument("SceneSpec: a wall is not fully visible");
  if (!(flip_rate >= 0.0 && flip_rate < 1.0)) throw std::invalid_argument("SceneSpec: flip_rate must be in [0, 1)");
  for (const auto& c : clutter) {
    if (c.face < -2 || c.face >= wall_count()) throw std::invalid_argument("SceneSpec: clutter face out of range");
    if (!(c.lo.x() < c.hi.x() && c.lo.y() < c.hi.y())) throw std::invalid_argument("SceneSpec: empty clutter rect");
  }
}

SceneSpec sample_scene_spec(const SceneOptions& opts, std::uint64_t seed) {
  if (opts.wall_counts.empty()) throw std::invalid_argument("sample_scene_spec: no wall counts");
  Rng rng = make_rng(seed, kStreamScene);
  SceneSpec spec;
  spec.seed = seed;
  spec.flip_rate = opts.flip_rate;
  const int walls = opts.wall_counts[std::uniform_int_distribution<std::size_t>(0, opts.wall_counts.size() - 1)(rng)];
  for (int tries = 0;; ++tries) {
    if (tries > 1000) throw GenerationError("sample_scene_spec: could not place the camera");
    std::vector<Vec2> poly = room_template(walls, rng);
    // Random quarter turn, then clockwise order.
    const int quarter = std::uniform_int_distribution<int>(0, 3)(rng);
    for (Vec2& p : poly) {
      for (int k = 0; k < quarter; ++k) p = Vec2(-p.y(), p.x());
    }
    std::reverse(poly.begin(), poly.end());
    Vec2 lo = poly[0];
    Vec2 hi = poly[0];
    for (const Vec2& p : poly) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    bool placed = false;
    for (int k = 0; k < 200 && !placed; ++k) {
      const Vec2 cam(uniform(rng, lo.x(), hi.x()), uniform(rng, lo.y(), hi.y()));
      if (kernel_margin(poly, cam) < 0.8) continue;
      bool clear = true;
      for (const Vec2& p : poly) {
        if (std::abs(p.x() - cam.x()) < 0.3 || std::abs(p.y() - cam.y()) < 0.3) clear = false;
      }
      if (!clear) continue;
      for (Vec2& p : poly) p -= cam;
      placed = true;
    }
    if (!placed) continue;
    spec.polygon = poly;
    spec.floor_height = uniform(rng, opts.min_height, opts.max_height);
    LayoutModel l;
    l.polygon = poly;
    l.floor_height = spec.floor_height;
    if (!validate_layout(l, 1e-6)) continue;
    break;
  }
  spec.yaw_deg = uniform(rng, -opts.max_yaw_deg, opts.max_yaw_deg);
  if (opts.max_tilt_deg > 0.0) {
    spec.tilt_deg = uniform(rng, 0.0, opts.max_tilt_deg);
    spec.tilt_azimuth_deg = uniform(rng, -180.0, 180.0);
  }
  spec.clutter = sample_clutter(spec.polygon, spec.floor_height, opts.clutter_rects, rng);
  spec.validate();
  return spec;
}

SceneSpec box_scene(double a1, double a2, double b1, double b2, double floor_height) {
  SceneSpec s;
  s.polygon = {{-a1, -b1}, {-a1, b2}, {a2, b2}, {a2, -b1}};
  s.floor_height = floor_height;
  s.validate();
  return s;
}

std::vector<Vec3> Scene::room_corners() const {
  std::vector<Vec3> out;
  for (int i = 0; i < layout.wall_count(); ++i) out.push_back(layout.ceiling_vertex(i));
  for (int i = 0; i < layout.wall_count(); ++i) out.push_back(layout.floor_vertex(i));
  return out;
}

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Scene s;
  s.spec = spec;
  s.layout.polygon = spec.polygon;
  s.layout.floor_height = spec.floor_height;
  s.rotation = spec.rotation();
  const auto& poly = spec.polygon;
  const int n = spec.wall_count();
  const double h = spec.floor_height;
  auto seg = [&](const Vec3& a, const Vec3& b, Axis axis) {
    return segment_from_points(s.rotation * a, s.rotation * b, axis);
  };
  auto horizontal_axis = [](const Vec2& e) { return std::abs(e.x()) > std::abs(e.y()) ? Axis::X : Axis::Y; };
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % n];
    const Axis ax = horizontal_axis(b - a);
    s.structural.push_back(seg({a.x(), a.y(), 1.0}, {b.x(), b.y(), 1.0}, ax));
    s.structural.push_back(seg({a.x(), a.y(), -h}, {b.x(), b.y(), -h}, ax));
    s.structural.push_back(seg({a.x(), a.y(), 1.0}, {a.x(), a.y(), -h}, Axis::Z));
  }
  for (const auto& c : spec.clutter) {
    const std::array<Vec3, 4> q = clutter_quad(poly, h, c);
    for (int k = 0; k < 4; ++k) {
      const Vec3 e = q[(k + 1) % 4] - q[k];
      const Axis ax = std::abs(e.z()) > 1e-12 ? Axis::Z : horizontal_axis(e.head<2>());
      s.clutter.push_back(seg(q[k], q[(k + 1) % 4], ax));
    }
  }
  for (const Vec3& c : s.room_corners()) s.corners.push_back(UnitVec3(s.rotation * c));
  return s;
}

namespace {

// Face hit by a room-frame ray: walls 0..n-1, ceiling n, floor n+1; -1 if none.
struct FaceHit {
  int face = -1;
  Vec3 point = Vec3::Zero();
};

FaceHit nearest_face(const SceneSpec& spec, const Vec3& d) {
  const auto& poly = spec.polygon;
  const int n = spec.wall_count();
  const double h = spec.floor_height;
  FaceHit best;
  double best_s = std::numeric_limits<double>::infinity();
  auto consider = [&](int face, double s) {
    if (s > 0.0 && s < best_s) {
      best_s = s;
      best.face = face;
      best.point = s * d;
    }
  };
  if (d.z() > 0.0) {
    const double s = 1.0 / d.z();
    if (point_in_polygon(poly, s * d.head<2>())) consider(n, s);
  } else if (d.z() < 0.0) {
    const double s = h / -d.z();
    if (point_in_polygon(poly, s * d.head<2>())) consider(n + 1, s);
  }
  for (int i = 0; i < n; ++i) {
    const Vec2& a = poly[i];
    const Vec2 t = wall_dir(poly, i);
    const Vec2 nrm(-t.y(), t.x());
    const double denom = nrm.dot(d.head<2>());
    if (std::abs(denom) < 1e-15) continue;
    const double s = nrm.dot(a) / denom;
    const Vec3 q = s * d;
    const double u = (q.head<2>() - a).dot(t);
    if (u < 0.0 || u >= wall_length(poly, i) || q.z() < -h || q.z() >= 1.0) continue;
    consider(i, s);
  }
  return best;
}

float face_shade(const SceneSpec& spec, const FaceHit& hit) {
  const int n = spec.wall_count();
  if (hit.face < 0) return 0.0f;
  for (const auto& c : spec.clutter) {
    if ((c.face == -1 && hit.face == n + 1) || (c.face == -2 && hit.face == n)) {
      const Vec2 p = hit.point.head<2>();
      if (p.x() >= c.lo.x() && p.x() < c.hi.x() && p.y() >= c.lo.y() && p.y() < c.hi.y()) return c.gray;
    } else if (c.face >= 0 && c.face == hit.face) {
      const double u = (hit.point.head<2>() - spec.polygon[c.face]).dot(wall_dir(spec.polygon, c.face));
      const double z = hit.point.z();
      if (u >= c.lo.x() && u < c.hi.x() && z >= c.lo.y() && z < c.hi.y()) return c.gray;
    }
  }
  if (hit.face == n) return 230.0f / 255.0f;
  if (hit.face == n + 1) return 60.0f / 255.0f;
  return wall_along_y(spec.polygon, hit.face) ? 120.0f / 255.0f : 170.0f / 255.0f;
}

}  // namespace

LabeledImage analytic_labels(const Scene& scene, Dims dims) {
  require_equirect(dims);
  const Mat3 rt = scene.rotation.matrix().transpose();
  const int n = scene.spec.wall_count();
  LabeledImage out(dims, Label::None);
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const FaceHit hit = nearest_face(scene.spec, rt * pixel_to_ray(PixelIndex{r, c}, dims).vec());
      if (hit.face < 0) continue;
      if (hit.face >= n) {
        out.at(r, c) = Label::Z;
      } else {
        out.at(r, c) = wall_along_y(scene.spec.polygon, hit.face) ? Label::X : Label::Y;
      }
    }
  }
  return out;
}

Image render_panorama(const Scene& scene, Dims dims, int supersample) {
  require_equirect(dims);
  if (supersample < 1) throw std::invalid_argument("render_panorama: supersample must be >= 1");
  const Mat3 rt = scene.rotation.matrix().transpose();
  Image img(dims.rows, dims.cols, 1);
  const double step = 1.0 / supersample;
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      double acc = 0.0;
      for (int i = 0; i < supersample; ++i) {
        for (int j = 0; j < supersample; ++j) {
          const PixelCoord p{r - 0.5 + (i + 0.5) * step, c - 0.5 + (j + 0.5) * step};
          acc += face_shade(scene.spec, nearest_face(scene.spec, rt * pixel_to_ray(p, dims).vec()));
        }
      }
      img.at(r, c) = static_cast<float>(acc / (supersample * supersample));
    }
  }
  return img;
}

ProbabilityMap synth_edge_map(std::span<const GreatCircleSegment> segments, Dims dims, double sigma_px) {
  if (!(sigma_px > 0.0)) throw std::invalid_argument("synth_edge_map: sigma_px must be > 0");
  require_equirect(dims);
  ProbabilityMap out(dims, 0.0f);
  if (segments.empty()) return out;
  // Pad by wrapping columns so distances are continuous across the seam.
  const int pad = static_cast<int>(std::ceil(5.0 * sigma_px)) + 1;
  const int pw = dims.cols + 2 * pad;
  cv::Mat src(dims.rows, pw, CV_8U, cv::Scalar(255));
  for (const auto& s : segments) {
    for (const PixelIndex& p : rasterize_arc(s, dims)) {
      for (int k = -1; k <= 1; ++k) {
        const int c = p.col + pad + k * dims.cols;
        if (c >= 0 && c < pw) src.at<std::uint8_t>(p.row, c) = 0;
      }
    }
  }
  cv::Mat dist;
  cv::distanceTransform(src, dist, cv::DIST_L2, cv::DIST_MASK_PRECISE);
  const double inv = 1.0 / (2.0 * sigma_px * sigma_px);
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const double d = dist.at<float>(r, c + pad);
      out.at(r, c) = static_cast<float>(std::exp(-d * d * inv));
    }
  }
  return out;
}

NormalMap synth_normal_map(const LabeledImage& labels, const RotationMatrix& basis, double flip_rate,
                           std::uint64_t seed, std::optional<double> ceiling_nil_rate) {
  if (!(flip_rate >= 0.0 && flip_rate < 1.0)) throw std::invalid_argument("synth_normal_map: flip_rate must be in [0, 1)");
  const double ceil_nil = ceiling_nil_rate ? *ceiling_nil_rate : std::min(3.0 * flip_rate, 0.9);
  if (!(ceil_nil >= 0.0 && ceil_nil <= 1.0)) throw std::invalid_argument("synth_normal_map: ceiling nil rate must be in [0, 1]");
  const double nil_rate = std::min(flip_rate / 2.0, 1.0 - flip_rate);
  Rng rng = make_rng(seed, kStreamNormals);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Dims dims = labels.dims();
  const Vec3 up = basis.column(2);
  NormalMap out(dims, Eigen::Vector3f::Zero());
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const Label lab = labels.at(r, c);
      // Draw all variates up front so the stream position is label-independent.
      const double u_ceiling = u01(rng);
      const double u = u01(rng);
      const double u_wrong = u01(rng);
      if (lab == Label::None) continue;
      int axis = static_cast<int>(lab) - 1;
      if (lab == Label::Z && pixel_to_ray(PixelIndex{r, c}, dims).dot(up) > 0.0 && u_ceiling < ceil_nil) continue;
      if (u < flip_rate) {
        axis = (axis + 1 + (u_wrong < 0.5 ? 0 : 1)) % 3;
      } else if (u < flip_rate + nil_rate) {
        continue;
      }
      out.at(r, c) = basis.column(axis).cast<float>();
    }
  }
  return out;
}

std::vector<UnitVec3> sample_arc_rays(const GreatCircleSegment& seg, int count, double sigma_deg, Rng& rng) {
  std::vector<UnitVec3> out;
  const Vec3 e1 = seg.d1.vec();
  const Vec3 e2 = seg.normal.vec().cross(e1);
  const double span = seg.span();
  const double sigma = deg2rad(sigma_deg);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int k = 0; k < count; ++k) {
    const double t = count > 1 ? span * k / (count - 1) : 0.0;
    const Vec3 v = std::cos(t) * e1 + std::sin(t) * e2;
    const Vec3 tangent = seg.normal.vec().cross(v);
    const Vec3 perturbed = v + sigma * (g(rng) * seg.normal.vec() + g(rng) * tangent);
    out.emplace_back(perturbed);
  }
  return out;
}

GreatCircleSegment random_arc(Rng& rng, double min_len_deg, double max_len_deg) {
  std::normal_distribution<double> g(0.0, 1.0);
  const Vec3 normal = Vec3(g(rng), g(rng), g(rng)).normalized();
  Vec3 any = Vec3(g(rng), g(rng), g(rng));
  const Vec3 d1 = (any - any.dot(normal) * normal).normalized();
  const Vec3 e2 = normal.cross(d1);
  const double len = deg2rad(uniform(rng, min_len_deg, max_len_deg));
  GreatCircleSegment s;
  s.normal = UnitVec3(normal);
  s.d1 = UnitVec3(d1);
  s.d2 = UnitVec3(std::cos(len) * d1 + std::sin(len) * e2);
  return s;
}

}  // namespace panolayout
