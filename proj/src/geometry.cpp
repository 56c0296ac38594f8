#include "panolayout/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace panolayout {

UnitVec3::UnitVec3(const Vec3& v) {
  const double n = v.norm();
  if (!(n > 1e-300) || !std::isfinite(n)) {
    throw std::invalid_argument("UnitVec3: zero or non-finite vector");
  }
  v_ = v / n;
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  const double ortho = (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!(ortho <= 1e-9) || !(std::abs(det - 1.0) <= 1e-9)) {
    throw std::invalid_argument("RotationMatrix: not a proper rotation");
  }
}

RotationMatrix RotationMatrix::nearest(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return RotationMatrix(svd.matrixU() * d * svd.matrixV().transpose());
}

RotationMatrix RotationMatrix::about_z(double radians) {
  return from_axis_angle(Vec3::UnitZ(), radians);
}

RotationMatrix RotationMatrix::from_axis_angle(const Vec3& axis, double radians) {
  return nearest(Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix());
}

RotationMatrix RotationMatrix::transposed() const {
  RotationMatrix out;
  out.m_ = m_.transpose();
  return out;
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& o) const {
  return nearest(m_ * o.m_);
}

void require_equirect(Dims dims) {
  if (dims.rows < 1 || dims.cols != 2 * dims.rows) {
    throw std::invalid_argument("equirectangular image must have width = 2 * height (got " +
                                std::to_string(dims.cols) + "x" + std::to_string(dims.rows) + ")");
  }
}

void require_equirect(const Image& img) {
  require_equirect(img.dims());
  if (img.channels < 1 || img.samples.size() != img.dims().size() * img.channels) {
    throw std::invalid_argument("equirectangular image: sample buffer does not match dims");
  }
}

const char* to_string(Axis a) {
  switch (a) {
    case Axis::X: return "X";
    case Axis::Y: return "Y";
    case Axis::Z: return "Z";
    default: return "unclassified";
  }
}

Axis axis_from_string(const std::string& s) {
  if (s == "X" || s == "x") return Axis::X;
  if (s == "Y" || s == "y") return Axis::Y;
  if (s == "Z" || s == "z") return Axis::Z;
  if (s == "unclassified") return Axis::Unclassified;
  throw std::invalid_argument("unknown axis '" + s + "'");
}

UnitVec3 pixel_to_ray(PixelCoord p, Dims dims) {
  if (dims.rows < 1 || dims.cols < 1) throw std::invalid_argument("pixel_to_ray: empty dims");
  if (!(p.row >= -0.5 && p.row <= dims.rows - 0.5 && p.col >= -0.5 && p.col <= dims.cols - 0.5)) {
    throw std::invalid_argument("pixel_to_ray: pixel out of bounds");
  }
  const double theta = 2.0 * kPi * (p.col + 0.5) / dims.cols - kPi;
  const double phi = kPi / 2.0 - kPi * (p.row + 0.5) / dims.rows;
  const double c = std::cos(phi);
  return UnitVec3(c * std::cos(theta), c * std::sin(theta), std::sin(phi));
}

UnitVec3 pixel_to_ray(PixelIndex p, Dims dims) {
  return pixel_to_ray(PixelCoord{static_cast<double>(p.row), static_cast<double>(p.col)}, dims);
}

double azimuth(const Vec3& v) { return std::atan2(v.y(), v.x()); }

double elevation(const Vec3& v) { return std::atan2(v.z(), std::hypot(v.x(), v.y())); }

PixelCoord ray_to_pixel(const Vec3& v, Dims dims) {
  const double n = v.norm();
  if (!(n > 1e-300)) throw std::invalid_argument("ray_to_pixel: zero vector");
  const double horiz = std::hypot(v.x(), v.y());
  const double phi = std::atan2(v.z(), horiz);
  const double row = (kPi / 2.0 - phi) * dims.rows / kPi - 0.5;
  if (horiz <= 1e-15 * n) return {row, 0.0};
  const double theta = std::atan2(v.y(), v.x());
  const double col = (theta + kPi) * dims.cols / (2.0 * kPi) - 0.5;
  return {row, col};
}

PixelIndex ray_to_index(const Vec3& v, Dims dims) {
  const PixelCoord p = ray_to_pixel(v, dims);
  const int r = std::clamp(static_cast<int>(std::floor(p.row + 0.5)), 0, dims.rows - 1);
  const int c = wrap_col(static_cast<int>(std::floor(p.col + 0.5)), dims.cols);
  return {r, c};
}

std::vector<UnitVec3> golden_spiral_directions(int n) {
  if (n < 1) throw std::invalid_argument("golden_spiral_directions: n must be >= 1");
  const double golden_angle = kPi * (3.0 - std::sqrt(5.0));
  std::vector<UnitVec3> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double a = k * golden_angle;
    out.emplace_back(r * std::cos(a), r * std::sin(a), z);
  }
  return out;
}

void ViewSpec::validate() const {
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw std::invalid_argument("ViewSpec: fov must be in (0, 180)");
  if (resolution < 2) throw std::invalid_argument("ViewSpec: resolution must be >= 2");
}

double ViewSpec::focal_px() const { return 0.5 * resolution / std::tan(deg2rad(fov_deg) / 2.0); }

Mat3 ViewSpec::rotation() const {
  const Vec3 f = center.vec();
  Vec3 up = Vec3::UnitZ() - f.z() * f;
  if (up.norm() < 1e-9) up = Vec3::UnitX() - f.x() * f;
  up.normalize();
  Vec3 right = f.cross(up);
  if (roll_deg != 0.0) {
    const double a = deg2rad(roll_deg);
    const Vec3 r2 = std::cos(a) * right + std::sin(a) * up;
    const Vec3 u2 = -std::sin(a) * right + std::cos(a) * up;
    right = r2;
    up = u2;
  }
  Mat3 m;
  m.col(0) = right;
  m.col(1) = -up;
  m.col(2) = f;
  return m;
}

std::vector<ViewSpec> spiral_views(int count, double fov_deg, int resolution) {
  std::vector<ViewSpec> views;
  for (const UnitVec3& d : golden_spiral_directions(count)) {
    ViewSpec v;
    v.center = d;
    v.fov_deg = fov_deg;
    v.resolution = resolution;
    v.validate();
    views.push_back(v);
  }
  return views;
}

float sample_bilinear(const Image& img, PixelCoord p, int ch) {
  const double r = std::clamp(p.row, 0.0, static_cast<double>(img.rows - 1));
  const int r0 = static_cast<int>(std::floor(r));
  const int r1 = std::min(r0 + 1, img.rows - 1);
  const double fr = r - r0;
  const double cf = std::floor(p.col);
  const int c0 = wrap_col(static_cast<int>(cf), img.cols);
  const int c1 = wrap_col(c0 + 1, img.cols);
  const double fc = p.col - cf;
  const double top = (1.0 - fc) * img.at(r0, c0, ch) + fc * img.at(r0, c1, ch);
  const double bot = (1.0 - fc) * img.at(r1, c0, ch) + fc * img.at(r1, c1, ch);
  return static_cast<float>((1.0 - fr) * top + fr * bot);
}

namespace {

Vec3 view_pixel_ray(const Mat3& rot, double focal, int res, double row, double col) {
  const Vec3 cam(col + 0.5 - res / 2.0, row + 0.5 - res / 2.0, focal);
  return (rot * cam).normalized();
}

float sample_clamped(const Raster<float>& r, PixelCoord p) {
  const double y = std::clamp(p.row, 0.0, static_cast<double>(r.rows() - 1));
  const double x = std::clamp(p.col, 0.0, static_cast<double>(r.cols() - 1));
  const int y0 = static_cast<int>(std::floor(y));
  const int x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, r.rows() - 1);
  const int x1 = std::min(x0 + 1, r.cols() - 1);
  const double fy = y - y0;
  const double fx = x - x0;
  return static_cast<float>((1 - fy) * ((1 - fx) * r.at(y0, x0) + fx * r.at(y0, x1)) +
                            fy * ((1 - fx) * r.at(y1, x0) + fx * r.at(y1, x1)));
}

}  // namespace

bool world_ray_to_view(const Mat3& view_rotation, double focal, int resolution, const Vec3& ray,
                       PixelCoord& out) {
  const Vec3 c = view_rotation.transpose() * ray;
  if (c.z() <= 1e-12) return false;
  const double col = focal * c.x() / c.z() + resolution / 2.0 - 0.5;
  const double row = focal * c.y() / c.z() + resolution / 2.0 - 0.5;
  const double lo = -0.5;
  const double hi = resolution - 0.5;
  if (col < lo || col > hi || row < lo || row > hi) return false;
  out = {row, col};
  return true;
}

Image project_to_view(const Image& pano, const ViewSpec& view) {
  require_equirect(pano);
  view.validate();
  const Mat3 rot = view.rotation();
  const double f = view.focal_px();
  const int res = view.resolution;
  Image out(res, res, pano.channels);
  for (int i = 0; i < res; ++i) {
    for (int j = 0; j < res; ++j) {
      const PixelCoord p = ray_to_pixel(view_pixel_ray(rot, f, res, i, j), pano.dims());
      for (int ch = 0; ch < pano.channels; ++ch) out.at(i, j, ch) = sample_bilinear(pano, p, ch);
    }
  }
  return out;
}

ProbabilityMap stitch_max(std::span<const ViewProbability> views, Dims dims) {
  if (views.empty()) throw std::invalid_argument("stitch_max: no views");
  require_equirect(dims);
  struct Prepared {
    Mat3 rot;
    double focal;
    int res;
    const Raster<float>* raster;
  };
  std::vector<Prepared> prepared;
  for (const auto& [spec, raster] : views) {
    spec.validate();
    if (raster.rows() != spec.resolution || raster.cols() != spec.resolution) {
      throw std::invalid_argument("stitch_max: raster size does not match view resolution");
    }
    prepared.push_back({spec.rotation(), spec.focal_px(), spec.resolution, &raster});
  }
  ProbabilityMap out(dims, 0.0f);
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const Vec3 ray = pixel_to_ray(PixelIndex{r, c}, dims).vec();
      float best = 0.0f;
      for (const Prepared& v : prepared) {
        PixelCoord p;
        if (world_ray_to_view(v.rot, v.focal, v.res, ray, p)) best = std::max(best, sample_clamped(*v.raster, p));
      }
      out.at(r, c) = best;
    }
  }
  return out;
}

NormalMap stitch_avg_normals(std::span<const ViewNormals> views, Dims dims) {
  if (views.empty()) throw std::invalid_argument("stitch_avg_normals: no views");
  require_equirect(dims);
  std::vector<Mat3> rots;
  for (const auto& [spec, raster] : views) {
    spec.validate();
    if (raster.rows() != spec.resolution || raster.cols() != spec.resolution) {
      throw std::invalid_argument("stitch_avg_normals: raster size does not match view resolution");
    }
    rots.push_back(spec.rotation());
  }
  NormalMap out(dims, Eigen::Vector3f::Zero());
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const Vec3 ray = pixel_to_ray(PixelIndex{r, c}, dims).vec();
      Vec3 sum = Vec3::Zero();
      int count = 0;
      for (std::size_t k = 0; k < views.size(); ++k) {
        const auto& [spec, raster] = views[k];
        PixelCoord p;
        if (!world_ray_to_view(rots[k], spec.focal_px(), spec.resolution, ray, p)) continue;
        const int y = std::clamp(static_cast<int>(std::floor(p.row + 0.5)), 0, spec.resolution - 1);
        const int x = std::clamp(static_cast<int>(std::floor(p.col + 0.5)), 0, spec.resolution - 1);
        const Eigen::Vector3f& n = raster.at(y, x);
        if (n.squaredNorm() < 1e-12f) continue;
        sum += rots[k] * n.cast<double>().normalized();
        ++count;
      }
      if (count > 0 && sum.norm() > 1e-9) out.at(r, c) = sum.normalized().cast<float>();
    }
  }
  return out;
}

Image rotate_panorama(const Image& img, const RotationMatrix& R, Interpolation mode) {
  require_equirect(img);
  const Mat3 rt = R.matrix().transpose();
  Image out(img.rows, img.cols, img.channels);
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      const Vec3 src = rt * pixel_to_ray(PixelIndex{r, c}, img.dims()).vec();
      if (mode == Interpolation::Nearest) {
        const PixelIndex s = ray_to_index(src, img.dims());
        for (int ch = 0; ch < img.channels; ++ch) out.at(r, c, ch) = img.at(s.row, s.col, ch);
      } else {
        const PixelCoord p = ray_to_pixel(src, img.dims());
        for (int ch = 0; ch < img.channels; ++ch) out.at(r, c, ch) = sample_bilinear(img, p, ch);
      }
    }
  }
  return out;
}

}  // namespace panolayout
