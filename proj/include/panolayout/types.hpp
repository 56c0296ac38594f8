#pragma once

#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace panolayout {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Raised when a robust estimator cannot find a model (e.g. too few Manhattan directions).
class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when hypothesis generation exhausts its budget without a valid layout.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pipeline failure carrying the name of the stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

/// Direction on the unit sphere. Construction normalizes; the zero vector is rejected.
class UnitVec3 {
 public:
  UnitVec3() : v_(0.0, 0.0, 1.0) {}
  explicit UnitVec3(const Vec3& v);
  UnitVec3(double x, double y, double z) : UnitVec3(Vec3(x, y, z)) {}

  const Vec3& vec() const noexcept { return v_; }
  operator const Vec3&() const noexcept { return v_; }  // NOLINT(google-explicit-constructor)

  double x() const noexcept { return v_.x(); }
  double y() const noexcept { return v_.y(); }
  double z() const noexcept { return v_.z(); }
  double dot(const Vec3& o) const noexcept { return v_.dot(o); }

  UnitVec3 operator-() const noexcept {
    UnitVec3 out;
    out.v_ = -v_;
    return out;
  }

 private:
  Vec3 v_;
};

/// Angle between two directions in radians, numerically stable near 0 and pi.
double angle_between(const Vec3& a, const Vec3& b);

/// Proper rotation (orthonormal, det = +1).
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  /// Validates within 1e-9; throws std::invalid_argument otherwise.
  explicit RotationMatrix(const Mat3& m);

  /// Closest rotation in the Frobenius sense (SVD projection).
  static RotationMatrix nearest(const Mat3& m);
  static RotationMatrix about_z(double radians);
  static RotationMatrix from_axis_angle(const Vec3& axis, double radians);

  const Mat3& matrix() const noexcept { return m_; }
  Vec3 column(int k) const { return m_.col(k); }
  RotationMatrix transposed() const;
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotationMatrix operator*(const RotationMatrix& o) const;

 private:
  Mat3 m_;
};

/// Image dimensions: rows = M (height), cols = N (width).
struct Dims {
  int rows = 0;
  int cols = 0;
  friend bool operator==(const Dims&, const Dims&) = default;
  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

/// Continuous pixel coordinate; integer values address pixel centers.
struct PixelCoord {
  double row = 0.0;
  double col = 0.0;
};

struct PixelIndex {
  int row = 0;
  int col = 0;
  friend bool operator==(const PixelIndex&, const PixelIndex&) = default;
};

/// Dense row-major single-valued raster.
template <class T>
class Raster {
 public:
  Raster() = default;
  Raster(Dims dims, T fill = T{}) : dims_(dims), data_(dims.size(), fill) {}

  Dims dims() const noexcept { return dims_; }
  int rows() const noexcept { return dims_.rows; }
  int cols() const noexcept { return dims_.cols; }
  bool empty() const noexcept { return data_.empty(); }

  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * dims_.cols + c]; }
  const T& at(int r, int c) const { return data_[static_cast<std::size_t>(r) * dims_.cols + c]; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() noexcept { return data_; }
  const std::vector<T>& data() const noexcept { return data_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  Dims dims_{};
  std::vector<T> data_;
};

/// Multi-channel float image with samples nominally in [0, 1].
struct Image {
  int rows = 0;
  int cols = 0;
  int channels = 1;
  std::vector<float> samples;

  Image() = default;
  Image(int rows_, int cols_, int channels_, float fill = 0.0f)
      : rows(rows_), cols(cols_), channels(channels_),
        samples(static_cast<std::size_t>(rows_) * cols_ * channels_, fill) {}

  Dims dims() const { return {rows, cols}; }
  float& at(int r, int c, int ch = 0) { return samples[(static_cast<std::size_t>(r) * cols + c) * channels + ch]; }
  float at(int r, int c, int ch = 0) const {
    return samples[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
  }
};

/// Throws std::invalid_argument unless the image is a 2:1 equirectangular panorama.
void require_equirect(const Image& img);
void require_equirect(Dims dims);

/// Manhattan axis of a line, wall or pixel.
enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2, Unclassified = 3 };

/// Per-pixel orientation label; None never matches anything.
enum class Label : std::uint8_t { None = 0, X = 1, Y = 2, Z = 3 };

inline Label label_of(Axis a) {
  switch (a) {
    case Axis::X: return Label::X;
    case Axis::Y: return Label::Y;
    case Axis::Z: return Label::Z;
    default: return Label::None;
  }
}

const char* to_string(Axis a);
Axis axis_from_string(const std::string& s);

using ProbabilityMap = Raster<float>;
/// Unit normals per pixel; the zero vector encodes "no estimate".
using NormalMap = Raster<Eigen::Vector3f>;
using LabeledImage = Raster<Label>;
using BinaryRaster = Raster<std::uint8_t>;

}  // namespace panolayout
