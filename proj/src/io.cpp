#include "panolayout/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <cstdio>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "panolayout/structural.hpp"

namespace panolayout {

namespace {

cv::Mat load(const fs::path& path, int flags) {
  if (!fs::exists(path)) throw IoError("cannot read " + path.string() + ": no such file");
  cv::Mat m = cv::imread(path.string(), flags);
  if (m.empty()) throw IoError("cannot decode image " + path.string());
  return m;
}

void save(const fs::path& path, const cv::Mat& m) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), m);
  } catch (const cv::Exception& e) {
    throw IoError("cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write " + path.string());
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L)); }

}  // namespace

Image read_image(const fs::path& path) {
  cv::Mat m = load(path, cv::IMREAD_UNCHANGED);
  if (m.channels() == 4) cv::cvtColor(m, m, cv::COLOR_BGRA2BGR);
  const double scale = m.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  cv::Mat f;
  m.convertTo(f, CV_32F, scale);
  Image img(f.rows, f.cols, f.channels());
  for (int r = 0; r < f.rows; ++r) {
    const float* row = f.ptr<float>(r);
    for (int c = 0; c < f.cols; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) {
        // OpenCV stores BGR.
        const int src = img.channels == 3 ? 2 - ch : ch;
        img.at(r, c, ch) = row[c * img.channels + src];
      }
    }
  }
  return img;
}

void write_image(const fs::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("write_image: 1 or 3 channels required");
  cv::Mat m(img.rows, img.cols, img.channels == 1 ? CV_8UC1 : CV_8UC3);
  for (int r = 0; r < img.rows; ++r) {
    auto* row = m.ptr<std::uint8_t>(r);
    for (int c = 0; c < img.cols; ++c) {
      for (int ch = 0; ch < img.channels; ++ch) {
        const int dst = img.channels == 3 ? 2 - ch : ch;
        row[c * img.channels + dst] = to_byte(img.at(r, c, ch));
      }
    }
  }
  save(path, m);
}

ProbabilityMap read_probability_png(const fs::path& path) {
  cv::Mat m = load(path, cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
  const double scale = m.depth() == CV_16U ? 1.0 / 65535.0 : 1.0 / 255.0;
  ProbabilityMap out(Dims{m.rows, m.cols});
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const double v = m.depth() == CV_16U ? m.at<std::uint16_t>(r, c) : m.at<std::uint8_t>(r, c);
      out.at(r, c) = static_cast<float>(v * scale);
    }
  }
  return out;
}

void write_probability_png(const fs::path& path, const ProbabilityMap& p) {
  cv::Mat m(p.rows(), p.cols(), CV_8UC1);
  for (int r = 0; r < p.rows(); ++r) {
    for (int c = 0; c < p.cols(); ++c) m.at<std::uint8_t>(r, c) = to_byte(p.at(r, c));
  }
  save(path, m);
}

std::array<std::uint8_t, 3> encode_normal(const Eigen::Vector3f& n) {
  if (n.squaredNorm() < 1e-12f) return {0, 0, 0};
  std::array<std::uint8_t, 3> out{};
  for (int k = 0; k < 3; ++k) out[k] = to_byte((static_cast<double>(n[k]) + 1.0) / 2.0);
  // A unit normal never encodes to black, but guard the nil code anyway.
  if (out == std::array<std::uint8_t, 3>{0, 0, 0}) out[2] = 1;
  return out;
}

Eigen::Vector3f decode_normal(std::array<std::uint8_t, 3> rgb) {
  if (rgb == std::array<std::uint8_t, 3>{0, 0, 0}) return Eigen::Vector3f::Zero();
  Eigen::Vector3f n;
  for (int k = 0; k < 3; ++k) n[k] = rgb[k] / 255.0f * 2.0f - 1.0f;
  return n;  // not renormalized; consumers compare directions
}

NormalMap read_normal_png(const fs::path& path) {
  cv::Mat m = load(path, cv::IMREAD_COLOR);
  NormalMap out(Dims{m.rows, m.cols}, Eigen::Vector3f::Zero());
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const cv::Vec3b bgr = m.at<cv::Vec3b>(r, c);
      out.at(r, c) = decode_normal({bgr[2], bgr[1], bgr[0]});
    }
  }
  return out;
}

void write_normal_png(const fs::path& path, const NormalMap& nm) {
  cv::Mat m(nm.rows(), nm.cols(), CV_8UC3);
  for (int r = 0; r < nm.rows(); ++r) {
    for (int c = 0; c < nm.cols(); ++c) {
      const auto rgb = encode_normal(nm.at(r, c));
      m.at<cv::Vec3b>(r, c) = cv::Vec3b(rgb[2], rgb[1], rgb[0]);
    }
  }
  save(path, m);
}

LabeledImage read_label_png(const fs::path& path) {
  cv::Mat m = load(path, cv::IMREAD_COLOR);
  LabeledImage out(Dims{m.rows, m.cols}, Label::None);
  for (int r = 0; r < m.rows; ++r) {
    for (int c = 0; c < m.cols; ++c) {
      const cv::Vec3b bgr = m.at<cv::Vec3b>(r, c);
      const std::array<int, 3> rgb{bgr[2], bgr[1], bgr[0]};
      const int k = static_cast<int>(std::max_element(rgb.begin(), rgb.end()) - rgb.begin());
      if (rgb[k] >= 128) out.at(r, c) = label_of(static_cast<Axis>(k));
    }
  }
  return out;
}

void write_label_png(const fs::path& path, const LabeledImage& l) {
  cv::Mat m(l.rows(), l.cols(), CV_8UC3, cv::Scalar(0, 0, 0));
  for (int r = 0; r < l.rows(); ++r) {
    for (int c = 0; c < l.cols(); ++c) {
      const Label lab = l.at(r, c);
      if (lab == Label::None) continue;
      cv::Vec3b bgr(0, 0, 0);
      bgr[2 - (static_cast<int>(lab) - 1)] = 255;
      m.at<cv::Vec3b>(r, c) = bgr;
    }
  }
  save(path, m);
}

Image draw_overlay(const Image& pano, std::span<const GreatCircleSegment> segments, std::span<const Vec3> corners) {
  Image out(pano.rows, pano.cols, 3);
  for (int r = 0; r < pano.rows; ++r) {
    for (int c = 0; c < pano.cols; ++c) {
      float g = 0.0f;
      for (int ch = 0; ch < pano.channels; ++ch) g += pano.at(r, c, ch);
      g /= static_cast<float>(std::max(pano.channels, 1));
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = 0.5f * g;
    }
  }
  const Dims dims = pano.dims();
  for (const auto& s : segments) {
    const int k = s.axis == Axis::Unclassified ? -1 : static_cast<int>(s.axis);
    for (const PixelIndex& p : rasterize_arc(s, dims)) {
      for (int ch = 0; ch < 3; ++ch) out.at(p.row, p.col, ch) = (k < 0 || k == ch) ? 1.0f : 0.0f;
    }
  }
  for (const Vec3& v : corners) {
    const PixelIndex p = ray_to_index(v, dims);
    for (int d = -3; d <= 3; ++d) {
      const int rr = std::clamp(p.row + d, 0, dims.rows - 1);
      const int cc = wrap_col(p.col + d, dims.cols);
      for (const auto& [r, c] : {std::pair{rr, p.col}, std::pair{p.row, cc}}) {
        out.at(r, c, 0) = 1.0f;
        out.at(r, c, 1) = 1.0f;
        out.at(r, c, 2) = 0.0f;
      }
    }
  }
  return out;
}

// --- JSON ------------------------------------------------------------------

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Vec3 vec_from(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void check_version(const Json& j) {
  if (!j.contains("format_version")) throw IoError("missing format_version");
  if (j.at("format_version").get<int>() != kFormatVersion) {
    throw IoError("unsupported format_version " + j.at("format_version").dump());
  }
}

}  // namespace

Json to_json(const VanishingBasis& b) {
  Json rows = Json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(Json::array({b.R.matrix()(r, 0), b.R.matrix()(r, 1), b.R.matrix()(r, 2)}));
  return {{"R", rows}, {"inliers", b.inliers}};
}

VanishingBasis basis_from_json(const Json& j) {
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = j.at("R").at(r).at(c).get<double>();
  }
  VanishingBasis b;
  b.R = RotationMatrix::nearest(m);
  if (j.contains("inliers")) b.inliers = j.at("inliers").get<std::array<int, 3>>();
  return b;
}

Json to_json(const GreatCircleSegment& s) {
  return {{"normal", vec_json(s.normal)}, {"d1", vec_json(s.d1)},           {"d2", vec_json(s.d2)},
          {"axis", to_string(s.axis)},    {"inliers", s.inlier_count},     {"pixel_length", s.pixel_length}};
}

GreatCircleSegment segment_from_json(const Json& j) {
  GreatCircleSegment s;
  s.normal = UnitVec3(vec_from(j.at("normal")));
  s.d1 = UnitVec3(vec_from(j.at("d1")));
  s.d2 = UnitVec3(vec_from(j.at("d2")));
  s.axis = axis_from_string(j.value("axis", std::string("unclassified")));
  s.inlier_count = j.value("inliers", 0);
  s.pixel_length = j.value("pixel_length", 0);
  return s;
}

Json to_json(const CornerCandidate& c) {
  return {{"dir", vec_json(c.dir)},
          {"hemisphere", to_string(c.hemisphere)},
          {"quadrant", to_string(c.quadrant)},
          {"parents", Json::array({c.parents.first, c.parents.second})},
          {"weight", c.weight}};
}

CornerCandidate corner_from_json(const Json& j) {
  CornerCandidate c;
  c.dir = UnitVec3(vec_from(j.at("dir")));
  auto cls = classify_corner(c.dir);
  if (!cls) throw IoError("corner direction is not classifiable");
  c.hemisphere = cls->hemisphere;
  c.quadrant = cls->quadrant;
  if (j.contains("parents")) c.parents = {j.at("parents").at(0).get<int>(), j.at("parents").at(1).get<int>()};
  c.weight = j.value("weight", 0.0);
  return c;
}

Json to_json(const LayoutModel& l) {
  Json poly = Json::array();
  for (const Vec2& p : l.polygon) poly.push_back(Json::array({p.x(), p.y()}));
  Json inserted = Json::array();
  for (int i = 0; i < l.wall_count(); ++i) inserted.push_back(l.inserted(i));
  return {{"polygon", poly},
          {"h", l.floor_height},
          {"provenance", {{"vertex_sources", l.vertex_sources}, {"inserted", inserted}, {"group_size", l.group_size}}}};
}

LayoutModel layout_from_json(const Json& j) {
  LayoutModel l;
  for (const auto& p : j.at("polygon")) l.polygon.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  l.floor_height = j.at("h").get<double>();
  if (j.contains("provenance")) {
    const Json& pv = j.at("provenance");
    l.vertex_sources = pv.value("vertex_sources", std::vector<int>{});
    l.group_size = pv.value("group_size", 0);
  }
  return l;
}

Json lines_document(const VanishingBasis& basis, std::span<const GreatCircleSegment> lines) {
  Json arr = Json::array();
  for (const auto& l : lines) arr.push_back(to_json(l));
  return {{"format_version", kFormatVersion}, {"kind", "lines"}, {"basis", to_json(basis)}, {"lines", arr}};
}

Json corners_document(const VanishingBasis& basis, std::span<const CornerCandidate> corners) {
  Json arr = Json::array();
  for (const auto& c : corners) arr.push_back(to_json(c));
  return {{"format_version", kFormatVersion}, {"kind", "corners"}, {"basis", to_json(basis)}, {"corners", arr}};
}

Json hypotheses_document(const VanishingBasis& basis, std::span<const LayoutModel> layouts) {
  Json arr = Json::array();
  for (const auto& l : layouts) arr.push_back(to_json(l));
  return {{"format_version", kFormatVersion}, {"kind", "hypotheses"}, {"basis", to_json(basis)}, {"hypotheses", arr}};
}

Json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
  check_version(j);
  return j;
}

void write_json(const fs::path& path, const Json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  // nlohmann::json objects are key-sorted maps, so the dump is canonical.
  out << j.dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

// --- meshes ----------------------------------------------------------------

Mesh layout_mesh(const LayoutModel& layout) {
  if (auto v = validate_layout(layout); !v) throw std::invalid_argument("layout_mesh: invalid layout: " + v.reason);
  const int n = layout.wall_count();
  Mesh m;
  for (int i = 0; i < n; ++i) m.vertices.push_back(layout.ceiling_vertex(i));
  for (int i = 0; i < n; ++i) m.vertices.push_back(layout.floor_vertex(i));
  // The polygon is clockwise from above, so walls (c_i, c_i+1, f_i+1, f_i) face outwards.
  for (int i = 0; i < n; ++i) {
    const int j = (i + 1) % n;
    m.faces.push_back({i, j, n + j, n + i});
  }
  std::vector<int> ceiling;
  std::vector<int> floor;
  for (int i = 0; i < n; ++i) {
    ceiling.push_back(n - 1 - i);
    floor.push_back(n + i);
  }
  m.faces.push_back(ceiling);
  m.faces.push_back(floor);
  return m;
}

void write_obj(const fs::path& path, const Mesh& mesh) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& f : mesh.faces) {
    out << 'f';
    for (int i : f) out << ' ' << i + 1;
    out << '\n';
  }
  if (!out) throw IoError("cannot write " + path.string());
}

Mesh read_obj(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Mesh m;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double x, y, z;
      ss >> x >> y >> z;
      m.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> f;
      std::string tok;
      while (ss >> tok) f.push_back(std::stoi(tok.substr(0, tok.find('/'))) - 1);
      m.faces.push_back(f);
    }
  }
  return m;
}

void export_model(const LayoutModel& layout, const fs::path& stem) {
  const Mesh mesh = layout_mesh(layout);
  fs::path json_path = stem;
  json_path += ".json";
  fs::path obj_path = stem;
  obj_path += ".obj";
  write_json(json_path, {{"format_version", kFormatVersion}, {"kind", "layout"}, {"layout", to_json(layout)}});
  write_obj(obj_path, mesh);
}

// --- perspective views -----------------------------------------------------

Json to_json(const ViewManifest& m) {
  Json views = Json::array();
  for (const auto& v : m.views) {
    views.push_back({{"id", v.id},
                     {"center", vec_json(v.spec.center)},
                     {"fov_deg", v.spec.fov_deg},
                     {"resolution", v.spec.resolution},
                     {"roll_deg", v.spec.roll_deg},
                     {"image", v.image}});
  }
  return {{"format_version", kFormatVersion}, {"kind", "views"}, {"output_dir", m.output_dir}, {"views", views}};
}

ViewManifest manifest_from_json(const Json& j) {
  check_version(j);
  ViewManifest m;
  m.output_dir = j.value("output_dir", std::string("maps"));
  std::set<std::string> ids;
  for (const auto& v : j.at("views")) {
    ViewEntry e;
    e.id = v.at("id").get<std::string>();
    if (!ids.insert(e.id).second) throw IoError("duplicate view id " + e.id);
    e.spec.center = UnitVec3(vec_from(v.at("center")));
    e.spec.fov_deg = v.at("fov_deg").get<double>();
    e.spec.resolution = v.at("resolution").get<int>();
    e.spec.roll_deg = v.value("roll_deg", 0.0);
    e.spec.validate();
    e.image = v.value("image", e.id + ".png");
    m.views.push_back(e);
  }
  return m;
}

ViewManifest export_views(const Image& panorama, std::span<const ViewSpec> views, const fs::path& dir) {
  require_equirect(panorama);
  ViewManifest m;
  for (std::size_t i = 0; i < views.size(); ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "view_%03zu", i);
    ViewEntry e{id, views[i], std::string(id) + ".png"};
    write_image(dir / e.image, project_to_view(panorama, views[i]));
    m.views.push_back(e);
  }
  write_json(dir / "manifest.json", to_json(m));
  return m;
}

ProbabilityMap stitch_edge_maps(const fs::path& manifest_path, Dims dims) {
  const ViewManifest m = manifest_from_json(read_json(manifest_path));
  const fs::path base = manifest_path.parent_path() / m.output_dir;
  std::vector<ViewProbability> views;
  for (const auto& v : m.views) {
    ProbabilityMap p = read_probability_png(base / (v.id + "_edges.png"));
    if (p.rows() != v.spec.resolution || p.cols() != v.spec.resolution) {
      throw IoError("edge map for " + v.id + " does not match the view resolution");
    }
    views.emplace_back(v.spec, std::move(p));
  }
  return stitch_max(views, dims);
}

NormalMap stitch_normal_maps(const fs::path& manifest_path, Dims dims) {
  const ViewManifest m = manifest_from_json(read_json(manifest_path));
  const fs::path base = manifest_path.parent_path() / m.output_dir;
  std::vector<ViewNormals> views;
  for (const auto& v : m.views) {
    NormalMap n = read_normal_png(base / (v.id + "_normals.png"));
    if (n.rows() != v.spec.resolution || n.cols() != v.spec.resolution) {
      throw IoError("normal map for " + v.id + " does not match the view resolution");
    }
    views.emplace_back(v.spec, std::move(n));
  }
  return stitch_avg_normals(views, dims);
}

}  // namespace panolayout
