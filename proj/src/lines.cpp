#include "panolayout/lines.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>

#include <Eigen/Eigenvalues>
#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "panolayout/geometry.hpp"

namespace panolayout {

int LineConfig::group_size_for(int width) const {
  const double scaled = static_cast<double>(min_group_size) * width / reference_width;
  return std::max(3, static_cast<int>(std::lround(scaled)));
}

double GreatCircleSegment::arc_position(const Vec3& v) const {
  const Vec3& n = normal.vec();
  const Vec3 p = v - v.dot(n) * n;
  double a = std::atan2(d1.vec().cross(p).dot(n), d1.vec().dot(p));
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

double GreatCircleSegment::span() const { return arc_position(d2.vec()); }

GreatCircleSegment GreatCircleSegment::transformed(const Mat3& m) const {
  GreatCircleSegment out = *this;
  out.normal = UnitVec3(m * normal.vec());
  out.d1 = UnitVec3(m * d1.vec());
  out.d2 = UnitVec3(m * d2.vec());
  return out;
}

GreatCircleSegment segment_from_points(const Vec3& a, const Vec3& b, Axis axis) {
  GreatCircleSegment s;
  s.normal = UnitVec3(a.cross(b));
  s.d1 = UnitVec3(a);
  s.d2 = UnitVec3(b);
  s.axis = axis;
  return s;
}

// ---------------------------------------------------------------------------
// Edges and groups

BinaryRaster detect_edges(const Image& img, const LineConfig& cfg) {
  require_equirect(img);
  const int rows = img.rows;
  const int cols = img.cols;
  cv::Mat gray(rows, cols, CV_32F);
  for (int r = 0; r < rows; ++r) {
    auto* row = gray.ptr<float>(r);
    for (int c = 0; c < cols; ++c) {
      float acc = 0.0f;
      for (int ch = 0; ch < img.channels; ++ch) acc += img.at(r, c, ch);
      row[c] = acc / static_cast<float>(img.channels);
    }
  }

  const int pad = static_cast<int>(std::ceil(4.0 * cfg.canny_sigma)) + 3;
  cv::Mat wrapped;
  cv::Mat padded;
  cv::copyMakeBorder(gray, wrapped, 0, 0, pad, pad, cv::BORDER_WRAP);
  cv::copyMakeBorder(wrapped, padded, pad, pad, 0, 0, cv::BORDER_REFLECT_101);
  cv::Mat blurred;
  cv::GaussianBlur(padded, blurred, cv::Size(0, 0), cfg.canny_sigma, cfg.canny_sigma, cv::BORDER_REFLECT_101);
  cv::Mat dx;
  cv::Mat dy;
  cv::Sobel(blurred, dx, CV_32F, 1, 0, 3);
  cv::Sobel(blurred, dy, CV_32F, 0, 1, 3);

  cv::Mat mag;
  cv::magnitude(dx, dy, mag);
  double max_mag = 0.0;
  cv::minMaxLoc(mag(cv::Rect(pad, pad, cols, rows)), nullptr, &max_mag);

  BinaryRaster out({rows, cols}, 0);
  if (max_mag < 1e-6) return out;

  // Canny's dx/dy entry point takes 16-bit gradients; scale so the maximum fits.
  const double scale = 16000.0 / max_mag;
  cv::Mat dx16;
  cv::Mat dy16;
  dx.convertTo(dx16, CV_16S, scale);
  dy.convertTo(dy16, CV_16S, scale);
  cv::Mat edges;
  cv::Canny(dx16, dy16, edges, cfg.canny_low * 16000.0, cfg.canny_high * 16000.0, true);

  for (int r = 0; r < rows; ++r) {
    const auto* e = edges.ptr<std::uint8_t>(r + pad);
    for (int c = 0; c < cols; ++c) out.at(r, c) = e[c + pad] ? 1 : 0;
  }
  return out;
}

namespace {

// 8-connected components over `members` (keys r*cols+c), wrapping at the seam.
template <class Visit>
void connected_components(const std::vector<PixelIndex>& members, Dims dims, Visit&& visit) {
  std::unordered_map<long long, int> index;
  index.reserve(members.size() * 2);
  for (int i = 0; i < static_cast<int>(members.size()); ++i) {
    index.emplace(static_cast<long long>(members[i].row) * dims.cols + members[i].col, i);
  }
  std::vector<char> seen(members.size(), 0);
  std::vector<int> component;
  std::deque<int> queue;
  for (int start = 0; start < static_cast<int>(members.size()); ++start) {
    if (seen[start]) continue;
    component.clear();
    queue.push_back(start);
    seen[start] = 1;
    while (!queue.empty()) {
      const int cur = queue.front();
      queue.pop_front();
      component.push_back(cur);
      const PixelIndex p = members[cur];
      for (int dr = -1; dr <= 1; ++dr) {
        const int r = p.row + dr;
        if (r < 0 || r >= dims.rows) continue;
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          const int c = wrap_col(p.col + dc, dims.cols);
          auto it = index.find(static_cast<long long>(r) * dims.cols + c);
          if (it != index.end() && !seen[it->second]) {
            seen[it->second] = 1;
            queue.push_back(it->second);
          }
        }
      }
    }
    visit(component);
  }
}

EdgeGroup make_group(const std::vector<PixelIndex>& pixels, Dims dims) {
  EdgeGroup g;
  g.pixels = pixels;
  g.rays.reserve(pixels.size());
  for (const PixelIndex& p : pixels) g.rays.push_back(pixel_to_ray(p, dims));
  return g;
}

int count_inliers(const Vec3& n, const std::vector<UnitVec3>& rays, const std::vector<int>& subset,
                  double sin_th) {
  int count = 0;
  for (int i : subset) count += std::abs(n.dot(rays[i].vec())) <= sin_th ? 1 : 0;
  return count;
}

Vec3 smallest_eigenvector(const Mat3& scatter) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(scatter);
  return es.eigenvectors().col(0);
}

Vec3 refit_normal(const std::vector<UnitVec3>& rays, const std::vector<int>& members) {
  Mat3 scatter = Mat3::Zero();
  for (int i : members) scatter += rays[i].vec() * rays[i].vec().transpose();
  return smallest_eigenvector(scatter);
}

struct Consensus {
  Vec3 normal = Vec3::UnitZ();
  int inliers = 0;
};

// RANSAC over ray pairs restricted to `subset`; adaptive iteration count with a hard cap.
Consensus ransac_circle(const std::vector<UnitVec3>& rays, const std::vector<int>& subset,
                        const LineConfig& cfg, Rng& rng) {
  Consensus best;
  const int n = static_cast<int>(subset.size());
  if (n < 2) return best;
  const double sin_th = std::sin(deg2rad(cfg.theta_th_deg));
  const double min_pair = deg2rad(cfg.min_pair_angle_deg);
  std::uniform_int_distribution<int> pick(0, n - 1);
  double needed = cfg.ransac_max_iterations;
  const double log_fail = std::log(1.0 - cfg.ransac_confidence);
  for (int it = 0; it < cfg.ransac_max_iterations && it < needed; ++it) {
    const int a = pick(rng);
    int b = pick(rng);
    if (a == b) continue;
    const Vec3& ra = rays[subset[a]].vec();
    const Vec3& rb = rays[subset[b]].vec();
    const Vec3 cross = ra.cross(rb);
    if (cross.norm() < 1e-6 || angle_between(ra, rb) < min_pair) continue;
    const Vec3 normal = cross.normalized();
    const int inl = count_inliers(normal, rays, subset, sin_th);
    if (inl > best.inliers) {
      best = {normal, inl};
      const double w = static_cast<double>(inl) / n;
      const double miss = 1.0 - w * w;
      needed = miss <= 1e-12 ? 0.0 : std::max(10.0, log_fail / std::log(miss));
    }
  }
  return best;
}

// Least-squares polish: refit on inliers and recount, a few rounds.
Consensus polish(const std::vector<UnitVec3>& rays, const std::vector<int>& subset, Consensus model,
                 double sin_th) {
  for (int round = 0; round < 3; ++round) {
    std::vector<int> inl;
    for (int i : subset) {
      if (std::abs(model.normal.dot(rays[i].vec())) <= sin_th) inl.push_back(i);
    }
    if (inl.size() < 2) break;
    const Vec3 n = refit_normal(rays, inl);
    const int count = count_inliers(n, rays, subset, sin_th);
    model = {n, count};
  }
  return model;
}

}  // namespace

std::vector<EdgeGroup> cluster_edge_groups(const BinaryRaster& edges, const LineConfig& cfg) {
  const Dims dims = edges.dims();
  std::vector<PixelIndex> on;
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      if (edges.at(r, c)) on.push_back({r, c});
    }
  }
  const auto min_size = static_cast<std::size_t>(cfg.group_size_for(dims.cols));
  std::vector<EdgeGroup> groups;
  connected_components(on, dims, [&](const std::vector<int>& comp) {
    if (comp.size() < min_size) return;
    std::vector<PixelIndex> pixels;
    pixels.reserve(comp.size());
    for (int i : comp) pixels.push_back(on[i]);
    groups.push_back(make_group(pixels, dims));
  });
  return groups;
}

std::vector<EdgeGroup> split_edge_group(const EdgeGroup& group, Dims dims, const LineConfig& cfg, Rng& rng) {
  const auto min_size = static_cast<std::size_t>(cfg.group_size_for(dims.cols));
  const double sin_th = std::sin(deg2rad(cfg.theta_th_deg));
  std::vector<int> remaining(group.rays.size());
  std::iota(remaining.begin(), remaining.end(), 0);

  std::vector<EdgeGroup> pieces;
  int failures = 0;
  while (remaining.size() >= min_size && static_cast<int>(pieces.size()) < cfg.max_lines_per_group &&
         failures < 4) {
    Consensus model = ransac_circle(group.rays, remaining, cfg, rng);
    if (static_cast<std::size_t>(model.inliers) < min_size) break;
    model = polish(group.rays, remaining, model, sin_th);

    std::vector<int> inliers;
    std::vector<int> outliers;
    for (int i : remaining) {
      (std::abs(model.normal.dot(group.rays[i].vec())) <= sin_th ? inliers : outliers).push_back(i);
    }
    if (inliers.size() < min_size) break;

    std::vector<PixelIndex> inlier_pixels;
    inlier_pixels.reserve(inliers.size());
    for (int i : inliers) inlier_pixels.push_back(group.pixels[i]);
    bool produced = false;
    connected_components(inlier_pixels, dims, [&](const std::vector<int>& comp) {
      if (comp.size() < min_size) return;
      EdgeGroup piece;
      for (int k : comp) {
        piece.pixels.push_back(group.pixels[inliers[k]]);
        piece.rays.push_back(group.rays[inliers[k]]);
      }
      pieces.push_back(std::move(piece));
      produced = true;
    });
    failures = produced ? 0 : failures + 1;
    remaining = std::move(outliers);
  }
  return pieces;
}

std::optional<GreatCircleSegment> fit_great_circle(const EdgeGroup& group, const LineConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(group.rays.size());
  if (n < 2) return std::nullopt;
  const double sin_th = std::sin(deg2rad(cfg.theta_th_deg));
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  Consensus model = ransac_circle(group.rays, all, cfg, rng);
  if (model.inliers < 2) return std::nullopt;
  model = polish(group.rays, all, model, sin_th);
  if (model.inliers < 2 || model.inliers < cfg.min_inlier_ratio * n) return std::nullopt;

  // Endpoints: the arc is the complement of the widest angular gap between inliers.
  const Vec3 normal = model.normal;
  std::vector<int> inl;
  for (int i = 0; i < n; ++i) {
    if (std::abs(normal.dot(group.rays[i].vec())) <= sin_th) inl.push_back(i);
  }
  Vec3 e1 = group.rays[inl.front()].vec() - normal.dot(group.rays[inl.front()].vec()) * normal;
  e1.normalize();
  const Vec3 e2 = normal.cross(e1);
  std::vector<double> angles;
  angles.reserve(inl.size());
  for (int i : inl) {
    const Vec3& r = group.rays[i].vec();
    angles.push_back(std::atan2(r.dot(e2), r.dot(e1)));
  }
  std::sort(angles.begin(), angles.end());
  std::size_t gap_end = 0;
  double widest = angles.front() + 2.0 * kPi - angles.back();
  for (std::size_t k = 1; k < angles.size(); ++k) {
    if (angles[k] - angles[k - 1] > widest) {
      widest = angles[k] - angles[k - 1];
      gap_end = k;
    }
  }
  const double start = angles[gap_end];
  const double end = angles[(gap_end + angles.size() - 1) % angles.size()];

  GreatCircleSegment seg;
  seg.normal = UnitVec3(normal);
  seg.d1 = UnitVec3(std::cos(start) * e1 + std::sin(start) * e2);
  seg.d2 = UnitVec3(std::cos(end) * e1 + std::sin(end) * e2);
  seg.inlier_count = static_cast<int>(inl.size());
  seg.pixel_length = n;
  return seg;
}

// ---------------------------------------------------------------------------
// Vanishing directions

namespace {

int vp_inliers(const Vec3& vp, std::span<const GreatCircleSegment> lines, double sin_th) {
  int count = 0;
  for (const auto& l : lines) count += std::abs(l.normal.dot(vp)) <= sin_th ? 1 : 0;
  return count;
}

Vec3 refine_vp(Vec3 vp, std::span<const GreatCircleSegment> lines, double sin_th) {
  for (int round = 0; round < 3; ++round) {
    Mat3 scatter = Mat3::Zero();
    int count = 0;
    for (const auto& l : lines) {
      if (std::abs(l.normal.dot(vp)) <= sin_th) {
        scatter += l.normal.vec() * l.normal.vec().transpose();
        ++count;
      }
    }
    if (count < 2) break;
    Vec3 refined = smallest_eigenvector(scatter);
    if (refined.dot(vp) < 0) refined = -refined;
    vp = refined;
  }
  return vp;
}

}  // namespace

VanishingBasis estimate_vanishing_basis(std::span<const GreatCircleSegment> lines, const LineConfig& cfg,
                                        Rng& rng) {
  const int n = static_cast<int>(lines.size());
  if (n < 4) throw EstimationError("vanishing basis needs at least 4 lines, got " + std::to_string(n));
  const double sin_th = std::sin(deg2rad(cfg.theta_th_deg));

  struct Candidate {
    Vec3 dir;
    int inliers;
  };
  std::vector<Candidate> candidates;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int it = 0; it < cfg.vp_iterations; ++it) {
    const int a = pick(rng);
    const int b = pick(rng);
    if (a == b) continue;
    const Vec3 c = lines[a].normal.vec().cross(lines[b].normal.vec());
    if (c.norm() < 1e-3) continue;
    const Vec3 dir = c.normalized();
    const int inl = vp_inliers(dir, lines, sin_th);
    if (inl >= 2) candidates.push_back({dir, inl});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& l, const Candidate& r) { return l.inliers > r.inliers; });

  // Non-maximum suppression (directions are sign-free), then least-squares refinement.
  constexpr std::size_t kKeep = 32;
  const double suppress = std::cos(deg2rad(2.0));
  std::vector<Candidate> kept;
  for (const Candidate& c : candidates) {
    if (kept.size() >= kKeep) break;
    const bool dup = std::any_of(kept.begin(), kept.end(),
                                 [&](const Candidate& k) { return std::abs(k.dir.dot(c.dir)) > suppress; });
    if (!dup) kept.push_back(c);
  }
  for (Candidate& c : kept) {
    c.dir = refine_vp(c.dir, lines, sin_th);
    c.inliers = vp_inliers(c.dir, lines, sin_th);
  }

  const double ortho = std::sin(deg2rad(cfg.vp_orthogonality_deg));
  int best_score = -1;
  Mat3 best = Mat3::Identity();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      if (std::abs(kept[i].dir.dot(kept[j].dir)) > ortho) continue;
      const Vec3 third = kept[i].dir.cross(kept[j].dir).normalized();
      const int score = kept[i].inliers + kept[j].inliers + vp_inliers(third, lines, sin_th);
      if (score > best_score) {
        best_score = score;
        best.col(0) = kept[i].dir;
        best.col(1) = kept[j].dir;
        best.col(2) = third;
      }
    }
  }
  if (best_score < 0) throw EstimationError("fewer than two orthogonal vanishing directions found");

  // Polish each axis on its own inliers, then project back onto a rotation.
  for (int k = 0; k < 3; ++k) best.col(k) = refine_vp(best.col(k), lines, sin_th);
  if (best.determinant() < 0) best.col(2) = -best.col(2);
  Mat3 ortho_basis = RotationMatrix::nearest(best).matrix();

  // Gravity: the column with the largest |z| becomes vp_z (pointing up); of the other two the
  // one with the largest |x| becomes vp_x (pointing to +x); vp_y completes a right-handed frame.
  int zi = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::abs(ortho_basis(2, k)) > std::abs(ortho_basis(2, zi))) zi = k;
  }
  const int a = (zi + 1) % 3;
  const int b = (zi + 2) % 3;
  const int xi = std::abs(ortho_basis(0, a)) >= std::abs(ortho_basis(0, b)) ? a : b;
  Vec3 vz = ortho_basis.col(zi);
  if (vz.z() < 0) vz = -vz;
  Vec3 vx = ortho_basis.col(xi);
  if (vx.x() < 0) vx = -vx;
  Mat3 m;
  m.col(0) = vx;
  m.col(1) = vz.cross(vx);
  m.col(2) = vz;

  VanishingBasis basis;
  basis.R = RotationMatrix::nearest(m);
  for (int k = 0; k < 3; ++k) basis.inliers[k] = vp_inliers(basis.vp(k), lines, sin_th);
  return basis;
}

std::vector<GreatCircleSegment> classify_lines(std::span<const GreatCircleSegment> lines,
                                               const VanishingBasis& basis, const LineConfig& cfg) {
  const double th = deg2rad(cfg.theta_th_deg);
  std::vector<GreatCircleSegment> out;
  for (const auto& line : lines) {
    int best = -1;
    double best_res = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const double res = std::asin(std::min(1.0, std::abs(line.normal.dot(basis.vp(k)))));
      if (res <= th && res < best_res) {
        best_res = res;
        best = k;
      }
    }
    if (best < 0) continue;
    GreatCircleSegment s = line;
    s.axis = static_cast<Axis>(best);
    out.push_back(s);
  }
  return out;
}

std::vector<GreatCircleSegment> to_basis_frame(std::span<const GreatCircleSegment> lines,
                                               const VanishingBasis& basis) {
  const Mat3 rt = basis.R.matrix().transpose();
  std::vector<GreatCircleSegment> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(l.transformed(rt));
  return out;
}

LineDetection detect_lines(const Image& panorama, const LineConfig& cfg) {
  LineDetection det;
  const BinaryRaster edges = detect_edges(panorama, cfg);
  for (std::uint8_t e : edges.data()) det.edge_pixels += e ? 1 : 0;
  const std::vector<EdgeGroup> groups = cluster_edge_groups(edges, cfg);
  det.groups = static_cast<int>(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    Rng rng = make_rng(derive_seed(cfg.seed, kStreamLines), gi);
    for (const EdgeGroup& piece : split_edge_group(groups[gi], edges.dims(), cfg, rng)) {
      if (auto seg = fit_great_circle(piece, cfg, rng)) det.raw.push_back(*seg);
    }
  }
  Rng vp_rng = make_rng(cfg.seed, kStreamVanishing);
  det.basis = estimate_vanishing_basis(det.raw, cfg, vp_rng);
  det.classified = classify_lines(det.raw, det.basis, cfg);
  return det;
}

}  // namespace panolayout
