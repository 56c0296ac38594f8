#include "panolayout/hypotheses.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <tuple>

#include "panolayout/geometry.hpp"

namespace panolayout {

void HypothesisConfig::validate() const {
  if (n_h < 1) throw std::invalid_argument("HypothesisConfig: n_h must be >= 1");
  if (group_sizes.empty()) throw std::invalid_argument("HypothesisConfig: no group sizes");
  for (int g : group_sizes) {
    if (g < 3) throw std::invalid_argument("HypothesisConfig: group sizes must be >= 3");
  }
  if (!(manhattan_tol_deg > 0.0 && manhattan_tol_deg < 45.0)) {
    throw std::invalid_argument("HypothesisConfig: manhattan_tol_deg must be in (0, 45)");
  }
  if (azimuth_cluster_deg < 0.0) throw std::invalid_argument("HypothesisConfig: negative azimuth_cluster_deg");
  if (sample_retries < 1 || attempts_per_hypothesis < 1) {
    throw std::invalid_argument("HypothesisConfig: retry budgets must be >= 1");
  }
}

namespace {

double azimuth_of(const Vec3& d) { return std::atan2(d.y(), d.x()); }

double azimuth_gap(double a, double b) {
  const double d = std::abs(std::remainder(a - b, 2.0 * kPi));
  return d;
}

bool group_constraints_hold(std::span<const CornerCandidate> cands, std::span<const int> group, double cluster_rad) {
  std::array<bool, 4> quadrants{false, false, false, false};
  bool ceiling = false;
  bool floor = false;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const CornerCandidate& c = cands[group[i]];
    quadrants[static_cast<int>(c.quadrant)] = true;
    (c.hemisphere == Hemisphere::Ceiling ? ceiling : floor) = true;
    for (std::size_t j = 0; j < i; ++j) {
      if (azimuth_gap(azimuth_of(c.dir.vec()), azimuth_of(cands[group[j]].dir.vec())) <= cluster_rad) return false;
    }
  }
  return ceiling && floor && std::count(quadrants.begin(), quadrants.end(), true) >= 3;
}

}  // namespace

std::optional<std::vector<int>> sample_corner_group(std::span<const CornerCandidate> cands, int n,
                                                    const HypothesisConfig& cfg, Rng& rng) {
  if (n < 3 || static_cast<std::size_t>(n) > cands.size()) return std::nullopt;
  // Cheap rejection when no subset can satisfy the coverage constraints.
  std::array<bool, 4> quadrants{false, false, false, false};
  bool ceiling = false;
  bool floor = false;
  for (const auto& c : cands) {
    quadrants[static_cast<int>(c.quadrant)] = true;
    (c.hemisphere == Hemisphere::Ceiling ? ceiling : floor) = true;
  }
  if (!ceiling || !floor || std::count(quadrants.begin(), quadrants.end(), true) < 3) return std::nullopt;

  const double cluster_rad = deg2rad(cfg.azimuth_cluster_deg);
  std::vector<int> pool(cands.size());
  for (int attempt = 0; attempt < cfg.sample_retries; ++attempt) {
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates.
    for (int i = 0; i < n; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    std::vector<int> group(pool.begin(), pool.begin() + n);
    if (group_constraints_hold(cands, group, cluster_rad)) return group;
  }
  return std::nullopt;
}

std::optional<double> estimate_floor_height(const Vec3& c, Axis axis, double value) {
  if (!(c.z() < 0.0)) return std::nullopt;
  const double ca = axis == Axis::X ? c.x() : c.y();
  if (std::abs(ca) < 1e-12 || value == 0.0) return std::nullopt;
  const double h = -c.z() * value / ca;
  if (!(h > 0.0) || !std::isfinite(h)) return std::nullopt;
  return h;
}

namespace {

// Orientation of a wall: 0 runs along x (y constant), 1 runs along y (x constant).
constexpr int kAlongX = 0;
constexpr int kAlongY = 1;

struct Corner {
  int source = -1;
  bool ceiling = true;
  Vec2 p;  // ceiling point, or the floor point at h = 1
  Vec3 ray;
};

// Which axis (if any) the direction v is aligned with, within tol.
int aligned_axis(const Vec2& v, double tol) {
  const double n = v.norm();
  if (n < 1e-12) return -1;
  const double off_x = std::atan2(std::abs(v.y()), std::abs(v.x()));
  if (off_x <= tol) return kAlongX;
  if (kPi / 2 - off_x <= tol) return kAlongY;
  return -1;
}

struct Candidate {
  LayoutModel layout;
  int support = 0;  // height constraints that agreed
  double residual = 0.0;
};

std::optional<Candidate> realize(const std::vector<Corner>& corners, int first_orientation,
                                 const std::vector<int>& walls, double tol, int group_size) {
  const int n = static_cast<int>(corners.size());

  // Height constraints from single-wall ceiling/floor joins.
  struct Constraint {
    int floor_idx;
    Axis axis;
    double value;
  };
  std::vector<Constraint> constraints;
  int o = first_orientation;
  for (int j = 0; j < n; ++j) {
    const Corner& a = corners[j];
    const Corner& b = corners[(j + 1) % n];
    if (walls[j] == 1) {
      if (a.ceiling != b.ceiling) {
        const Corner& f = a.ceiling ? b : a;
        const Corner& c = a.ceiling ? a : b;
        // Wall along x shares y; wall along y shares x.
        const Axis axis = o == kAlongX ? Axis::Y : Axis::X;
        const double value = axis == Axis::X ? c.p.x() : c.p.y();
        constraints.push_back({static_cast<int>(&f - corners.data()), axis, value});
      }
      o = 1 - o;
    }
  }
  if (o != first_orientation) return std::nullopt;
  if (constraints.empty()) return std::nullopt;

  std::vector<double> hs;
  for (const auto& k : constraints) {
    auto h = estimate_floor_height(corners[k.floor_idx].ray, k.axis, k.value);
    if (!h) return std::nullopt;
    hs.push_back(*h);
  }
  std::vector<double> sorted = hs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  const double h = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);

  double residual = 0.0;
  for (const auto& k : constraints) {
    const Vec2 fp = h * corners[k.floor_idx].p;
    const double got = k.axis == Axis::X ? fp.x() : fp.y();
    const double err = std::abs(got - k.value);
    if (err > std::tan(tol) * std::abs(k.value)) return std::nullopt;
    residual += err / std::abs(k.value);
  }

  auto point = [&](const Corner& c) -> Vec2 { return c.ceiling ? c.p : Vec2(h * c.p); };

  LayoutModel layout;
  layout.floor_height = h;
  layout.group_size = group_size;
  std::vector<int> orient;
  o = first_orientation;
  for (int j = 0; j < n; ++j) {
    const Vec2 a = point(corners[j]);
    const Vec2 b = point(corners[(j + 1) % n]);
    layout.polygon.push_back(a);
    layout.vertex_sources.push_back(corners[j].source);
    orient.push_back(o);
    if (walls[j] == 1) {
      const double d = o == kAlongX ? b.y() - a.y() : b.x() - a.x();
      residual += std::abs(d) / std::max(a.norm() + b.norm(), 1e-12);
      o = 1 - o;
    } else {
      layout.polygon.push_back(o == kAlongX ? Vec2(b.x(), a.y()) : Vec2(a.x(), b.y()));
      layout.vertex_sources.push_back(-1);
      orient.push_back(1 - o);
    }
  }

  // Snap each wall's shared coordinate to the mean of its endpoints. Every vertex lies on exactly
  // one wall of each orientation, so the two updates never conflict.
  const int w = layout.wall_count();
  std::vector<Vec2> snapped = layout.polygon;
  for (int i = 0; i < w; ++i) {
    const Vec2& a = layout.polygon[i];
    const Vec2& b = layout.polygon[(i + 1) % w];
    const int c = orient[i] == kAlongX ? 1 : 0;
    const double mean = 0.5 * (a[c] + b[c]);
    snapped[i][c] = mean;
    snapped[(i + 1) % w][c] = mean;
  }
  layout.polygon = std::move(snapped);

  if (!validate_layout(layout, rad2deg(tol))) return std::nullopt;
  return Candidate{std::move(layout), static_cast<int>(constraints.size()), residual};
}

void enumerate(const std::vector<Corner>& corners, double tol, int join, int orientation, std::vector<int>& walls,
               std::vector<std::vector<int>>& out) {
  const int n = static_cast<int>(corners.size());
  if (join == n) {
    out.push_back(walls);
    return;
  }
  const Corner& a = corners[join];
  const Corner& b = corners[(join + 1) % n];
  std::vector<int> options;
  if (a.ceiling == b.ceiling) {
    // Same plane: alignment does not depend on h, so the join type is forced.
    const int ax = aligned_axis(b.p - a.p, tol);
    if (ax == orientation) {
      options = {1};
    } else if (ax < 0) {
      options = {2};
    }
  } else {
    options = {1, 2};
  }
  for (int k : options) {
    walls.push_back(k);
    enumerate(corners, tol, join + 1, k == 1 ? 1 - orientation : orientation, walls, out);
    walls.pop_back();
  }
}

}  // namespace

std::optional<LayoutModel> build_layout(std::span<const CornerCandidate> cands, std::span<const int> group,
                                        const HypothesisConfig& cfg) {
  const int n = static_cast<int>(group.size());
  if (n < 3) return std::nullopt;
  std::vector<Corner> corners;
  corners.reserve(n);
  for (int idx : group) {
    const CornerCandidate& cand = cands[idx];
    const Vec3& d = cand.dir.vec();
    Corner c;
    c.source = idx;
    c.ray = d;
    c.ceiling = d.z() > 0.0;
    if (std::abs(d.z()) < 1e-12) return std::nullopt;
    c.p = Vec2(d.x(), d.y()) / std::abs(d.z());
    corners.push_back(c);
  }
  // Clockwise from above = decreasing azimuth.
  std::stable_sort(corners.begin(), corners.end(), [](const Corner& l, const Corner& r) {
    return std::atan2(l.p.y(), l.p.x()) > std::atan2(r.p.y(), r.p.x());
  });

  const double tol = deg2rad(cfg.manhattan_tol_deg);
  std::optional<Candidate> best;
  for (int first : {kAlongX, kAlongY}) {
    std::vector<std::vector<int>> combos;
    std::vector<int> walls;
    enumerate(corners, tol, 0, first, walls, combos);
    for (const auto& combo : combos) {
      auto cand = realize(corners, first, combo, tol, n);
      if (!cand) continue;
      // Fewest walls, then the best-supported floor height, then the smallest misfit.
      const bool better = !best || std::tuple(cand->layout.wall_count(), -cand->support, cand->residual) <
                                       std::tuple(best->layout.wall_count(), -best->support, best->residual);
      if (better) best = std::move(cand);
    }
  }
  if (!best) return std::nullopt;
  return std::move(best->layout);
}

HypothesisSet HypothesisSet::prefix(int k, int attempts_per_hypothesis) const {
  HypothesisSet out;
  const long long budget = static_cast<long long>(attempts_per_hypothesis) * k;
  for (std::size_t i = 0; i < layouts.size() && static_cast<int>(out.layouts.size()) < k; ++i) {
    if (attempt_of[i] >= budget) break;
    out.layouts.push_back(layouts[i]);
    out.attempt_of.push_back(attempt_of[i]);
  }
  out.attempts = static_cast<int>(std::min<long long>(attempts, budget));
  if (static_cast<int>(out.layouts.size()) == k) out.attempts = out.attempt_of.back() + 1;
  return out;
}

namespace {

std::vector<long long> dedup_key(const LayoutModel& l) {
  constexpr double q = 1e-3;
  const int n = l.wall_count();
  std::vector<std::pair<long long, long long>> pts(n);
  for (int i = 0; i < n; ++i) {
    pts[i] = {std::llround(l.polygon[i].x() / q), std::llround(l.polygon[i].y() / q)};
  }
  const int start = static_cast<int>(std::min_element(pts.begin(), pts.end()) - pts.begin());
  std::vector<long long> key{std::llround(l.floor_height / q)};
  for (int i = 0; i < n; ++i) {
    key.push_back(pts[(start + i) % n].first);
    key.push_back(pts[(start + i) % n].second);
  }
  return key;
}

}  // namespace

HypothesisSet generate_hypotheses(std::span<const CornerCandidate> cands, const HypothesisConfig& cfg) {
  cfg.validate();
  HypothesisSet out;
  std::set<std::vector<long long>> seen;
  const long long budget = static_cast<long long>(cfg.attempts_per_hypothesis) * cfg.n_h;
  const std::uint64_t stream = derive_seed(cfg.seed, kStreamHypotheses);
  for (long long attempt = 0; attempt < budget && static_cast<int>(out.layouts.size()) < cfg.n_h; ++attempt) {
    out.attempts = static_cast<int>(attempt + 1);
    Rng rng = make_rng(stream, static_cast<std::uint64_t>(attempt));
    std::uniform_int_distribution<std::size_t> pick_size(0, cfg.group_sizes.size() - 1);
    const int n = cfg.group_sizes[pick_size(rng)];
    auto group = sample_corner_group(cands, n, cfg, rng);
    if (!group) continue;
    auto layout = build_layout(cands, *group, cfg);
    if (!layout) continue;
    if (!seen.insert(dedup_key(*layout)).second) continue;
    out.layouts.push_back(std::move(*layout));
    out.attempt_of.push_back(static_cast<int>(attempt));
  }
  if (out.layouts.empty()) throw GenerationError("no valid layout within the attempt budget");
  return out;
}

}  // namespace panolayout
