#include "panolayout/corners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace panolayout {

const char* to_string(Hemisphere h) { return h == Hemisphere::Ceiling ? "ceiling" : "floor"; }

const char* to_string(Quadrant q) {
  switch (q) {
    case Quadrant::Q1: return "q1";
    case Quadrant::Q2: return "q2";
    case Quadrant::Q3: return "q3";
    default: return "q4";
  }
}

namespace {

struct EndpointFit {
  bool ok = false;
  double endpoint_distance = 0.0;
};

EndpointFit endpoint_fit(const GreatCircleSegment& seg, const Vec3& d, const CornerConfig& cfg) {
  const double near = std::min(angle_between(d, seg.d1.vec()), angle_between(d, seg.d2.vec()));
  if (near > deg2rad(cfg.gap_tolerance_deg)) return {};
  const double span = seg.span();
  const double t = seg.arc_position(d);
  if (t > 0.0 && t < span && std::min(t, span - t) > deg2rad(cfg.overshoot_deg)) return {};
  return {true, near};
}

}  // namespace

std::optional<UnitVec3> intersect_lines(const GreatCircleSegment& a, const GreatCircleSegment& b,
                                        const CornerConfig& cfg) {
  const Vec3 c = a.normal.vec().cross(b.normal.vec());
  if (c.norm() < 1e-6) return std::nullopt;
  std::optional<UnitVec3> best;
  double best_dist = 0.0;
  for (double sign : {1.0, -1.0}) {
    const Vec3 d = sign * c.normalized();
    const EndpointFit fa = endpoint_fit(a, d, cfg);
    const EndpointFit fb = endpoint_fit(b, d, cfg);
    if (!fa.ok || !fb.ok) continue;
    const double dist = fa.endpoint_distance + fb.endpoint_distance;
    if (!best || dist < best_dist) {
      best = UnitVec3(d);
      best_dist = dist;
    }
  }
  return best;
}

std::optional<CornerClass> classify_corner(const Vec3& d) {
  constexpr double kEps = 1e-9;
  if (std::abs(d.z()) < kEps || std::abs(d.x()) < kEps || std::abs(d.y()) < kEps) return std::nullopt;
  CornerClass cls;
  cls.hemisphere = d.z() > 0 ? Hemisphere::Ceiling : Hemisphere::Floor;
  if (d.x() > 0) {
    cls.quadrant = d.y() > 0 ? Quadrant::Q1 : Quadrant::Q4;
  } else {
    cls.quadrant = d.y() > 0 ? Quadrant::Q2 : Quadrant::Q3;
  }
  return cls;
}

namespace {

// One clustering pass. Members join the first cluster whose seed (heaviest member) is within
// the merge radius; each cluster is represented by its weighted medoid so the parent lines of
// the representative still pass exactly through it.
std::vector<CornerCandidate> cluster_once(std::span<const CornerCandidate> cands, double merge_rad) {
  std::vector<int> order(cands.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int l, int r) { return cands[l].weight > cands[r].weight; });
  std::vector<std::vector<int>> clusters;
  for (int i : order) {
    auto it = std::find_if(clusters.begin(), clusters.end(), [&](const std::vector<int>& cl) {
      return angle_between(cands[cl.front()].dir.vec(), cands[i].dir.vec()) <= merge_rad;
    });
    if (it == clusters.end()) {
      clusters.push_back({i});
    } else {
      it->push_back(i);
    }
  }
  std::vector<CornerCandidate> out;
  out.reserve(clusters.size());
  for (const auto& cl : clusters) {
    int medoid = cl.front();
    double best_cost = -1.0;
    double total = 0.0;
    for (int m : cl) {
      total += cands[m].weight;
      double cost = 0.0;
      for (int o : cl) cost += cands[o].weight * angle_between(cands[m].dir.vec(), cands[o].dir.vec());
      if (best_cost < 0.0 || cost < best_cost) {
        best_cost = cost;
        medoid = m;
      }
    }
    CornerCandidate rep = cands[medoid];
    rep.weight = total;
    out.push_back(rep);
  }
  return out;
}

}  // namespace

std::vector<CornerCandidate> dedup_corners(std::span<const CornerCandidate> cands, double merge_deg) {
  const double merge_rad = deg2rad(merge_deg);
  std::vector<CornerCandidate> current(cands.begin(), cands.end());
  while (true) {
    std::vector<CornerCandidate> next = cluster_once(current, merge_rad);
    if (next.size() == current.size()) return next;
    current = std::move(next);
  }
}

std::vector<CornerCandidate> extract_corner_candidates(std::span<const GreatCircleSegment> lines,
                                                       const VanishingBasis& basis, const CornerConfig& cfg) {
  const std::vector<GreatCircleSegment> aligned = to_basis_frame(lines, basis);
  std::vector<CornerCandidate> raw;
  for (std::size_t i = 0; i < aligned.size(); ++i) {
    for (std::size_t j = i + 1; j < aligned.size(); ++j) {
      const auto& a = aligned[i];
      const auto& b = aligned[j];
      if (a.axis == Axis::Unclassified || b.axis == Axis::Unclassified || a.axis == b.axis) continue;
      auto dir = intersect_lines(a, b, cfg);
      if (!dir) continue;
      CornerCandidate c;
      c.dir = *dir;
      c.parents = {static_cast<int>(i), static_cast<int>(j)};
      c.weight = a.inlier_count + b.inlier_count;
      raw.push_back(c);
    }
  }
  std::vector<CornerCandidate> out;
  for (CornerCandidate c : dedup_corners(raw, cfg.merge_deg)) {
    auto cls = classify_corner(c.dir.vec());
    if (!cls) continue;
    c.hemisphere = cls->hemisphere;
    c.quadrant = cls->quadrant;
    out.push_back(c);
  }
  return out;
}

}  // namespace panolayout
