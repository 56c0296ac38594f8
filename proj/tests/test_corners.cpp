#include <gtest/gtest.h>

#include <random>

#include "panolayout/corners.hpp"
#include "panolayout/structural.hpp"
#include "panolayout/synthetic.hpp"

using namespace panolayout;

namespace {

VanishingBasis basis_of(const Scene& s) {
  VanishingBasis b;
  b.R = s.rotation;
  return b;
}

std::vector<GreatCircleSegment> weighted(std::vector<GreatCircleSegment> segs) {
  for (auto& s : segs) {
    s.inlier_count = 50;
    s.pixel_length = 50;
  }
  return segs;
}

}  // namespace

TEST(IntersectLines, SharedEndpointGivesTheCorner) {
  const Vec3 d(1.0, -2.0, 1.0);
  const GreatCircleSegment vertical = segment_from_points(Vec3(1.0, -2.0, -1.5), d, Axis::Z);
  const GreatCircleSegment along_x = segment_from_points(d, Vec3(-1.0, -2.0, 1.0), Axis::X);
  const auto c = intersect_lines(vertical, along_x, CornerConfig{});
  ASSERT_TRUE(c);
  EXPECT_LT(angle_between(c->vec(), d), 1e-12);
}

TEST(IntersectLines, FarFromAnEndpointIsRejected) {
  // A vertical piece rising from the equator at azimuth 40 deg, and two equator pieces: one
  // starting there, one starting 40 deg further on.
  auto eq = [](double deg) { return Vec3(std::cos(deg2rad(deg)), std::sin(deg2rad(deg)), 0.0); };
  const GreatCircleSegment up = segment_from_points(eq(40.0), eq(40.0) + Vec3(0, 0, 0.1), Axis::Z);
  const GreatCircleSegment near = segment_from_points(eq(40.0), eq(46.0), Axis::Y);
  const GreatCircleSegment far = segment_from_points(eq(80.0), eq(86.0), Axis::Y);
  const auto c = intersect_lines(up, near, CornerConfig{});
  ASSERT_TRUE(c);
  EXPECT_LT(angle_between(c->vec(), eq(40.0)), 1e-12);
  EXPECT_FALSE(intersect_lines(up, far, CornerConfig{}));
}

TEST(ClassifyCorner, HandPickedDirections) {
  const auto c = classify_corner(Vec3(0.6, -0.6, -0.529));
  ASSERT_TRUE(c);
  EXPECT_EQ(c->hemisphere, Hemisphere::Floor);
  EXPECT_EQ(c->quadrant, Quadrant::Q4);
  const auto d = classify_corner(Vec3(-0.1, 0.1, 0.99));
  ASSERT_TRUE(d);
  EXPECT_EQ(d->hemisphere, Hemisphere::Ceiling);
  EXPECT_EQ(d->quadrant, Quadrant::Q2);
  EXPECT_FALSE(classify_corner(Vec3(1, 0, 0)));
}

TEST(ClassifyCorner, SignPredicateProperty) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int i = 0; i < 5000; ++i) {
    const Vec3 v(g(rng), g(rng), g(rng));
    const auto c = classify_corner(v);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->hemisphere == Hemisphere::Ceiling, v.z() > 0);
    const int q = static_cast<int>(c->quadrant);
    const bool xp = v.x() > 0;
    const bool yp = v.y() > 0;
    EXPECT_EQ(q, xp && yp ? 0 : !xp && yp ? 1 : !xp && !yp ? 2 : 3);
  }
}

TEST(ExtractCornerCandidates, SameAxisPairGivesNothing) {
  VanishingBasis basis;
  const std::vector<GreatCircleSegment> lines{segment_from_points(Vec3(1, -1, 1), Vec3(1, 1, 1), Axis::Y),
                                              segment_from_points(Vec3(1, 1, 1), Vec3(-1, 1, 1), Axis::Y)};
  EXPECT_TRUE(extract_corner_candidates(lines, basis, CornerConfig{}).empty());
}

TEST(ExtractCornerCandidates, BoxGivesExactlyItsEightCorners) {
  SceneSpec spec = box_scene(2.0, 3.0, 1.5, 2.5, 1.4);
  spec.yaw_deg = 12.0;
  const Scene scene = generate_scene(spec);
  const auto lines = weighted(scene.structural);
  const auto cands = extract_corner_candidates(lines, basis_of(scene), CornerConfig{});
  ASSERT_EQ(cands.size(), 8u);
  const auto truth = scene.room_corners();
  for (const Vec3& t : truth) {
    double best = kPi;
    for (const auto& c : cands) best = std::min(best, angle_between(c.dir.vec(), t));
    EXPECT_LT(rad2deg(best), 0.5);
  }
  // Candidates lie on both parent circles (basis frame).
  const auto aligned = to_basis_frame(lines, basis_of(scene));
  for (const auto& c : cands) {
    EXPECT_LT(std::abs(c.dir.dot(aligned[c.parents.first].normal)), 1e-6);
    EXPECT_LT(std::abs(c.dir.dot(aligned[c.parents.second].normal)), 1e-6);
    const auto cls = classify_corner(c.dir);
    ASSERT_TRUE(cls);
    EXPECT_EQ(cls->hemisphere, c.hemisphere);
    EXPECT_EQ(cls->quadrant, c.quadrant);
  }
}

TEST(ExtractCornerCandidates, RoomCornersRecoveredWithinHalfDegree) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const Scene scene = generate_scene(sample_scene_spec(SceneOptions{}, seed));
    const auto cands = extract_corner_candidates(weighted(scene.structural), basis_of(scene), CornerConfig{});
    for (const Vec3& t : scene.room_corners()) {
      double best = kPi;
      for (const auto& c : cands) best = std::min(best, angle_between(c.dir.vec(), t));
      EXPECT_LT(rad2deg(best), 0.5) << "seed " << seed;
    }
  }
}

TEST(ExtractCornerCandidates, OracleFilteredClutterKeepsCountBounded) {
  SceneOptions opts;
  opts.wall_counts = {4};
  opts.clutter_rects = 9;
  const Scene scene = generate_scene(sample_scene_spec(opts, 31));
  const Dims dims{256, 512};
  std::vector<GreatCircleSegment> all = scene.structural;
  all.insert(all.end(), scene.clutter.begin(), scene.clutter.end());
  for (auto& s : all) {
    s.pixel_length = static_cast<int>(rasterize_arc(s, dims).size());
    s.inlier_count = s.pixel_length;
  }
  const auto m = threshold_probability(synth_edge_map(scene.structural, dims, 1.0), 0.2);
  const auto kept = filter_structural_lines(all, m);
  const auto cands = extract_corner_candidates(kept, basis_of(scene), CornerConfig{});
  EXPECT_LE(cands.size(), 2 * scene.room_corners().size());
}

TEST(DedupCorners, MergesNearbyAndIsIdempotent) {
  std::vector<CornerCandidate> c(4);
  c[0].dir = UnitVec3(1, 1, 1);
  c[0].weight = 3;
  c[1].dir = UnitVec3(1, 1.005, 1);  // well within 1 deg
  c[1].weight = 1;
  c[2].dir = UnitVec3(-1, 1, 1);
  c[2].weight = 2;
  c[3].dir = UnitVec3(1, 0.995, 1);
  c[3].weight = 1;
  const auto once = dedup_corners(c, 1.0);
  ASSERT_EQ(once.size(), 2u);
  EXPECT_DOUBLE_EQ(once[0].weight, 5.0);
  // The representative is one of the members, here the central one.
  EXPECT_EQ(once[0].dir.vec(), c[0].dir.vec());
  const auto twice = dedup_corners(once, 1.0);
  ASSERT_EQ(twice.size(), once.size());
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_EQ(twice[i].dir.vec(), once[i].dir.vec());
}
