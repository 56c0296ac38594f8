#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <numeric>

#include "panolayout/corners.hpp"
#include "panolayout/hypotheses.hpp"
#include "panolayout/layout.hpp"
#include "panolayout/synthetic.hpp"

using namespace panolayout;

namespace {

CornerCandidate ceiling(double x, double y) {
  CornerCandidate c;
  c.dir = UnitVec3(x, y, 1.0);
  const auto cls = classify_corner(c.dir);
  c.hemisphere = cls->hemisphere;
  c.quadrant = cls->quadrant;
  c.weight = 1.0;
  return c;
}

CornerCandidate floor_corner(double x, double y, double h) {
  CornerCandidate c = ceiling(x, y);
  c.dir = UnitVec3(x, y, -h);
  c.hemisphere = Hemisphere::Floor;
  return c;
}

std::vector<int> all_of(std::size_t n) {
  std::vector<int> g(n);
  std::iota(g.begin(), g.end(), 0);
  return g;
}

LayoutModel box_layout() {
  LayoutModel l;
  l.polygon = {{-2, -1}, {-2, 2}, {3, 2}, {3, -1}};
  l.floor_height = 1.5;
  return l;
}

std::vector<CornerCandidate> true_candidates(const Scene& s) {
  std::vector<CornerCandidate> out;
  for (const Vec3& p : s.room_corners()) {
    CornerCandidate c;
    c.dir = UnitVec3(p);
    const auto cls = classify_corner(c.dir);
    c.hemisphere = cls->hemisphere;
    c.quadrant = cls->quadrant;
    c.weight = 1.0;
    out.push_back(c);
  }
  return out;
}

int quadrant_of(const Vec2& p) { return p.x() > 0 ? (p.y() > 0 ? 0 : 3) : (p.y() > 0 ? 1 : 2); }

}  // namespace

// --- layout validator ---------------------------------------------------------------------------

TEST(ValidateLayout, AcceptsBox) { EXPECT_TRUE(validate_layout(box_layout())); }

TEST(ValidateLayout, RejectsEachBrokenInvariant) {
  LayoutModel ccw = box_layout();
  std::reverse(ccw.polygon.begin(), ccw.polygon.end());
  EXPECT_FALSE(validate_layout(ccw));

  LayoutModel outside = box_layout();
  for (auto& p : outside.polygon) p += Vec2(5.0, 0.0);
  EXPECT_FALSE(validate_layout(outside));

  LayoutModel odd = box_layout();
  odd.polygon.pop_back();
  EXPECT_FALSE(validate_layout(odd));

  LayoutModel slanted = box_layout();
  slanted.polygon[2] = {3.0, 2.5};  // 3 -> 2.5 over 5 units is ~5.7 deg off
  EXPECT_FALSE(validate_layout(slanted));

  LayoutModel flat = box_layout();
  flat.floor_height = 0.0;
  EXPECT_FALSE(validate_layout(flat));

  LayoutModel too_many = box_layout();
  too_many.group_size = 2;  // bound 2 (2 - 1) = 2 walls
  EXPECT_FALSE(validate_layout(too_many));

  // Self-intersecting "bow tie" with alternating axis-parallel edges.
  LayoutModel bowtie;
  bowtie.polygon = {{-1, -1}, {-1, 2}, {2, 2}, {2, 1}, {-2, 1}, {-2, -1}};
  EXPECT_FALSE(validate_layout(bowtie));
}

TEST(SignedArea, OrientationSign) {
  const auto box = box_layout().polygon;
  EXPECT_DOUBLE_EQ(signed_area(box), -15.0);
  std::vector<Vec2> ccw(box.rbegin(), box.rend());
  EXPECT_DOUBLE_EQ(signed_area(ccw), 15.0);
}

TEST(PointInPolygon, InsideOutside) {
  const auto box = box_layout().polygon;
  EXPECT_TRUE(point_in_polygon(box, {0, 0}));
  EXPECT_TRUE(point_in_polygon(box, {2.9, 1.9}));
  EXPECT_FALSE(point_in_polygon(box, {3.1, 0}));
  EXPECT_FALSE(point_in_polygon(box, {0, -1.5}));
}

// --- sampling and building ---------------------------------------------------------------------

TEST(HypothesisConfig, Validation) {
  HypothesisConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_h = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.n_h = 1;
  cfg.group_sizes = {2};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.group_sizes = {};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(EstimateFloorHeight, ClosedForms) {
  EXPECT_NEAR(*estimate_floor_height(UnitVec3(1, 1, -1), Axis::X, 2.0), 2.0, 1e-12);
  EXPECT_NEAR(*estimate_floor_height(UnitVec3(1, 0, -2), Axis::X, 1.0), 2.0, 1e-12);
  EXPECT_NEAR(*estimate_floor_height(UnitVec3(-1, -3, -2), Axis::Y, -1.5), 1.0, 1e-12);
  EXPECT_FALSE(estimate_floor_height(UnitVec3(1, 1, 1), Axis::X, 2.0));    // ceiling ray
  EXPECT_FALSE(estimate_floor_height(UnitVec3(1, 1, -1), Axis::X, -2.0));  // wrong side
  EXPECT_FALSE(estimate_floor_height(UnitVec3(0, 1, -1), Axis::X, 2.0));   // parallel
}

TEST(EstimateFloorHeight, EveryTrueFloorCornerGivesTheTrueHeight) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Scene s = generate_scene(sample_scene_spec(SceneOptions{}, seed));
    const int n = s.layout.wall_count();
    const auto pts = s.room_corners();
    for (int i = 0; i < n; ++i) {
      const Vec3 f = pts[n + i].normalized();
      const Vec2& v = s.layout.polygon[i];
      EXPECT_NEAR(*estimate_floor_height(f, Axis::X, v.x()), s.spec.floor_height, 1e-9 * s.spec.floor_height);
      EXPECT_NEAR(*estimate_floor_height(f, Axis::Y, v.y()), s.spec.floor_height, 1e-9 * s.spec.floor_height);
    }
  }
}

TEST(SampleCornerGroup, TwoQuadrantsOrOneHemisphereNeverSample) {
  HypothesisConfig cfg;
  Rng rng(1);
  const std::vector<CornerCandidate> two_quadrants{ceiling(1, 1), floor_corner(1, 2, 1), ceiling(-1, 1),
                                                   floor_corner(-2, 1, 1)};
  EXPECT_FALSE(sample_corner_group(two_quadrants, 3, cfg, rng));
  const std::vector<CornerCandidate> ceiling_only{ceiling(1, 1), ceiling(-1, 1), ceiling(-1, -1), ceiling(1, -1)};
  EXPECT_FALSE(sample_corner_group(ceiling_only, 3, cfg, rng));
  EXPECT_FALSE(sample_corner_group(ceiling_only, 5, cfg, rng));  // more than available
}

TEST(SampleCornerGroup, ThreeQuadrantsBothHemispheresIsAccepted) {
  HypothesisConfig cfg;
  Rng rng(1);
  // {ceiling q2, floor q3, ceiling q4}
  const std::vector<CornerCandidate> c{ceiling(-1, 1), floor_corner(-1, -1, 1.3), ceiling(1, -1)};
  const auto g = sample_corner_group(c, 3, cfg, rng);
  ASSERT_TRUE(g);
  std::vector<int> sorted = *g;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, (std::vector<int>{0, 1, 2}));
}

TEST(SampleCornerGroup, RejectsSameAzimuth) {
  HypothesisConfig cfg;
  Rng rng(1);
  // Ceiling and floor corner of the same vertical edge share an azimuth.
  const std::vector<CornerCandidate> c{ceiling(-1, 1), floor_corner(-1, 1, 1.3), ceiling(1, -1)};
  EXPECT_FALSE(sample_corner_group(c, 3, cfg, rng));
}

TEST(BuildLayout, NoiseFreeBoxCornersGiveTheBox) {
  const LayoutModel truth = box_layout();
  const double h = truth.floor_height;
  // Two ceiling and two floor corners.
  const std::vector<CornerCandidate> c{ceiling(-2, -1), floor_corner(-2, 2, h), ceiling(3, 2), floor_corner(3, -1, h)};
  const auto l = build_layout(c, all_of(c.size()), HypothesisConfig{});
  ASSERT_TRUE(l);
  EXPECT_NEAR(l->floor_height, h, 1e-9);
  ASSERT_EQ(l->wall_count(), 4);
  for (const Vec2& p : truth.polygon) {
    const bool found = std::any_of(l->polygon.begin(), l->polygon.end(), [&](const Vec2& q) { return (q - p).norm() < 1e-6; });
    EXPECT_TRUE(found);
  }
}

TEST(BuildLayout, FourCornersWithTwoHiddenGiveSixWalls) {
  // L-shaped room; two of its six corners are never sampled.
  const double h = 1.5;
  const std::vector<CornerCandidate> c{ceiling(-2, 2), floor_corner(3, 2, h), ceiling(1, -1), floor_corner(-2, -3, h)};
  const auto l = build_layout(c, all_of(c.size()), HypothesisConfig{});
  ASSERT_TRUE(l);
  EXPECT_EQ(l->wall_count(), 6);
  int hidden = 0;
  for (int i = 0; i < l->wall_count(); ++i) hidden += l->inserted(i);
  EXPECT_EQ(hidden, 2);
  EXPECT_NEAR(l->floor_height, h, 1e-9);
  const std::vector<Vec2> expected{{-2, 2}, {3, 2}, {3, -1}, {1, -1}, {1, -3}, {-2, -3}};
  for (const Vec2& p : expected) {
    const bool found = std::any_of(l->polygon.begin(), l->polygon.end(), [&](const Vec2& q) { return (q - p).norm() < 1e-6; });
    EXPECT_TRUE(found) << p.transpose();
  }
  EXPECT_TRUE(validate_layout(*l));
}

TEST(BuildLayout, NonManhattanClosureIsRejected) {
  // Three ceiling corners fix two walls of a box; the floor corner sits off the remaining
  // wall lines, so no alternating closure exists.
  const std::vector<CornerCandidate> c{ceiling(-2, 2), ceiling(3, 2), ceiling(3, -1), floor_corner(-2, -1.5, 1.5)};
  EXPECT_FALSE(build_layout(c, all_of(c.size()), HypothesisConfig{}));
}

TEST(BuildLayout, EveryCeilingFloorMixOfTrueCornersRecoversHeight) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Scene s = generate_scene(sample_scene_spec(SceneOptions{}, seed));
    const auto pts = s.room_corners();
    const int n = s.layout.wall_count();
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<CornerCandidate> c;
      for (int i = 0; i < n; ++i) {
        CornerCandidate k;
        k.dir = UnitVec3(pts[(mask >> i & 1u) ? n + i : i]);
        const auto cls = classify_corner(k.dir);
        k.hemisphere = cls->hemisphere;
        k.quadrant = cls->quadrant;
        c.push_back(k);
      }
      const auto l = build_layout(c, all_of(n), HypothesisConfig{});
      ASSERT_TRUE(l);
      EXPECT_NEAR(l->floor_height, s.spec.floor_height, 1e-9 * s.spec.floor_height);
      EXPECT_EQ(l->wall_count(), n);
    }
  }
}

// --- generation -------------------------------------------------------------------------------

TEST(GenerateHypotheses, GroupSizeThreeGivesOnlyBoxes) {
  const Scene s = generate_scene(sample_scene_spec(SceneOptions{{8}}, 4));
  HypothesisConfig cfg;
  cfg.group_sizes = {3};
  cfg.n_h = 30;
  const HypothesisSet set = generate_hypotheses(true_candidates(s), cfg);
  ASSERT_FALSE(set.layouts.empty());
  for (const auto& l : set.layouts) EXPECT_EQ(l.wall_count(), 4);
}

TEST(GenerateHypotheses, InvariantsHoldForEveryLayout) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Scene s = generate_scene(sample_scene_spec(SceneOptions{}, seed));
    HypothesisConfig cfg;
    cfg.seed = seed;
    const HypothesisSet set = generate_hypotheses(true_candidates(s), cfg);
    ASSERT_EQ(set.layouts.size(), set.attempt_of.size());
    for (const auto& l : set.layouts) {
      EXPECT_TRUE(validate_layout(l)) << validate_layout(l).reason;
      EXPECT_EQ(l.wall_count() % 2, 0);
      EXPECT_LE(l.wall_count(), 2 * (l.group_size - 1));
      std::array<int, 4> per_quadrant{};
      for (const Vec2& p : l.polygon) ++per_quadrant[quadrant_of(p)];
      for (int q : per_quadrant) EXPECT_EQ(q % 2, 1);
    }
    EXPECT_TRUE(std::is_sorted(set.attempt_of.begin(), set.attempt_of.end()));
  }
}

TEST(GenerateHypotheses, DeterministicAndDistinct) {
  const Scene s = generate_scene(sample_scene_spec(SceneOptions{{6}}, 12));
  HypothesisConfig cfg;
  cfg.seed = 99;
  const auto a = generate_hypotheses(true_candidates(s), cfg);
  const auto b = generate_hypotheses(true_candidates(s), cfg);
  ASSERT_EQ(a.layouts.size(), b.layouts.size());
  for (std::size_t i = 0; i < a.layouts.size(); ++i) {
    EXPECT_EQ(a.layouts[i].polygon, b.layouts[i].polygon);
    EXPECT_EQ(a.layouts[i].floor_height, b.layouts[i].floor_height);
    for (std::size_t j = 0; j < i; ++j) {
      const bool same = a.layouts[i].polygon.size() == a.layouts[j].polygon.size() &&
                        std::abs(a.layouts[i].floor_height - a.layouts[j].floor_height) < 1e-12 &&
                        a.layouts[i].polygon == a.layouts[j].polygon;
      EXPECT_FALSE(same);
    }
  }
}

TEST(GenerateHypotheses, SingleHypothesisOnBoxIsValid) {
  const Scene s = generate_scene(box_scene(2.0, 3.0, 1.5, 2.5, 1.4));
  HypothesisConfig cfg;
  cfg.n_h = 1;
  const auto set = generate_hypotheses(true_candidates(s), cfg);
  ASSERT_EQ(set.layouts.size(), 1u);
  EXPECT_TRUE(validate_layout(set.layouts[0]));
}

TEST(GenerateHypotheses, PrefixMatchesAnIndependentSmallerRun) {
  const Scene s = generate_scene(sample_scene_spec(SceneOptions{{8}}, 21));
  HypothesisConfig cfg;
  cfg.seed = 5;
  const auto full = generate_hypotheses(true_candidates(s), cfg);
  for (int k : {1, 3, 10}) {
    HypothesisConfig small = cfg;
    small.n_h = k;
    const auto direct = generate_hypotheses(true_candidates(s), small);
    const auto pre = full.prefix(k, cfg.attempts_per_hypothesis);
    ASSERT_EQ(direct.layouts.size(), pre.layouts.size()) << k;
    for (std::size_t i = 0; i < pre.layouts.size(); ++i) EXPECT_EQ(direct.layouts[i].polygon, pre.layouts[i].polygon);
  }
}

TEST(GenerateHypotheses, ImpossibleCandidatesThrow) {
  const std::vector<CornerCandidate> c{ceiling(1, 1), ceiling(-1, 1), ceiling(-1, -1)};
  HypothesisConfig cfg;
  cfg.n_h = 2;
  EXPECT_THROW(generate_hypotheses(c, cfg), GenerationError);
}
