#include <gtest/gtest.h>

#include <cmath>

#include "panolayout/geometry.hpp"
#include "panolayout/lines.hpp"
#include "panolayout/synthetic.hpp"

using namespace panolayout;

namespace {

double normal_error_deg(const Vec3& a, const Vec3& b) {
  return rad2deg(std::acos(std::min(1.0, std::abs(a.dot(b)))));
}

EdgeGroup group_from_rays(std::vector<UnitVec3> rays, Dims dims = {512, 1024}) {
  EdgeGroup g;
  for (const auto& r : rays) g.pixels.push_back(ray_to_index(r, dims));
  g.rays = std::move(rays);
  return g;
}

}  // namespace

TEST(LineConfig, GroupSizeScalesWithWidth) {
  LineConfig cfg;
  EXPECT_EQ(cfg.group_size_for(1024), 30);
  EXPECT_EQ(cfg.group_size_for(2048), 60);
  EXPECT_EQ(cfg.group_size_for(512), 15);
  EXPECT_EQ(cfg.group_size_for(16), 3);  // floor
}

TEST(GreatCircleSegment, SpanAndArcPosition) {
  const GreatCircleSegment s = segment_from_points(Vec3(1, -1, 1), Vec3(1, 1, 1));
  const double expected = angle_between(Vec3(1, -1, 1), Vec3(1, 1, 1));
  EXPECT_NEAR(s.span(), expected, 1e-12);
  EXPECT_NEAR(s.arc_position(Vec3(1, 0, 1)), expected / 2, 1e-12);
  EXPECT_NEAR(s.arc_position(s.d1), 0.0, 1e-12);
  // A point just before d1 wraps to nearly a full turn.
  EXPECT_GT(s.arc_position(Vec3(1, -1.01, 1)), kPi);
}

TEST(GreatCircleSegment, TransformedMovesEveryDirection) {
  const GreatCircleSegment s = segment_from_points(Vec3(1, 0, 0.5), Vec3(0, 1, 0.5), Axis::Y);
  const Mat3 m = RotationMatrix::about_z(0.3).matrix();
  const GreatCircleSegment t = s.transformed(m);
  EXPECT_NEAR((t.normal.vec() - m * s.normal.vec()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((t.d2.vec() - m * s.d2.vec()).norm(), 0.0, 1e-12);
  EXPECT_EQ(t.axis, Axis::Y);
  EXPECT_NEAR(t.span(), s.span(), 1e-12);
}

TEST(FitGreatCircle, ExactPointsRecoverTheNormal) {
  const GreatCircleSegment truth = segment_from_points(Vec3(2, -1, 0.7), Vec3(1, 2, 0.7));
  Rng rng(3);
  auto rays = sample_arc_rays(truth, 80, 0.0, rng);
  LineConfig cfg;
  const auto fit = fit_great_circle(group_from_rays(rays), cfg, rng);
  ASSERT_TRUE(fit);
  EXPECT_LT(normal_error_deg(fit->normal, truth.normal), 1e-6);
  EXPECT_NEAR(fit->span(), truth.span(), deg2rad(0.5));
  EXPECT_EQ(fit->inlier_count, 80);
}

TEST(FitGreatCircle, NoisyArcsStayWithinInlierBand) {
  Rng rng(11);
  LineConfig cfg;
  for (int i = 0; i < 50; ++i) {
    const GreatCircleSegment truth = random_arc(rng, 20.0, 90.0);
    const auto rays = sample_arc_rays(truth, 100, 0.2, rng);
    const auto fit = fit_great_circle(group_from_rays(rays), cfg, rng);
    ASSERT_TRUE(fit);
    EXPECT_LT(normal_error_deg(fit->normal, truth.normal), 0.5);
  }
}

TEST(FitGreatCircle, ScatteredRaysAreRejected) {
  Rng rng(5);
  std::normal_distribution<double> g;
  std::vector<UnitVec3> rays;
  for (int i = 0; i < 60; ++i) rays.emplace_back(g(rng), g(rng), g(rng));
  LineConfig cfg;
  EXPECT_FALSE(fit_great_circle(group_from_rays(rays), cfg, rng));
}

TEST(DetectEdges, StepImageMarksBothBoundariesIncludingTheSeam) {
  // Left half dark, right half bright: the seam is a second boundary.
  Image img(64, 128, 1, 0.0f);
  for (int r = 0; r < 64; ++r) {
    for (int c = 64; c < 128; ++c) img.at(r, c) = 1.0f;
  }
  const BinaryRaster e = detect_edges(img, LineConfig{});
  int near_middle = 0;
  int near_seam = 0;
  int elsewhere = 0;
  for (int r = 8; r < 56; ++r) {
    for (int c = 0; c < 128; ++c) {
      if (!e.at(r, c)) continue;
      if (std::abs(c - 63.5) <= 2) ++near_middle;
      else if (c <= 1 || c >= 126) ++near_seam;
      else ++elsewhere;
    }
  }
  EXPECT_GE(near_middle, 48);
  EXPECT_GE(near_seam, 48);
  EXPECT_EQ(elsewhere, 0);
}

TEST(DetectEdges, ConstantImageHasNoEdges) {
  const BinaryRaster e = detect_edges(Image(32, 64, 3, 0.5f), LineConfig{});
  for (auto v : e.data()) EXPECT_EQ(v, 0);
}

TEST(ClusterEdgeGroups, JoinsAcrossTheSeamAndDropsSmallGroups) {
  BinaryRaster e({64, 128}, 0);
  for (int c = 100; c < 128; ++c) e.at(20, c) = 1;
  for (int c = 0; c < 20; ++c) e.at(20, c) = 1;  // 48 pixels across the seam
  for (int c = 50; c < 55; ++c) e.at(40, c) = 1; // too small
  LineConfig cfg;
  cfg.reference_width = 128;
  const auto groups = cluster_edge_groups(e, cfg);
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].pixels.size(), 48u);
  EXPECT_EQ(groups[0].rays.size(), 48u);
}

TEST(VanishingBasis, BoxSegmentsGiveTheRoomAxes) {
  SceneSpec spec = box_scene(2.0, 3.0, 1.5, 2.5, 1.4);
  spec.yaw_deg = 17.0;
  const Scene scene = generate_scene(spec);
  ASSERT_EQ(scene.structural.size(), 12u);
  Rng rng(1);
  LineConfig cfg;
  const VanishingBasis b = estimate_vanishing_basis(scene.structural, cfg, rng);
  // Yaw below 45 deg: axis naming matches the room frame exactly.
  EXPECT_LT((b.R.matrix() - scene.rotation.matrix()).norm(), 1e-6);
  // Each edge passes through exactly one vanishing direction.
  EXPECT_EQ(b.inliers[0] + b.inliers[1] + b.inliers[2], 12);
}

TEST(VanishingBasis, TooFewLinesThrows) {
  Rng rng(1);
  std::vector<GreatCircleSegment> lines{segment_from_points(Vec3(1, 0, 1), Vec3(0, 1, 1))};
  EXPECT_THROW(estimate_vanishing_basis(lines, LineConfig{}, rng), EstimationError);
}

TEST(ClassifyLines, LabelsMatchEdgeDirections) {
  SceneSpec spec = box_scene(2.0, 3.0, 1.5, 2.5, 1.4);
  spec.yaw_deg = -25.0;
  const Scene scene = generate_scene(spec);
  VanishingBasis basis;
  basis.R = scene.rotation;
  const auto classified = classify_lines(scene.structural, basis, LineConfig{});
  ASSERT_EQ(classified.size(), 12u);
  for (std::size_t i = 0; i < classified.size(); ++i) EXPECT_EQ(classified[i].axis, scene.structural[i].axis);
  const auto in_basis = to_basis_frame(classified, basis);
  for (const auto& l : in_basis) {
    EXPECT_NEAR(l.normal.vec()[static_cast<int>(l.axis)], 0.0, 1e-9);
  }
}

TEST(DetectLines, RenderedBoxRecoversBasisAndIsDeterministic) {
  SceneSpec spec = box_scene(2.0, 3.0, 1.5, 2.5, 1.4);
  spec.yaw_deg = 10.0;
  const Scene scene = generate_scene(spec);
  const Image pano = render_panorama(scene, {256, 512});
  LineConfig cfg;
  cfg.seed = 42;
  const LineDetection a = detect_lines(pano, cfg);
  const LineDetection b = detect_lines(pano, cfg);
  EXPECT_LT((a.basis.R.matrix() - scene.rotation.matrix()).cwiseAbs().maxCoeff(), deg2rad(1.0));
  EXPECT_GE(a.classified.size(), 12u);
  ASSERT_EQ(a.raw.size(), b.raw.size());
  for (std::size_t i = 0; i < a.raw.size(); ++i) EXPECT_EQ(a.raw[i].normal.vec(), b.raw[i].normal.vec());
  EXPECT_EQ(a.basis.R.matrix(), b.basis.R.matrix());
}
