#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "panolayout/corners.hpp"
#include "panolayout/layout.hpp"
#include "panolayout/rng.hpp"

namespace panolayout {

struct HypothesisConfig {
  int n_h = 100;
  std::vector<int> group_sizes{3, 4, 5};
  double manhattan_tol_deg = 5.0;
  double azimuth_cluster_deg = 2.0;  ///< sampled corners must differ in azimuth by more than this
  int sample_retries = 50;
  int attempts_per_hypothesis = 200;
  std::uint64_t seed = 0;

  void validate() const;  ///< throws std::invalid_argument
};

/// Uniform sample of n candidates covering at least three quadrants and both hemispheres, with
/// pairwise distinct azimuths. None after cfg.sample_retries failed draws.
std::optional<std::vector<int>> sample_corner_group(std::span<const CornerCandidate> cands, int n,
                                                    const HypothesisConfig& cfg, Rng& rng);

/// Floor height from a floor corner ray (basis frame) and one wall coordinate the floor point must
/// reach: h = -c_z * value / c_axis. None if unusable (c_z >= 0, c_axis ~ 0, or h <= 0).
std::optional<double> estimate_floor_height(const Vec3& floor_ray, Axis axis, double value);

/// Joins the sampled corners (indices into cands) into a closed rectilinear layout, inserting at
/// most one hidden corner between consecutive corners. Rejects (none) whenever the result fails
/// validation.
std::optional<LayoutModel> build_layout(std::span<const CornerCandidate> cands, std::span<const int> group,
                                        const HypothesisConfig& cfg);

struct HypothesisSet {
  std::vector<LayoutModel> layouts;
  std::vector<int> attempt_of;  ///< attempt index that produced each layout
  int attempts = 0;

  /// The list that a run with n_h = k would have produced (same seed and config otherwise).
  HypothesisSet prefix(int k, int attempts_per_hypothesis) const;
};

/// Repeats sample + build until cfg.n_h distinct layouts or the attempt budget is spent. Attempt i
/// draws from its own stream, so the output depends only on (cands, cfg).
/// Throws GenerationError when no valid layout was found.
HypothesisSet generate_hypotheses(std::span<const CornerCandidate> cands, const HypothesisConfig& cfg);

}  // namespace panolayout
