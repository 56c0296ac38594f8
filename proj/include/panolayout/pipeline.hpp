#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "panolayout/corners.hpp"
#include "panolayout/hypotheses.hpp"
#include "panolayout/io.hpp"
#include "panolayout/lines.hpp"
#include "panolayout/structural.hpp"

namespace panolayout {

struct PipelineConfig {
  LineConfig lines;
  FilterConfig filter;
  CornerConfig corners;
  HypothesisConfig hypotheses;
  Dims eval_dims{256, 512};
  bool full_resolution_eval = false;  ///< score hypotheses at the reference's own resolution
  bool use_edge_map = true;           ///< false forces the geometry-only mode
  int view_count = 60;
  double view_fov_deg = 70.0;
  int view_resolution = 320;
  std::uint64_t seed = 0;

  fs::path panorama;
  fs::path edge_map;          ///< optional probability PNG
  fs::path normal_map;        ///< optional normal PNG, used to build the reference map
  fs::path reference_labels;  ///< optional label PNG, used when no normal map is given
  fs::path gt_labels;         ///< optional, for reporting EOP against ground truth
  fs::path output_dir;

  /// Copies `seed` into every stage that draws random numbers.
  void apply_seed(std::uint64_t s);
  void validate() const;  ///< throws std::invalid_argument
};

Json to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; relative paths are resolved against `base_dir`.
PipelineConfig config_from_json(const Json& j, const fs::path& base_dir = {});

struct StageTimes {
  double lines_ms = 0.0;
  double filter_ms = 0.0;
  double corners_ms = 0.0;
  double hypotheses_ms = 0.0;
  double evaluation_ms = 0.0;
};

/// Line detection and vanishing basis; shared by every back-end run on the same panorama.
struct FrontEnd {
  LineDetection detection;
  double lines_ms = 0.0;
};

FrontEnd run_front_end(const Image& panorama, const PipelineConfig& cfg);

struct PipelineResult {
  VanishingBasis basis;
  std::vector<GreatCircleSegment> lines;       ///< Manhattan-classified, camera frame
  std::vector<GreatCircleSegment> structural;  ///< after the edge-map filter
  bool filtering_skipped = false;
  std::vector<CornerCandidate> corners;
  HypothesisSet hypotheses;
  int best_index = -1;
  double reference_eop = 0.0;
  LayoutModel best;
  std::optional<double> gt_eop;
  StageTimes times;
};

/// Label map from a normal map in the recovered basis.
LabeledImage reference_from_normals(const NormalMap& normals, const VanishingBasis& basis, const PipelineConfig& cfg);

/// Structural filter (when an edge map is given and enabled), corners, hypotheses and, unless
/// `select` is false, selection. Errors are rethrown as StageError tagged with the failing stage.
PipelineResult run_back_end(const FrontEnd& front, const ProbabilityMap* edge_map, const LabeledImage& reference,
                            const LabeledImage* gt, const PipelineConfig& cfg, bool select = true);

/// EOP of every hypothesis against the reference at the evaluation resolution.
std::vector<double> reference_scores(std::span<const LayoutModel> hyps, const VanishingBasis& basis,
                                     const LabeledImage& reference, const PipelineConfig& cfg);

/// Picks the best of `hyps` against the reference (downsampled to cfg.eval_dims unless
/// full_resolution_eval) and, when gt is given, scores it against gt at full resolution.
struct Scored {
  int index = -1;
  double reference_eop = 0.0;
  std::optional<double> gt_eop;
};
Scored score_hypotheses(std::span<const LayoutModel> hyps, const VanishingBasis& basis, const LabeledImage& reference,
                        const LabeledImage* gt, const PipelineConfig& cfg);

/// Reads the configured inputs, runs every stage and writes outputs into cfg.output_dir
/// (when set): lines.json, corners.json, hypotheses.json, layout.json, layout.obj,
/// labels.png and report.json.
PipelineResult run_pipeline(const PipelineConfig& cfg);

Json report_json(const PipelineResult& r);

}  // namespace panolayout
