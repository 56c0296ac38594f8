#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "panolayout/pipeline.hpp"
#include "panolayout/synthetic.hpp"

namespace panolayout {

/// Median by sorting; the mean of the two middle values for even counts. Throws on empty input.
double median(std::vector<double> values);

struct BenchScene {
  std::string id;
  Image panorama;
  std::optional<ProbabilityMap> edge_map;
  std::optional<NormalMap> normal_map;
  std::optional<LabeledImage> reference;  ///< used when there is no normal map
  LabeledImage gt;
};

struct SyntheticMaps {
  Dims dims{512, 1024};
  double edge_sigma_px = 2.0;
  int supersample = 3;
  std::optional<double> ceiling_nil_rate;
};

/// Renders a generated scene into bench inputs: panorama, oracle edge map (structural segments
/// only), normal map at spec.flip_rate and ground-truth labels.
BenchScene make_bench_scene(const Scene& scene, const SyntheticMaps& maps, std::string id);

/// Scene directory: scene.json plus panorama.png, edges.png, normals.png, gt_labels.png.
void write_scene_dir(const fs::path& dir, const Scene& scene, const BenchScene& maps);
/// Loads a scene directory. Only panorama and gt labels are required; scene.json may name the files.
BenchScene read_scene_dir(const fs::path& dir);

enum class BenchMode { Geometry, GeometryEdges };
const char* to_string(BenchMode m);

struct BenchOptions {
  int repeats = 10;
  std::vector<int> n_h_values{100};
  std::vector<BenchMode> modes{BenchMode::GeometryEdges};
  /// Called with every generated hypothesis list (largest N_h), e.g. to audit the layouts.
  std::function<void(const HypothesisSet&)> on_hypotheses;
};

/// One (scene, mode, N_h) cell: EOP against ground truth for each repeat.
struct BenchRecord {
  std::string scene;
  BenchMode mode = BenchMode::GeometryEdges;
  int n_h = 0;
  std::vector<double> eops;
  double median_eop = 0.0;
  std::vector<int> lines_before;  ///< classified lines per repeat
  std::vector<int> lines_after;   ///< after the structural filter
  int failures = 0;               ///< repeats where a stage failed (scored as EOP 0)
};

/// Aggregate over scenes of the per-scene medians.
struct BenchSummary {
  BenchMode mode = BenchMode::GeometryEdges;
  int n_h = 0;
  double median = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  int scenes = 0;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  std::vector<BenchSummary> summaries;
  StageTimes mean_times;
  double mean_scene_seconds = 0.0;  ///< wall-clock per scene over all repeats and modes

  const BenchSummary& summary(BenchMode mode, int n_h) const;
  std::string to_csv() const;
  Json to_json() const;
};

/// Runs each scene `repeats` times with seeds derive_seed(base.seed, r). Lines and the basis are
/// computed once per (scene, repeat); the hypothesis list for the largest N_h is generated once
/// per mode and every smaller N_h uses the prefix that an independent run would have produced.
BenchReport bench(std::span<const BenchScene> scenes, const PipelineConfig& base, const BenchOptions& opts);

}  // namespace panolayout
