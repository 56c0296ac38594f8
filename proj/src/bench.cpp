#include "panolayout/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "panolayout/evaluation.hpp"

namespace panolayout {

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

BenchScene make_bench_scene(const Scene& scene, const SyntheticMaps& maps, std::string id) {
  BenchScene b;
  b.id = std::move(id);
  b.panorama = render_panorama(scene, maps.dims, maps.supersample);
  b.edge_map = synth_edge_map(scene.structural, maps.dims, maps.edge_sigma_px);
  b.gt = analytic_labels(scene, maps.dims);
  b.normal_map = synth_normal_map(b.gt, scene.rotation, scene.spec.flip_rate, scene.spec.seed, maps.ceiling_nil_rate);
  return b;
}

void write_scene_dir(const fs::path& dir, const Scene& scene, const BenchScene& maps) {
  fs::create_directories(dir);
  write_image(dir / "panorama.png", maps.panorama);
  if (maps.edge_map) write_probability_png(dir / "edges.png", *maps.edge_map);
  if (maps.normal_map) write_normal_png(dir / "normals.png", *maps.normal_map);
  write_label_png(dir / "gt_labels.png", maps.gt);
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r) {
    const Mat3& m = scene.rotation.matrix();
    rot.push_back(Json::array({m(r, 0), m(r, 1), m(r, 2)}));
  }
  Json clutter = Json::array();
  for (const auto& c : scene.spec.clutter) {
    clutter.push_back({{"face", c.face}, {"lo", {c.lo.x(), c.lo.y()}}, {"hi", {c.hi.x(), c.hi.y()}}, {"gray", c.gray}});
  }
  write_json(dir / "scene.json", {{"format_version", kFormatVersion},
                                  {"kind", "scene"},
                                  {"id", maps.id},
                                  {"panorama", "panorama.png"},
                                  {"edge_map", maps.edge_map ? "edges.png" : ""},
                                  {"normal_map", maps.normal_map ? "normals.png" : ""},
                                  {"gt_labels", "gt_labels.png"},
                                  {"layout", to_json(scene.layout)},
                                  {"rotation", rot},
                                  {"yaw_deg", scene.spec.yaw_deg},
                                  {"tilt_deg", scene.spec.tilt_deg},
                                  {"flip_rate", scene.spec.flip_rate},
                                  {"clutter", clutter},
                                  {"seed", scene.spec.seed}});
}

BenchScene read_scene_dir(const fs::path& dir) {
  Json j;
  if (fs::exists(dir / "scene.json")) j = read_json(dir / "scene.json");
  auto file = [&](const char* key, const char* fallback) -> fs::path {
    const std::string name = j.is_object() && j.contains(key) ? j.at(key).get<std::string>() : std::string(fallback);
    return name.empty() ? fs::path() : dir / name;
  };
  BenchScene b;
  b.id = j.is_object() && j.contains("id") ? j.at("id").get<std::string>() : dir.filename().string();
  b.panorama = read_image(file("panorama", "panorama.png"));
  b.gt = read_label_png(file("gt_labels", "gt_labels.png"));
  if (const fs::path p = file("edge_map", "edges.png"); !p.empty() && fs::exists(p)) b.edge_map = read_probability_png(p);
  if (const fs::path p = file("normal_map", "normals.png"); !p.empty() && fs::exists(p)) b.normal_map = read_normal_png(p);
  if (const fs::path p = file("reference_labels", "reference.png"); !p.empty() && fs::exists(p)) {
    b.reference = read_label_png(p);
  }
  if (!b.normal_map && !b.reference) throw IoError(dir.string() + ": needs normals.png or reference.png");
  return b;
}

const char* to_string(BenchMode m) { return m == BenchMode::Geometry ? "G" : "G+DL"; }

const BenchSummary& BenchReport::summary(BenchMode mode, int n_h) const {
  for (const auto& s : summaries) {
    if (s.mode == mode && s.n_h == n_h) return s;
  }
  throw std::out_of_range("no bench summary for this mode and N_h");
}

std::string BenchReport::to_csv() const {
  std::ostringstream out;
  out.precision(6);
  out << "scene,mode,n_h,repeat,eop\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.eops.size(); ++i) {
      out << r.scene << ',' << to_string(r.mode) << ',' << r.n_h << ',' << i << ',' << r.eops[i] << '\n';
    }
  }
  return out.str();
}

Json BenchReport::to_json() const {
  Json recs = Json::array();
  for (const auto& r : records) {
    recs.push_back({{"scene", r.scene},
                    {"mode", to_string(r.mode)},
                    {"n_h", r.n_h},
                    {"eops", r.eops},
                    {"median", r.median_eop},
                    {"lines_before", r.lines_before},
                    {"lines_after", r.lines_after},
                    {"failures", r.failures}});
  }
  Json sums = Json::array();
  for (const auto& s : summaries) {
    sums.push_back({{"mode", to_string(s.mode)},
                    {"n_h", s.n_h},
                    {"median", s.median},
                    {"mean", s.mean},
                    {"stddev", s.stddev},
                    {"scenes", s.scenes}});
  }
  return {{"format_version", kFormatVersion},
          {"kind", "bench"},
          {"records", recs},
          {"summaries", sums},
          {"mean_scene_seconds", mean_scene_seconds},
          {"mean_stage_ms",
           {{"lines", mean_times.lines_ms},
            {"filter", mean_times.filter_ms},
            {"corners", mean_times.corners_ms},
            {"hypotheses", mean_times.hypotheses_ms},
            {"evaluation", mean_times.evaluation_ms}}}};
}

BenchReport bench(std::span<const BenchScene> scenes, const PipelineConfig& base, const BenchOptions& opts) {
  if (scenes.empty()) throw std::invalid_argument("bench: no scenes");
  if (opts.repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
  if (opts.n_h_values.empty() || opts.modes.empty()) throw std::invalid_argument("bench: empty sweep");
  for (int k : opts.n_h_values) {
    if (k < 1) throw std::invalid_argument("bench: N_h must be >= 1");
  }
  const int max_nh = *std::max_element(opts.n_h_values.begin(), opts.n_h_values.end());

  using Clock = std::chrono::steady_clock;
  BenchReport report;
  StageTimes total_times;
  int back_end_runs = 0;
  int front_end_runs = 0;
  double total_seconds = 0.0;

  for (const BenchScene& scene : scenes) {
    const auto scene_t0 = Clock::now();
    // records[mode][n_h index]
    std::vector<std::vector<BenchRecord>> cells(opts.modes.size());
    for (std::size_t m = 0; m < opts.modes.size(); ++m) {
      for (int k : opts.n_h_values) cells[m].push_back({scene.id, opts.modes[m], k, {}, 0.0, {}, {}, 0});
    }
    for (int rep = 0; rep < opts.repeats; ++rep) {
      PipelineConfig cfg = base;
      cfg.apply_seed(derive_seed(base.seed, static_cast<std::uint64_t>(rep)));
      cfg.hypotheses.n_h = max_nh;

      std::optional<FrontEnd> front;
      try {
        front = run_front_end(scene.panorama, cfg);
        total_times.lines_ms += front->lines_ms;
        ++front_end_runs;
      } catch (const std::exception&) {
        front.reset();
      }
      std::optional<LabeledImage> reference;
      if (front) {
        if (scene.normal_map) {
          reference = reference_from_normals(*scene.normal_map, front->detection.basis, cfg);
        } else if (scene.reference) {
          reference = *scene.reference;
        }
      }

      for (std::size_t m = 0; m < opts.modes.size(); ++m) {
        cfg.use_edge_map = opts.modes[m] == BenchMode::GeometryEdges;
        std::optional<PipelineResult> res;
        if (front && reference) {
          try {
            res = run_back_end(*front, scene.edge_map ? &*scene.edge_map : nullptr, *reference, nullptr, cfg, false);
          } catch (const std::exception&) {
            res.reset();
          }
        }
        std::vector<double> scores;
        std::vector<std::optional<double>> gt_cache;
        if (res) {
          const auto t0 = Clock::now();
          scores = reference_scores(res->hypotheses.layouts, res->basis, *reference, cfg);
          gt_cache.assign(scores.size(), std::nullopt);
          res->times.evaluation_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
          total_times.filter_ms += res->times.filter_ms;
          total_times.corners_ms += res->times.corners_ms;
          total_times.hypotheses_ms += res->times.hypotheses_ms;
          total_times.evaluation_ms += res->times.evaluation_ms;
          ++back_end_runs;
          if (opts.on_hypotheses) opts.on_hypotheses(res->hypotheses);
        }
        for (std::size_t ki = 0; ki < opts.n_h_values.size(); ++ki) {
          BenchRecord& rec = cells[m][ki];
          if (!res) {
            rec.eops.push_back(0.0);
            rec.lines_before.push_back(front ? static_cast<int>(front->detection.classified.size()) : 0);
            rec.lines_after.push_back(0);
            ++rec.failures;
            continue;
          }
          rec.lines_before.push_back(static_cast<int>(res->lines.size()));
          rec.lines_after.push_back(static_cast<int>(res->structural.size()));
          const HypothesisSet sub = res->hypotheses.prefix(rec.n_h, cfg.hypotheses.attempts_per_hypothesis);
          if (sub.layouts.empty()) {
            rec.eops.push_back(0.0);
            ++rec.failures;
            continue;
          }
          // Same rule as select_best: highest score, then fewer walls, then earlier index.
          int best = 0;
          for (int i = 1; i < static_cast<int>(sub.layouts.size()); ++i) {
            if (scores[i] > scores[best] ||
                (scores[i] == scores[best] && sub.layouts[i].wall_count() < sub.layouts[best].wall_count())) {
              best = i;
            }
          }
          if (!gt_cache[best]) {
            const RayGrid grid = make_ray_grid(scene.gt.dims(), res->basis.R.matrix().transpose());
            gt_cache[best] = eop(render_labels(sub.layouts[best], grid), scene.gt);
          }
          rec.eops.push_back(*gt_cache[best]);
        }
      }
    }
    for (auto& per_mode : cells) {
      for (auto& rec : per_mode) {
        rec.median_eop = median(rec.eops);
        report.records.push_back(std::move(rec));
      }
    }
    total_seconds += std::chrono::duration<double>(Clock::now() - scene_t0).count();
  }

  for (BenchMode mode : opts.modes) {
    for (int k : opts.n_h_values) {
      std::vector<double> meds;
      for (const auto& r : report.records) {
        if (r.mode == mode && r.n_h == k) meds.push_back(r.median_eop);
      }
      BenchSummary s;
      s.mode = mode;
      s.n_h = k;
      s.scenes = static_cast<int>(meds.size());
      s.median = median(meds);
      s.mean = std::accumulate(meds.begin(), meds.end(), 0.0) / meds.size();
      double var = 0.0;
      for (double v : meds) var += (v - s.mean) * (v - s.mean);
      s.stddev = std::sqrt(var / meds.size());
      report.summaries.push_back(s);
    }
  }
  if (front_end_runs > 0) report.mean_times.lines_ms = total_times.lines_ms / front_end_runs;
  if (back_end_runs > 0) {
    report.mean_times.filter_ms = total_times.filter_ms / back_end_runs;
    report.mean_times.corners_ms = total_times.corners_ms / back_end_runs;
    report.mean_times.hypotheses_ms = total_times.hypotheses_ms / back_end_runs;
    report.mean_times.evaluation_ms = total_times.evaluation_ms / back_end_runs;
  }
  report.mean_scene_seconds = total_seconds / scenes.size();
  return report;
}

}  // namespace panolayout
