#include "panolayout/pipeline.hpp"

#include <chrono>
#include <stdexcept>

#include "panolayout/evaluation.hpp"

namespace panolayout {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::string path_str(const fs::path& p) { return p.empty() ? std::string() : p.string(); }

fs::path resolve(const Json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j.at(key).get<std::string>().empty()) return {};
  fs::path p = j.at(key).get<std::string>();
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  lines.seed = s;
  hypotheses.seed = s;
}

void PipelineConfig::validate() const {
  if (!(filter.tau >= 0.0 && filter.tau <= 1.0)) throw std::invalid_argument("filter.tau must be in [0, 1]");
  if (!(filter.score_fraction >= 0.0 && filter.score_fraction <= 1.0)) {
    throw std::invalid_argument("filter.score_fraction must be in [0, 1]");
  }
  if (!(lines.theta_th_deg > 0.0 && lines.theta_th_deg < 10.0)) throw std::invalid_argument("lines.theta_th_deg must be in (0, 10)");
  if (!(lines.canny_low > 0.0 && lines.canny_low <= lines.canny_high && lines.canny_high <= 1.0)) {
    throw std::invalid_argument("canny thresholds must satisfy 0 < low <= high <= 1");
  }
  if (corners.gap_tolerance_deg <= 0.0 || corners.merge_deg < 0.0) throw std::invalid_argument("invalid corner tolerances");
  hypotheses.validate();
  if (eval_dims.rows <= 0 || eval_dims.cols != 2 * eval_dims.rows) throw std::invalid_argument("eval_dims must be M x 2M");
  if (view_count < 1 || view_resolution < 8 || !(view_fov_deg > 0.0 && view_fov_deg < 180.0)) {
    throw std::invalid_argument("invalid view settings");
  }
}

Json to_json(const PipelineConfig& c) {
  return {
      {"format_version", kFormatVersion},
      {"seed", c.seed},
      {"lines",
       {{"theta_th_deg", c.lines.theta_th_deg},
        {"canny_sigma", c.lines.canny_sigma},
        {"canny_low", c.lines.canny_low},
        {"canny_high", c.lines.canny_high},
        {"min_group_size", c.lines.min_group_size},
        {"reference_width", c.lines.reference_width},
        {"ransac_confidence", c.lines.ransac_confidence},
        {"ransac_max_iterations", c.lines.ransac_max_iterations},
        {"min_inlier_ratio", c.lines.min_inlier_ratio},
        {"vp_iterations", c.lines.vp_iterations},
        {"vp_orthogonality_deg", c.lines.vp_orthogonality_deg}}},
      {"filter",
       {{"tau", c.filter.tau}, {"score_fraction", c.filter.score_fraction}, {"label_angle_tol_deg", c.filter.label_angle_tol_deg}}},
      {"corners",
       {{"gap_tolerance_deg", c.corners.gap_tolerance_deg},
        {"overshoot_deg", c.corners.overshoot_deg},
        {"merge_deg", c.corners.merge_deg}}},
      {"hypotheses",
       {{"n_h", c.hypotheses.n_h},
        {"group_sizes", c.hypotheses.group_sizes},
        {"manhattan_tol_deg", c.hypotheses.manhattan_tol_deg},
        {"azimuth_cluster_deg", c.hypotheses.azimuth_cluster_deg},
        {"attempts_per_hypothesis", c.hypotheses.attempts_per_hypothesis}}},
      {"evaluation",
       {{"rows", c.eval_dims.rows}, {"cols", c.eval_dims.cols}, {"full_resolution", c.full_resolution_eval}}},
      {"use_edge_map", c.use_edge_map},
      {"views", {{"count", c.view_count}, {"fov_deg", c.view_fov_deg}, {"resolution", c.view_resolution}}},
      {"inputs",
       {{"panorama", path_str(c.panorama)},
        {"edge_map", path_str(c.edge_map)},
        {"normal_map", path_str(c.normal_map)},
        {"reference_labels", path_str(c.reference_labels)},
        {"gt_labels", path_str(c.gt_labels)}}},
      {"output_dir", path_str(c.output_dir)},
  };
}

PipelineConfig config_from_json(const Json& j, const fs::path& base) {
  PipelineConfig c;
  auto get = [](const Json& obj, const char* key, auto& dst) {
    if (obj.contains(key)) dst = obj.at(key).get<std::decay_t<decltype(dst)>>();
  };
  if (j.contains("lines")) {
    const Json& l = j.at("lines");
    get(l, "theta_th_deg", c.lines.theta_th_deg);
    get(l, "canny_sigma", c.lines.canny_sigma);
    get(l, "canny_low", c.lines.canny_low);
    get(l, "canny_high", c.lines.canny_high);
    get(l, "min_group_size", c.lines.min_group_size);
    get(l, "reference_width", c.lines.reference_width);
    get(l, "ransac_confidence", c.lines.ransac_confidence);
    get(l, "ransac_max_iterations", c.lines.ransac_max_iterations);
    get(l, "min_inlier_ratio", c.lines.min_inlier_ratio);
    get(l, "vp_iterations", c.lines.vp_iterations);
    get(l, "vp_orthogonality_deg", c.lines.vp_orthogonality_deg);
  }
  if (j.contains("filter")) {
    const Json& f = j.at("filter");
    get(f, "tau", c.filter.tau);
    get(f, "score_fraction", c.filter.score_fraction);
    get(f, "label_angle_tol_deg", c.filter.label_angle_tol_deg);
  }
  if (j.contains("corners")) {
    const Json& k = j.at("corners");
    get(k, "gap_tolerance_deg", c.corners.gap_tolerance_deg);
    get(k, "overshoot_deg", c.corners.overshoot_deg);
    get(k, "merge_deg", c.corners.merge_deg);
  }
  if (j.contains("hypotheses")) {
    const Json& h = j.at("hypotheses");
    get(h, "n_h", c.hypotheses.n_h);
    get(h, "group_sizes", c.hypotheses.group_sizes);
    get(h, "manhattan_tol_deg", c.hypotheses.manhattan_tol_deg);
    get(h, "azimuth_cluster_deg", c.hypotheses.azimuth_cluster_deg);
    get(h, "attempts_per_hypothesis", c.hypotheses.attempts_per_hypothesis);
  }
  if (j.contains("evaluation")) {
    const Json& e = j.at("evaluation");
    get(e, "rows", c.eval_dims.rows);
    get(e, "cols", c.eval_dims.cols);
    get(e, "full_resolution", c.full_resolution_eval);
  }
  get(j, "use_edge_map", c.use_edge_map);
  if (j.contains("views")) {
    const Json& v = j.at("views");
    get(v, "count", c.view_count);
    get(v, "fov_deg", c.view_fov_deg);
    get(v, "resolution", c.view_resolution);
  }
  if (j.contains("inputs")) {
    const Json& in = j.at("inputs");
    c.panorama = resolve(in, "panorama", base);
    c.edge_map = resolve(in, "edge_map", base);
    c.normal_map = resolve(in, "normal_map", base);
    c.reference_labels = resolve(in, "reference_labels", base);
    c.gt_labels = resolve(in, "gt_labels", base);
  }
  c.output_dir = resolve(j, "output_dir", base);
  std::uint64_t seed = 0;
  get(j, "seed", seed);
  c.apply_seed(seed);
  c.validate();
  return c;
}

FrontEnd run_front_end(const Image& panorama, const PipelineConfig& cfg) {
  FrontEnd f;
  const auto t0 = Clock::now();
  f.detection = stage("lines", [&] { return detect_lines(panorama, cfg.lines); });
  f.lines_ms = ms_since(t0);
  return f;
}

LabeledImage reference_from_normals(const NormalMap& normals, const VanishingBasis& basis, const PipelineConfig& cfg) {
  return label_normals(normals, basis, cfg.filter.label_angle_tol_deg);
}

namespace {

LabeledImage eval_reference(const LabeledImage& reference, const PipelineConfig& cfg) {
  return cfg.full_resolution_eval || reference.dims() == cfg.eval_dims ? reference
                                                                       : resample_labels(reference, cfg.eval_dims);
}

}  // namespace

std::vector<double> reference_scores(std::span<const LayoutModel> hyps, const VanishingBasis& basis,
                                     const LabeledImage& reference, const PipelineConfig& cfg) {
  const LabeledImage ref = eval_reference(reference, cfg);
  const RayGrid grid = make_ray_grid(ref.dims(), basis.R.matrix().transpose());
  std::vector<double> out;
  out.reserve(hyps.size());
  for (const auto& h : hyps) out.push_back(eop(render_labels(h, grid), ref));
  return out;
}

Scored score_hypotheses(std::span<const LayoutModel> hyps, const VanishingBasis& basis, const LabeledImage& reference,
                        const LabeledImage* gt, const PipelineConfig& cfg) {
  const Mat3 to_layout = basis.R.matrix().transpose();
  const LabeledImage ref = eval_reference(reference, cfg);
  const Selection sel = select_best(hyps, ref, to_layout);
  Scored s{sel.index, sel.score, std::nullopt};
  if (gt) s.gt_eop = eop(render_labels(hyps[sel.index], make_ray_grid(gt->dims(), to_layout)), *gt);
  return s;
}

PipelineResult run_back_end(const FrontEnd& front, const ProbabilityMap* edge_map, const LabeledImage& reference,
                            const LabeledImage* gt, const PipelineConfig& cfg, bool select) {
  PipelineResult r;
  r.basis = front.detection.basis;
  r.lines = front.detection.classified;
  r.times.lines_ms = front.lines_ms;

  auto t0 = Clock::now();
  if (edge_map && cfg.use_edge_map) {
    r.structural = stage("filter", [&] {
      const ProbabilityMap m = threshold_probability(*edge_map, cfg.filter.tau);
      return filter_structural_lines(r.lines, m, cfg.filter.score_fraction);
    });
  } else {
    r.structural = r.lines;
    r.filtering_skipped = true;
  }
  r.times.filter_ms = ms_since(t0);

  t0 = Clock::now();
  r.corners = stage("corners", [&] { return extract_corner_candidates(r.structural, r.basis, cfg.corners); });
  r.times.corners_ms = ms_since(t0);

  t0 = Clock::now();
  r.hypotheses = stage("hypotheses", [&] { return generate_hypotheses(r.corners, cfg.hypotheses); });
  r.times.hypotheses_ms = ms_since(t0);
  if (!select) return r;

  t0 = Clock::now();
  const Scored s = stage("evaluate", [&] { return score_hypotheses(r.hypotheses.layouts, r.basis, reference, gt, cfg); });
  r.best_index = s.index;
  r.reference_eop = s.reference_eop;
  r.gt_eop = s.gt_eop;
  r.best = r.hypotheses.layouts[s.index];
  r.times.evaluation_ms = ms_since(t0);
  return r;
}

Json report_json(const PipelineResult& r) {
  Json j{{"format_version", kFormatVersion},
         {"kind", "report"},
         {"basis", to_json(r.basis)},
         {"line_count", r.lines.size()},
         {"structural_line_count", r.structural.size()},
         {"filtering_skipped", r.filtering_skipped},
         {"corner_count", r.corners.size()},
         {"hypothesis_count", r.hypotheses.layouts.size()},
         {"hypothesis_attempts", r.hypotheses.attempts},
         {"best_index", r.best_index},
         {"reference_eop", r.reference_eop},
         {"best", to_json(r.best)}};
  j["gt_eop"] = r.gt_eop ? Json(*r.gt_eop) : Json(nullptr);
  // Timings are informational and vary between runs, so they go into a separate file.
  return j;
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  stage("config", [&] {
    cfg.validate();
    if (cfg.panorama.empty()) throw std::invalid_argument("no panorama given");
    if (cfg.normal_map.empty() && cfg.reference_labels.empty()) {
      throw std::invalid_argument("a normal map or a reference label map is required");
    }
    return 0;
  });
  const Image pano = stage("input", [&] { return read_image(cfg.panorama); });
  std::optional<ProbabilityMap> edge;
  if (!cfg.edge_map.empty() && cfg.use_edge_map) edge = stage("input", [&] { return read_probability_png(cfg.edge_map); });
  std::optional<LabeledImage> gt;
  if (!cfg.gt_labels.empty()) gt = stage("input", [&] { return read_label_png(cfg.gt_labels); });

  const FrontEnd front = run_front_end(pano, cfg);
  const LabeledImage reference = stage("reference", [&] {
    if (!cfg.normal_map.empty()) return reference_from_normals(read_normal_png(cfg.normal_map), front.detection.basis, cfg);
    return read_label_png(cfg.reference_labels);
  });
  PipelineResult r = run_back_end(front, edge ? &*edge : nullptr, reference, gt ? &*gt : nullptr, cfg);

  if (!cfg.output_dir.empty()) {
    stage("export", [&] {
      const fs::path& out = cfg.output_dir;
      fs::create_directories(out);
      write_json(out / "lines.json", lines_document(r.basis, r.structural));
      write_json(out / "corners.json", corners_document(r.basis, r.corners));
      write_json(out / "hypotheses.json", hypotheses_document(r.basis, r.hypotheses.layouts));
      export_model(r.best, out / "layout");
      write_label_png(out / "labels.png",
                      render_labels(r.best, make_ray_grid(pano.dims(), r.basis.R.matrix().transpose())));
      write_json(out / "report.json", report_json(r));
      write_json(out / "timings.json", {{"format_version", kFormatVersion},
                                        {"lines_ms", r.times.lines_ms},
                                        {"filter_ms", r.times.filter_ms},
                                        {"corners_ms", r.times.corners_ms},
                                        {"hypotheses_ms", r.times.hypotheses_ms},
                                        {"evaluation_ms", r.times.evaluation_ms}});
      return 0;
    });
  }
  return r;
}

}  // namespace panolayout
