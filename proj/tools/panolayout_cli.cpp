// Command-line front end: every pipeline stage as a subcommand, plus synthetic scenes and the
// benchmark harness. Exit codes: 0 success, 1 usage, 2 stage failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "panolayout/bench.hpp"
#include "panolayout/corners.hpp"
#include "panolayout/evaluation.hpp"
#include "panolayout/geometry.hpp"
#include "panolayout/hypotheses.hpp"
#include "panolayout/io.hpp"
#include "panolayout/pipeline.hpp"
#include "panolayout/structural.hpp"
#include "panolayout/synthetic.hpp"

using namespace panolayout;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;

  PipelineConfig load() const {
    PipelineConfig cfg;
    if (!config.empty()) {
      const fs::path p(config);
      cfg = config_from_json(read_json(p), p.parent_path());
    }
    if (seed) cfg.apply_seed(*seed);
    cfg.validate();
    return cfg;
  }
};

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

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "pipeline configuration JSON")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "global seed (overrides the config)");
}

VanishingBasis basis_of(const Json& doc) { return basis_from_json(doc.at("basis")); }

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Indoor layout recovery from a single equirectangular panorama"};
  app.require_subcommand(1);
  Common common;

  // lines
  auto* lines_cmd = app.add_subcommand("lines", "detect Manhattan lines and the vanishing basis");
  std::string pano_path, edge_path, out_path, overlay_path;
  add_common(lines_cmd, common);
  lines_cmd->add_option("--panorama", pano_path, "equirectangular image (2:1)")->required()->check(CLI::ExistingFile);
  lines_cmd->add_option("--edge-map", edge_path, "edge probability PNG; keeps structural lines only")->check(CLI::ExistingFile);
  lines_cmd->add_option("-o,--output", out_path, "lines JSON")->required();
  lines_cmd->add_option("--overlay", overlay_path, "PNG with the lines drawn over the panorama");

  // corners
  auto* corners_cmd = app.add_subcommand("corners", "intersect lines into classified corner candidates");
  std::string in_path;
  add_common(corners_cmd, common);
  corners_cmd->add_option("--lines", in_path, "lines JSON")->required()->check(CLI::ExistingFile);
  corners_cmd->add_option("-o,--output", out_path, "corners JSON")->required();

  // hypotheses
  auto* hyp_cmd = app.add_subcommand("hypotheses", "generate layout hypotheses from corners");
  std::optional<int> n_h;
  add_common(hyp_cmd, common);
  hyp_cmd->add_option("--corners", in_path, "corners JSON")->required()->check(CLI::ExistingFile);
  hyp_cmd->add_option("--n-h", n_h, "number of hypotheses");
  hyp_cmd->add_option("-o,--output", out_path, "hypotheses JSON")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "score hypotheses against a reference map and pick the best");
  std::string normals_path, ref_path, gt_path, labels_path, layout_stem;
  add_common(eval_cmd, common);
  eval_cmd->add_option("--hypotheses", in_path, "hypotheses JSON")->required()->check(CLI::ExistingFile);
  auto* eval_normals = eval_cmd->add_option("--normals", normals_path, "normal map PNG")->check(CLI::ExistingFile);
  auto* eval_ref = eval_cmd->add_option("--ref", ref_path, "reference label PNG")->check(CLI::ExistingFile);
  eval_normals->excludes(eval_ref);
  eval_cmd->add_option("--gt", gt_path, "ground-truth label PNG")->check(CLI::ExistingFile);
  eval_cmd->add_option("-o,--output", out_path, "report JSON");
  eval_cmd->add_option("--labels", labels_path, "label PNG of the selected layout");
  eval_cmd->add_option("--layout", layout_stem, "write <stem>.json and <stem>.obj for the selected layout");

  // export
  auto* export_cmd = app.add_subcommand("export", "write a layout as JSON and OBJ");
  int index = 0;
  export_cmd->add_option("--hypotheses", in_path, "hypotheses or layout JSON")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--index", index, "hypothesis index")->check(CLI::NonNegativeNumber);
  export_cmd->add_option("-o,--output", out_path, "output stem (writes .json and .obj)")->required();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "render a synthetic room into a scene directory");
  int walls = 4, clutter = 0, width = 1024, supersample = 3;
  double flip = 0.05, max_yaw = 40.0, max_tilt = 0.0;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("-o,--output", out_path, "scene directory")->required();
  synth_cmd->add_option("--walls", walls, "wall count")->check(CLI::IsMember({4, 6, 8}));
  synth_cmd->add_option("--clutter", clutter, "clutter rectangles")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--width", width, "panorama width (height is half)")->check(CLI::Range(16, 8192));
  synth_cmd->add_option("--supersample", supersample, "rays per pixel side")->check(CLI::Range(1, 8));
  synth_cmd->add_option("--flip-rate", flip, "normal-map label noise")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--max-yaw", max_yaw, "degrees");
  synth_cmd->add_option("--max-tilt", max_tilt, "degrees");
  synth_cmd->add_option("--seed", synth_seed, "scene seed");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "median EOP over repeated seeded runs");
  std::vector<std::string> data_dirs;
  int scene_count = 20, repeats = 10;
  std::vector<int> n_h_values{100};
  std::vector<std::string> mode_names{"G+DL"};
  std::string csv_path, json_path;
  add_common(bench_cmd, common);
  bench_cmd->add_option("--data", data_dirs, "scene directories (default: a synthetic suite)")->check(CLI::ExistingDirectory);
  bench_cmd->add_option("--scenes", scene_count, "synthetic scenes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--clutter", clutter, "clutter rectangles per synthetic scene")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--width", width, "synthetic panorama width")->check(CLI::Range(16, 8192));
  bench_cmd->add_option("--repeats", repeats, "seeded runs per scene")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--n-h", n_h_values, "N_h values to sweep")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--modes", mode_names, "G and/or G+DL")->check(CLI::IsMember({"G", "G+DL"}));
  bench_cmd->add_option("--csv", csv_path, "per-run EOP table");
  bench_cmd->add_option("--json", json_path, "full report");

  // run
  auto* run_cmd = app.add_subcommand("run", "full pipeline from a configuration file");
  std::string output_dir;
  add_common(run_cmd, common);
  run_cmd->add_option("--panorama", pano_path, "overrides the config")->check(CLI::ExistingFile);
  run_cmd->add_option("--edge-map", edge_path, "overrides the config")->check(CLI::ExistingFile);
  run_cmd->add_option("--normals", normals_path, "overrides the config")->check(CLI::ExistingFile);
  run_cmd->add_option("--ref", ref_path, "overrides the config")->check(CLI::ExistingFile);
  run_cmd->add_option("--gt", gt_path, "overrides the config")->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", output_dir, "output directory");
  bool no_edges = false;
  run_cmd->add_flag("--no-edge-map", no_edges, "geometry-only mode");

  // views
  auto* views_cmd = app.add_subcommand("views", "export perspective views and their manifest");
  add_common(views_cmd, common);
  views_cmd->add_option("--panorama", pano_path, "equirectangular image")->required()->check(CLI::ExistingFile);
  views_cmd->add_option("-o,--output", output_dir, "view directory")->required();

  // stitch
  auto* stitch_cmd = app.add_subcommand("stitch", "merge per-view maps back into panoramas");
  std::string manifest_path, edges_out, normals_out;
  int rows = 512;
  stitch_cmd->add_option("--manifest", manifest_path, "manifest JSON from `views`")->required()->check(CLI::ExistingFile);
  stitch_cmd->add_option("--rows", rows, "output height (width is twice)")->check(CLI::Range(8, 8192));
  stitch_cmd->add_option("--edges", edges_out, "stitched edge-map PNG");
  stitch_cmd->add_option("--normals", normals_out, "stitched normal-map PNG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*lines_cmd) {
      const PipelineConfig cfg = stage("config", [&] { return common.load(); });
      const Image pano = stage("input", [&] { return read_image(pano_path); });
      const FrontEnd front = run_front_end(pano, cfg);
      std::vector<GreatCircleSegment> kept = front.detection.classified;
      if (!edge_path.empty()) {
        kept = stage("filter", [&] {
          const ProbabilityMap m = threshold_probability(read_probability_png(edge_path), cfg.filter.tau);
          return filter_structural_lines(kept, m, cfg.filter.score_fraction);
        });
      }
      stage("export", [&] {
        write_json(out_path, lines_document(front.detection.basis, kept));
        if (!overlay_path.empty()) write_image(overlay_path, draw_overlay(pano, kept));
        return 0;
      });
      std::printf("%zu classified lines, %zu kept\n", front.detection.classified.size(), kept.size());
    } else if (*corners_cmd) {
      const PipelineConfig cfg = stage("config", [&] { return common.load(); });
      const Json doc = stage("input", [&] { return read_json(in_path); });
      const auto [basis, lines] = stage("input", [&] {
        std::vector<GreatCircleSegment> ls;
        for (const Json& l : doc.at("lines")) ls.push_back(segment_from_json(l));
        return std::pair(basis_of(doc), ls);
      });
      const auto corners = stage("corners", [&] { return extract_corner_candidates(lines, basis, cfg.corners); });
      stage("export", [&] {
        write_json(out_path, corners_document(basis, corners));
        return 0;
      });
      std::printf("%zu corner candidates\n", corners.size());
    } else if (*hyp_cmd) {
      PipelineConfig cfg = stage("config", [&] {
        PipelineConfig c = common.load();
        if (n_h) c.hypotheses.n_h = *n_h;
        c.validate();
        return c;
      });
      const Json doc = stage("input", [&] { return read_json(in_path); });
      std::vector<CornerCandidate> corners;
      const VanishingBasis basis = stage("input", [&] {
        for (const Json& c : doc.at("corners")) corners.push_back(corner_from_json(c));
        return basis_of(doc);
      });
      const HypothesisSet set = stage("hypotheses", [&] { return generate_hypotheses(corners, cfg.hypotheses); });
      stage("export", [&] {
        write_json(out_path, hypotheses_document(basis, set.layouts));
        return 0;
      });
      std::printf("%zu hypotheses from %d attempts\n", set.layouts.size(), set.attempts);
    } else if (*eval_cmd) {
      const PipelineConfig cfg = stage("config", [&] {
        if (normals_path.empty() && ref_path.empty()) throw std::invalid_argument("--normals or --ref is required");
        return common.load();
      });
      const Json doc = stage("input", [&] { return read_json(in_path); });
      std::vector<LayoutModel> hyps;
      const VanishingBasis basis = stage("input", [&] {
        for (const Json& h : doc.at("hypotheses")) hyps.push_back(layout_from_json(h));
        return basis_of(doc);
      });
      const LabeledImage reference = stage("reference", [&] {
        if (!normals_path.empty()) return reference_from_normals(read_normal_png(normals_path), basis, cfg);
        return read_label_png(ref_path);
      });
      std::optional<LabeledImage> gt;
      if (!gt_path.empty()) gt = stage("input", [&] { return read_label_png(gt_path); });
      const Scored s = stage("evaluate", [&] { return score_hypotheses(hyps, basis, reference, gt ? &*gt : nullptr, cfg); });
      const LayoutModel& best = hyps.at(s.index);
      stage("export", [&] {
        Json rep = {{"format_version", kFormatVersion},
                    {"kind", "evaluation"},
                    {"best_index", s.index},
                    {"reference_eop", s.reference_eop},
                    {"layout", to_json(best)}};
        if (s.gt_eop) rep["gt_eop"] = *s.gt_eop;
        if (!out_path.empty()) write_json(out_path, rep);
        if (!labels_path.empty()) {
          write_label_png(labels_path, render_labels(best, make_ray_grid(reference.dims(), basis.R.matrix().transpose())));
        }
        if (!layout_stem.empty()) export_model(best, layout_stem);
        return 0;
      });
      std::printf("best %d, reference EOP %.4f", s.index, s.reference_eop);
      if (s.gt_eop) std::printf(", GT EOP %.4f", *s.gt_eop);
      std::printf("\n");
    } else if (*export_cmd) {
      const Json doc = stage("input", [&] { return read_json(in_path); });
      const LayoutModel l = stage("input", [&] {
        if (doc.contains("hypotheses")) return layout_from_json(doc.at("hypotheses").at(index));
        if (doc.contains("layout")) return layout_from_json(doc.at("layout"));
        return layout_from_json(doc);
      });
      stage("export", [&] {
        if (auto v = validate_layout(l); !v) throw std::invalid_argument("invalid layout: " + v.reason);
        export_model(l, out_path);
        return 0;
      });
      std::printf("%d walls written to %s.{json,obj}\n", l.wall_count(), out_path.c_str());
    } else if (*synth_cmd) {
      stage("synth", [&] {
        SceneOptions opts;
        opts.wall_counts = {walls};
        opts.clutter_rects = clutter;
        opts.flip_rate = flip;
        opts.max_yaw_deg = max_yaw;
        opts.max_tilt_deg = max_tilt;
        const Scene scene = generate_scene(sample_scene_spec(opts, synth_seed));
        SyntheticMaps maps;
        maps.dims = {width / 2, width / 2 * 2};
        maps.supersample = supersample;
        const BenchScene b = make_bench_scene(scene, maps, fs::path(out_path).filename().string());
        write_scene_dir(out_path, scene, b);
        return 0;
      });
      std::printf("scene written to %s\n", out_path.c_str());
    } else if (*bench_cmd) {
      const PipelineConfig base = stage("config", [&] { return common.load(); });
      std::vector<BenchScene> scenes;
      stage("input", [&] {
        if (!data_dirs.empty()) {
          for (const auto& d : data_dirs) scenes.push_back(read_scene_dir(d));
          return 0;
        }
        SyntheticMaps maps;
        maps.dims = {width / 2, width / 2 * 2};
        for (int i = 0; i < scene_count; ++i) {
          SceneOptions opts;
          opts.wall_counts = {std::vector<int>{4, 6, 8}[i % 3]};
          opts.clutter_rects = clutter;
          const Scene s = generate_scene(sample_scene_spec(opts, derive_seed(base.seed, 1000 + i)));
          char id[32];
          std::snprintf(id, sizeof id, "synth_%03d", i);
          scenes.push_back(make_bench_scene(s, maps, id));
        }
        return 0;
      });
      BenchOptions opts;
      opts.repeats = repeats;
      opts.n_h_values = n_h_values;
      opts.modes.clear();
      for (const auto& m : mode_names) opts.modes.push_back(m == "G" ? BenchMode::Geometry : BenchMode::GeometryEdges);
      const BenchReport rep = stage("bench", [&] { return bench(scenes, base, opts); });
      stage("export", [&] {
        if (!csv_path.empty()) write_text(csv_path, rep.to_csv());
        if (!json_path.empty()) write_json(json_path, rep.to_json());
        return 0;
      });
      std::printf("%-5s %5s %8s %8s %8s\n", "mode", "N_h", "median", "mean", "sd");
      for (const auto& s : rep.summaries) {
        std::printf("%-5s %5d %8.4f %8.4f %8.4f\n", to_string(s.mode), s.n_h, s.median, s.mean, s.stddev);
      }
      int failed = 0;
      for (const auto& r : rep.records) failed += r.failures;
      if (failed > 0) std::printf("%d failed runs scored as EOP 0\n", failed);
      std::printf("%.2f s per scene\n", rep.mean_scene_seconds);
    } else if (*run_cmd) {
      const PipelineConfig cfg = stage("config", [&] {
        PipelineConfig c = common.load();
        if (!pano_path.empty()) c.panorama = pano_path;
        if (!edge_path.empty()) c.edge_map = edge_path;
        if (!normals_path.empty()) c.normal_map = normals_path;
        if (!ref_path.empty()) c.reference_labels = ref_path;
        if (!gt_path.empty()) c.gt_labels = gt_path;
        if (!output_dir.empty()) c.output_dir = output_dir;
        if (no_edges) c.use_edge_map = false;
        return c;
      });
      const PipelineResult r = run_pipeline(cfg);
      std::printf("%zu lines, %zu structural, %zu corners, %zu hypotheses; best has %d walls, reference EOP %.4f",
                  r.lines.size(), r.structural.size(), r.corners.size(), r.hypotheses.layouts.size(),
                  r.best.wall_count(), r.reference_eop);
      if (r.gt_eop) std::printf(", GT EOP %.4f", *r.gt_eop);
      std::printf("\n");
    } else if (*views_cmd) {
      const PipelineConfig cfg = stage("config", [&] { return common.load(); });
      const Image pano = stage("input", [&] { return read_image(pano_path); });
      const ViewManifest m = stage("export", [&] {
        return export_views(pano, spiral_views(cfg.view_count, cfg.view_fov_deg, cfg.view_resolution), output_dir);
      });
      std::printf("%zu views written to %s\n", m.views.size(), output_dir.c_str());
    } else if (*stitch_cmd) {
      stage("stitch", [&] {
        if (edges_out.empty() && normals_out.empty()) throw std::invalid_argument("--edges or --normals is required");
        const Dims dims{rows, 2 * rows};
        if (!edges_out.empty()) write_probability_png(edges_out, stitch_edge_maps(manifest_path, dims));
        if (!normals_out.empty()) write_normal_png(normals_out, stitch_normal_maps(manifest_path, dims));
        return 0;
      });
    }
  } catch (const StageError& e) {
    std::fprintf(stderr, "error %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [internal] %s\n", e.what());
    return 2;
  }
  return 0;
}
