// Desk-scale acceptance suite on synthetic rooms. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "panolayout/bench.hpp"
#include "panolayout/corners.hpp"
#include "panolayout/evaluation.hpp"
#include "panolayout/geometry.hpp"
#include "panolayout/hypotheses.hpp"
#include "panolayout/lines.hpp"
#include "panolayout/synthetic.hpp"

using namespace panolayout;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kSuiteSeed = 20240601;
constexpr Dims kPanoDims{512, 1024};

struct Outcome {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Suite {
  std::vector<Scene> scenes;
  std::vector<BenchScene> maps;
};

// Scenes cycle through 4, 6 and 8 walls.
Suite make_suite(int count, std::uint64_t tag, const std::function<SceneOptions(int walls)>& options) {
  Suite s;
  const std::array<int, 3> walls{4, 6, 8};
  for (int i = 0; i < count; ++i) {
    const int n = walls[i % 3];
    SceneOptions opts = options(n);
    opts.wall_counts = {n};
    s.scenes.push_back(generate_scene(sample_scene_spec(opts, derive_seed(kSuiteSeed + tag, i))));
    s.maps.push_back(make_bench_scene(s.scenes.back(), SyntheticMaps{}, fmt("%c%02d", static_cast<char>('a' + tag), i)));
  }
  return s;
}

// Three clutter segments per structural one: a room has 3n edges and each rectangle four, so
// (9n+3)/4 rectangles. Rooms that cannot fit that many move on to the next seed.
Suite make_cluttered_suite(int count, std::uint64_t tag) {
  Suite s;
  const std::array<int, 3> walls{4, 6, 8};
  std::uint64_t k = 0;
  for (int i = 0; i < count; ++i) {
    const int n = walls[i % 3];
    const std::size_t want = static_cast<std::size_t>((9 * n + 3) / 4);
    SceneOptions opts;
    opts.wall_counts = {n};
    opts.clutter_rects = static_cast<int>(2 * want);
    SceneSpec spec;
    do {
      spec = sample_scene_spec(opts, derive_seed(kSuiteSeed + tag, k++));
    } while (spec.clutter.size() < want);
    spec.clutter.resize(want);
    s.scenes.push_back(generate_scene(spec));
    s.maps.push_back(make_bench_scene(s.scenes.back(), SyntheticMaps{}, fmt("%c%02d", static_cast<char>('a' + tag), i)));
  }
  return s;
}

// Sign- and permutation-invariant: each true axis is matched to the closest estimated one.
double basis_error_deg(const Mat3& truth, const Mat3& est) {
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    double best = 0.0;
    for (int b = 0; b < 3; ++b) best = std::max(best, std::abs(truth.col(a).dot(est.col(b))));
    worst = std::max(worst, rad2deg(std::acos(std::min(1.0, best))));
  }
  return worst;
}

Outcome line_fit() {
  Rng rng(derive_seed(kSuiteSeed, 1));
  LineConfig cfg;
  const double px_deg = 360.0 / kPanoDims.cols;
  int good = 0;
  double fit_seconds = 0.0;
  double worst = 0.0;
  constexpr int kArcs = 500;
  for (int i = 0; i < kArcs; ++i) {
    const GreatCircleSegment truth = random_arc(rng, 20.0, 120.0);
    const int count = static_cast<int>(std::lround(rad2deg(truth.span()) / px_deg));
    EdgeGroup g;
    g.rays = sample_arc_rays(truth, count, 0.2, rng);
    for (const auto& r : g.rays) g.pixels.push_back(ray_to_index(r, kPanoDims));
    Rng fit_rng(derive_seed(kSuiteSeed, 100 + i));
    const auto t0 = Clock::now();
    const auto fit = fit_great_circle(g, cfg, fit_rng);
    fit_seconds += seconds_since(t0);
    if (!fit) continue;
    const double err = rad2deg(std::acos(std::min(1.0, std::abs(fit->normal.dot(truth.normal)))));
    worst = std::max(worst, err);
    if (err <= 0.5) ++good;
  }
  const double rate = static_cast<double>(good) / kArcs;
  const double ms = 1000.0 * fit_seconds / kArcs;
  return {"line-fit oracle", rate >= 0.99 && ms < 5.0,
          fmt("%d/%d within 0.5 deg (worst %.3f deg), %.3f ms/arc", good, kArcs, worst, ms)};
}

Outcome vp_recovery() {
  int good = 0;
  double worst = 0.0;
  constexpr int kRooms = 50;
  LineConfig cfg;
  for (int i = 0; i < kRooms; ++i) {
    SceneOptions opts;
    opts.max_yaw_deg = 180.0;
    opts.max_tilt_deg = 180.0;
    const Scene scene = generate_scene(sample_scene_spec(opts, derive_seed(kSuiteSeed + 50, i)));
    const Image pano = render_panorama(scene, kPanoDims);
    double err = 180.0;
    try {
      cfg.seed = derive_seed(kSuiteSeed, 5000 + i);
      const LineDetection det = detect_lines(pano, cfg);
      err = basis_error_deg(scene.rotation.matrix(), det.basis.R.matrix());
    } catch (const std::exception&) {
    }
    worst = std::max(worst, err);
    if (err <= 1.0) ++good;
  }
  return {"vanishing-point recovery", good == kRooms, fmt("%d/%d within 1 deg (worst %.3f deg)", good, kRooms, worst)};
}

// Brute force: one-hot channels per label, summed channel products.
double eop_oracle(const LabeledImage& a, const LabeledImage& b) {
  long long hits = 0;
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) {
      for (Label ch : {Label::X, Label::Y, Label::Z}) hits += (a.at(r, c) == ch) * (b.at(r, c) == ch);
    }
  }
  return static_cast<double>(hits) / (static_cast<double>(a.rows()) * a.cols());
}

Outcome eop_equivalence() {
  Rng rng(derive_seed(kSuiteSeed, 3));
  std::uniform_int_distribution<int> lab(0, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long long checked = 0;
  long long mismatched = 0;
  for (int m = 1; m <= 64; ++m) {
    for (int n = 1; n <= 128; ++n) {
      LabeledImage a({m, n});
      LabeledImage b({m, n});
      const double keep = u(rng);  // agreement level varies per size
      for (std::size_t i = 0; i < a.data().size(); ++i) {
        a[i] = static_cast<Label>(lab(rng));
        b[i] = u(rng) < keep ? a[i] : static_cast<Label>(lab(rng));
      }
      ++checked;
      if (eop(a, b) != eop_oracle(a, b)) ++mismatched;
    }
  }
  return {"EOP oracle equivalence", mismatched == 0,
          fmt("%lld image pairs (every size up to 64x128), %lld mismatches", checked, mismatched)};
}

CornerCandidate candidate(const Vec3& p) {
  const UnitVec3 d(p);
  const auto cls = classify_corner(d);
  if (!cls) throw std::logic_error("true corner on a quadrant divider");
  CornerCandidate c;
  c.dir = d;
  c.hemisphere = cls->hemisphere;
  c.quadrant = cls->quadrant;
  c.weight = 1.0;
  return c;
}

// Hypotheses built from the true corner sequence: one corner per vertical edge, taken from the
// ceiling or the floor under every mixed assignment. A random subset of true corners is not
// enough, since a single ceiling/floor join fixes h without any cross-check.
Outcome height_recovery(std::span<const Scene> scenes) {
  long long total = 0;
  long long bad = 0;
  double worst = 0.0;
  HypothesisConfig cfg;
  for (const Scene& s : scenes) {
    const std::vector<Vec3> pts = s.room_corners();  // ceiling then floor
    const int n = s.layout.wall_count();
    const double h_true = s.spec.floor_height;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<CornerCandidate> cands;
      for (int i = 0; i < n; ++i) cands.push_back(candidate(pts[(mask >> i & 1u) ? n + i : i]));
      std::vector<int> group(n);
      for (int i = 0; i < n; ++i) group[i] = i;
      ++total;
      const auto l = build_layout(cands, group, cfg);
      const double rel = l ? std::abs(l->floor_height - h_true) / h_true : 1.0;
      worst = std::max(worst, rel);
      if (!(rel <= 1e-9)) ++bad;
    }
  }
  return {"height recovery", total > 0 && bad == 0,
          fmt("%lld hypotheses from true corners in %zu rooms, %lld off, worst rel. error %.2e", total, scenes.size(),
              bad, worst)};
}

Outcome rasterizer_check(std::span<const Scene> scenes) {
  const Dims dims{256, 512};
  double worst = 1.0;
  int failing = 0;
  for (const Scene& s : scenes) {
    const LabeledImage ours = render_labels(s.layout, make_ray_grid(dims, s.rotation.matrix().transpose()));
    const LabeledImage theirs = analytic_labels(s, dims);
    std::size_t same = 0;
    for (std::size_t i = 0; i < ours.data().size(); ++i) same += ours[i] == theirs[i];
    const double agree = static_cast<double>(same) / ours.data().size();
    worst = std::min(worst, agree);
    if (agree < 0.999) ++failing;
  }
  return {"rasterizer cross-check", failing == 0,
          fmt("%zu scenes, worst agreement %.5f, %d below 0.999", scenes.size(), worst, failing)};
}

struct InvariantAudit {
  long long checked = 0;
  long long invalid = 0;
  void operator()(const HypothesisSet& set) {
    for (const auto& l : set.layouts) {
      ++checked;
      if (!validate_layout(l)) ++invalid;
    }
  }
};

}  // namespace

int main() {
  const auto t_start = Clock::now();
  std::vector<Outcome> out;
  auto report = [&](Outcome o) {
    std::printf("%s  %-26s %s\n", o.pass ? "PASS" : "FAIL", o.name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    out.push_back(std::move(o));
  };

  report(line_fit());
  report(vp_recovery());
  report(eop_equivalence());

  const Suite clean = make_suite(20, 0, [](int) { return SceneOptions{}; });
  const Suite cluttered = make_cluttered_suite(20, 1);

  {
    std::vector<Scene> rooms = clean.scenes;
    SceneOptions extra;
    for (int i = 0; i < 30; ++i) rooms.push_back(generate_scene(sample_scene_spec(extra, derive_seed(kSuiteSeed + 9, i))));
    report(height_recovery(rooms));
  }

  InvariantAudit audit;
  PipelineConfig base;
  base.seed = kSuiteSeed;

  BenchOptions sweep;
  sweep.repeats = 10;
  sweep.n_h_values = {5, 10, 20, 40, 60, 80, 100};
  sweep.modes = {BenchMode::GeometryEdges};
  sweep.on_hypotheses = std::ref(audit);
  const BenchReport clean_report = bench(clean.maps, base, sweep);
  {
    const BenchSummary& s = clean_report.summary(BenchMode::GeometryEdges, 100);
    // Timing reported covers all 10 repeats of the scene, including the N_h sweep bookkeeping.
    report({"end-to-end clean suite", s.median >= 0.98 && clean_report.mean_scene_seconds < 30.0,
            fmt("median EOP %.4f (mean %.4f, sd %.4f) over %d scenes, %.2f s per scene", s.median, s.mean, s.stddev,
                s.scenes, clean_report.mean_scene_seconds)});
  }

  BenchOptions modes;
  modes.repeats = 10;
  modes.n_h_values = {100};
  modes.modes = {BenchMode::Geometry, BenchMode::GeometryEdges};
  modes.on_hypotheses = std::ref(audit);
  const BenchReport clutter_report = bench(cluttered.maps, base, modes);
  {
    const double g = clutter_report.summary(BenchMode::Geometry, 100).median;
    const double gdl = clutter_report.summary(BenchMode::GeometryEdges, 100).median;
    long long before = 0;
    long long after = 0;
    for (const auto& r : clutter_report.records) {
      if (r.mode != BenchMode::GeometryEdges) continue;
      for (int v : r.lines_before) before += v;
      for (int v : r.lines_after) after += v;
    }
    std::size_t structural = 0;
    std::size_t clutter = 0;
    for (const Scene& s : cluttered.scenes) {
      structural += s.structural.size();
      clutter += s.clutter.size();
    }
    const double ratio = before > 0 ? static_cast<double>(after) / before : 1.0;
    report({"filtering benefit", gdl >= g && ratio <= 1.0 / 3.0 && clutter >= 3 * structural,
            fmt("G+DL median %.4f vs G %.4f; lines kept %lld/%lld = %.3f; clutter:structural %zu:%zu", gdl, g, after,
                before, ratio, clutter, structural)});
  }

  {
    std::string detail = "medians";
    bool ok = true;
    double prev = -1.0;
    for (int k : sweep.n_h_values) {
      const double m = clean_report.summary(BenchMode::GeometryEdges, k).median;
      detail += fmt(" %d:%.4f", k, m);
      if (prev >= 0.0 && m < prev - 0.005) ok = false;
      prev = m;
    }
    report({"N_h monotonicity", ok, detail});
  }

  report({"structural invariants", audit.checked >= 10000 && audit.invalid == 0,
          fmt("%lld hypotheses audited, %lld invalid", audit.checked, audit.invalid)});

  {
    std::vector<Scene> all = clean.scenes;
    all.insert(all.end(), cluttered.scenes.begin(), cluttered.scenes.end());
    report(rasterizer_check(all));
  }

  const auto failed = std::count_if(out.begin(), out.end(), [](const Outcome& o) { return !o.pass; });
  std::printf("%zu criteria, %td failed, %.1f s\n", out.size(), failed, seconds_since(t_start));
  return failed == 0 ? 0 : 1;
}
