#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "panolayout/corners.hpp"
#include "panolayout/geometry.hpp"
#include "panolayout/hypotheses.hpp"
#include "panolayout/layout.hpp"
#include "panolayout/lines.hpp"
#include "panolayout/types.hpp"

namespace panolayout {

using Json = nlohmann::json;
namespace fs = std::filesystem;

inline constexpr int kFormatVersion = 1;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// --- rasters ---------------------------------------------------------------
// Images are 8-bit PNG on disk; colour channels are stored in memory as R, G, B.

Image read_image(const fs::path& path);
void write_image(const fs::path& path, const Image& img);

/// Grayscale PNG, value / 255 (or / 65535 for 16-bit files).
ProbabilityMap read_probability_png(const fs::path& path);
void write_probability_png(const fs::path& path, const ProbabilityMap& m);

/// RGB PNG: channel = round((n + 1) / 2 * 255); (0, 0, 0) is nil. Decoded normals are renormalized.
NormalMap read_normal_png(const fs::path& path);
void write_normal_png(const fs::path& path, const NormalMap& m);
/// Channel c maps to (c/255)·2−1; (0,0,0) is nil. Decoded vectors are not renormalized.
std::array<std::uint8_t, 3> encode_normal(const Eigen::Vector3f& n);
Eigen::Vector3f decode_normal(std::array<std::uint8_t, 3> rgb);

/// X = red, Y = green, Z = blue, None = black. A pixel decodes to its strongest channel when
/// that channel is >= 128, otherwise None.
LabeledImage read_label_png(const fs::path& path);
void write_label_png(const fs::path& path, const LabeledImage& m);

/// Panorama with segments coloured by axis and corners marked.
Image draw_overlay(const Image& panorama, std::span<const GreatCircleSegment> segments,
                   std::span<const Vec3> corners = {});

// --- JSON ------------------------------------------------------------------

Json to_json(const VanishingBasis& b);
VanishingBasis basis_from_json(const Json& j);

Json to_json(const GreatCircleSegment& s);
GreatCircleSegment segment_from_json(const Json& j);

Json to_json(const CornerCandidate& c);
CornerCandidate corner_from_json(const Json& j);

Json to_json(const LayoutModel& l);
LayoutModel layout_from_json(const Json& j);

/// {format_version, kind, basis, lines}
Json lines_document(const VanishingBasis& basis, std::span<const GreatCircleSegment> lines);
/// {format_version, kind, basis, corners}
Json corners_document(const VanishingBasis& basis, std::span<const CornerCandidate> corners);
/// {format_version, kind, basis, hypotheses: [{polygon, h, provenance}]}
Json hypotheses_document(const VanishingBasis& basis, std::span<const LayoutModel> layouts);

/// Reads a JSON file and checks its format_version.
Json read_json(const fs::path& path);
/// Pretty-printed with sorted keys, so identical content gives identical bytes.
void write_json(const fs::path& path, const Json& j);

// --- meshes ----------------------------------------------------------------

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;  ///< 0-based, outward-facing
};

/// Closed prism: n ceiling vertices then n floor vertices; one quad per wall plus the ceiling
/// and floor n-gons.
Mesh layout_mesh(const LayoutModel& layout);
void write_obj(const fs::path& path, const Mesh& mesh);
Mesh read_obj(const fs::path& path);

/// Writes <stem>.json and <stem>.obj. Throws std::invalid_argument for an invalid layout and
/// IoError when the files cannot be written.
void export_model(const LayoutModel& layout, const fs::path& stem);

// --- perspective views -----------------------------------------------------

struct ViewEntry {
  std::string id;
  ViewSpec spec;
  std::string image;   ///< input view image, relative to the manifest directory
};

struct ViewManifest {
  std::vector<ViewEntry> views;
  std::string output_dir = "maps";  ///< where per-view maps are expected, relative to the manifest
};

Json to_json(const ViewManifest& m);
ViewManifest manifest_from_json(const Json& j);

/// Renders every view of the panorama to <dir>/<id>.png and writes <dir>/manifest.json.
ViewManifest export_views(const Image& panorama, std::span<const ViewSpec> views, const fs::path& dir);

/// Per-view probability maps at <manifest dir>/<output_dir>/<id>_edges.png, max-stitched.
ProbabilityMap stitch_edge_maps(const fs::path& manifest_path, Dims dims);
/// Per-view normal maps at <manifest dir>/<output_dir>/<id>_normals.png, average-stitched.
NormalMap stitch_normal_maps(const fs::path& manifest_path, Dims dims);

}  // namespace panolayout
