#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depthhints/core.hpp"

namespace depthhints::io {

/// Procedural surface texture. Every surface gets its own pattern derived
/// from the seed and the surface index.
struct Texture {
  enum class Kind { noise, gradient, stripes };
  Kind kind = Kind::noise;
  std::uint64_t seed = 1;
  /// Peak-to-peak intensity range around 0.5, in [0,1].
  double amplitude = 0.8;
  /// Stripe period in pixels (stripes only).
  double period = 8.0;
  /// Amplitude of additive value noise on top of the pattern. Breaks the
  /// exact periodicity of stripes so matching has a unique answer.
  double grain = 0.0;
};

/// Fronto-parallel rectangle at constant disparity, in left-view
/// coordinates.
struct Structure {
  enum class Kind { plane, thin_bar, stripes };
  Kind kind = Kind::plane;
  Rect region;
  double disparity = 0.0;
  /// Stripe period in pixels (stripes only).
  double period = 8.0;
};

/// Desk-scale stereo scene: a background plane plus rectangles in front of
/// it. Larger disparity means nearer; the nearer surface wins.
struct SceneSpec {
  int width = 0;
  int height = 0;
  double background = 0.0;
  std::vector<Structure> structures;
  Texture texture;

  void validate() const;
};

struct SyntheticPair {
  Image left;
  Image right;
  /// Left-reference ground truth, valid everywhere.
  DisparityMap gt_disparity;
  /// Right-reference ground truth, valid everywhere.
  DisparityMap gt_disparity_right;
  /// 1 where the left pixel is also visible in the right view.
  Mask occlusion_mask;
};

/// Renders both views from the scene description (the right view is not a
/// warp of the left one). Deterministic in the spec.
SyntheticPair render_scene(const SceneSpec& spec);

/// Parses the key/value scene format documented in docs/scene_format.md.
SceneSpec parse_scene(const std::string& text);
SceneSpec read_scene(const std::filesystem::path& path);
std::string format_scene(const SceneSpec& spec);

}  // namespace depthhints::io
