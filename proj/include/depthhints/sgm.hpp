#pragma once

#include <cstdint>
#include <vector>

#include "depthhints/core.hpp"

namespace depthhints::sgm {

/// Hyperparameters of one SGM run.
struct SgmParams {
  /// Odd side of the square window over which census Hamming costs are summed.
  int block_size = 5;
  /// Search range [0, num_disparities); a positive multiple of 16.
  int num_disparities = 64;
  std::uint32_t p1 = 8 * 5 * 5;
  std::uint32_t p2 = 32 * 5 * 5;
  /// Percentage margin the best cost must keep below every non-adjacent
  /// competitor.
  int uniqueness_ratio = 10;
  /// 4 (horizontal + vertical) or 8 (plus diagonals).
  int num_paths = 8;
  /// Odd side of the census comparison window.
  int census_window = 5;

  /// Parameters with penalties scaled by block area: P1 = 8 b^2, P2 = 32 b^2.
  static SgmParams with_defaults(int block_size, int num_disparities);

  void validate() const;

  friend bool operator==(const SgmParams&, const SgmParams&) = default;
};

/// Census bit descriptors, `words` 64-bit words per pixel.
struct CensusImage {
  int width = 0;
  int height = 0;
  int bits = 0;
  int words = 0;
  std::vector<std::uint64_t> data;

  const std::uint64_t* at(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * words;
  }
};

/// Matching cost per pixel and disparity, laid out as ((y * W) + x) * D + d.
struct CostVolume {
  int width = 0;
  int height = 0;
  int num_disparities = 0;
  std::vector<std::uint32_t> cost;

  CostVolume() = default;
  CostVolume(int w, int h, int d)
      : width(w), height(h), num_disparities(d), cost(static_cast<std::size_t>(w) * h * d, 0) {}

  std::uint32_t& at(int x, int y, int d) {
    return cost[(static_cast<std::size_t>(y) * width + x) * num_disparities + d];
  }
  std::uint32_t at(int x, int y, int d) const {
    return cost[(static_cast<std::size_t>(y) * width + x) * num_disparities + d];
  }
  const std::uint32_t* profile(int x, int y) const {
    return cost.data() + (static_cast<std::size_t>(y) * width + x) * num_disparities;
  }
};

/// Census transform of a grayscale image. Bit k (row-major over the window,
/// centre skipped) is set when that neighbour is strictly darker than the
/// centre. Borders replicate edge pixels.
CensusImage census_transform(const Image& img, int window);

/// Block-summed Hamming cost between left(x,y) and right(x-d,y). Positions
/// with x - d < 0 take the maximal cost bits * block_size^2.
CostVolume build_cost_volume(const Image& left, const Image& right, const SgmParams& params);

/// Sum over params.num_paths directions r of
///   L_r(p,d) = C(p,d) + min(L_r(p-r,d), L_r(p-r,d-1) + P1, L_r(p-r,d+1) + P1,
///                           min_k L_r(p-r,k) + P2) - min_k L_r(p-r,k),
/// with L_r = C at the first pixel of every path.
CostVolume aggregate_paths(const CostVolume& vol, const SgmParams& params);

/// Winner-take-all with uniqueness rejection and parabolic sub-pixel
/// refinement.
DisparityMap wta_disparity(const CostVolume& vol, const SgmParams& params);

/// Keeps left pixels whose disparity agrees with the right-reference map at
/// the matched position to within `threshold` pixels.
DisparityMap lr_consistency(const DisparityMap& left_disp, const DisparityMap& right_disp, double threshold);

/// Default left-right agreement threshold (pixels).
inline constexpr double kDefaultLrThreshold = 1.0;

/// Full pipeline on a rectified pair (RGB inputs are converted to
/// luminance). With the left-right check, the right-reference disparity is
/// computed by matching the mirrored pair.
DisparityMap sgm_match(const Image& left, const Image& right, const SgmParams& params, bool with_lr_check = false,
                       double lr_threshold = kDefaultLrThreshold);

}  // namespace depthhints::sgm
