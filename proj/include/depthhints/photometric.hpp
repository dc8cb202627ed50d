#pragma once

#include <span>

#include "depthhints/core.hpp"

namespace depthhints {

/// Per-pixel loss; +infinity marks pixels that carry no supervision.
using LossField = Grid<double>;

/// Default DSSIM/L1 mixing weight.
inline constexpr double kDefaultAlpha = 0.85;
/// SSIM stabilizers for intensities in [0,1].
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Reprojection of a source image into the reference view.
struct WarpResult {
  Image image;
  /// 1 where the unclamped sample position lies inside the source.
  Mask in_bounds;
};

/// Samples `source` at (x + direction * disp(x,y), y). For a left-reference
/// pair sampled from the right image, direction is -1. Pixels whose sample
/// leaves [0, W-1], or whose disparity is invalid, are flagged
/// out-of-bounds; their intensities come from border-clamped sampling.
WarpResult warp_disparity(const Image& source, const DisparityMap& disp, int direction);

/// General pinhole reprojection: back-project with K^-1 and depth, move by
/// (R, t), project with K_other, sample bilinearly. Pixels with invalid
/// depth, landing behind the other camera, or outside the source are
/// flagged.
WarpResult warp_pose(const Image& source, const DepthMap& depth, const StereoCalibration& calib);

/// Per-pixel SSIM over a 3x3 box window (edge-replicated), averaged over
/// channels.
Grid<double> ssim_map(const Image& a, const Image& b);

/// alpha * (1 - SSIM) / 2 + (1 - alpha) * mean_c |I - I~|; out-of-bounds
/// pixels get +infinity.
LossField dssim_l1(const Image& reference, const WarpResult& reprojected, double alpha = kDefaultAlpha);

/// Per-pixel minimum over several reprojection losses of the same view.
LossField min_over_views(std::span<const LossField> fields);

/// warp_disparity followed by dssim_l1.
LossField photometric_loss_of_disparity(const Image& ref, const Image& other, const DisparityMap& disp,
                                        int direction = -1, double alpha = kDefaultAlpha);

}  // namespace depthhints
