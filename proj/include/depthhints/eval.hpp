#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "depthhints/core.hpp"

namespace depthhints::eval {

/// The seven standard depth metrics.
struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;

  std::array<double, 7> values() const { return {abs_rel, sq_rel, rmse, rmse_log, a1, a2, a3}; }
};

/// Column names in reporting order.
inline constexpr std::array<std::string_view, 7> kMetricNames = {"abs_rel", "sq_rel",  "rmse", "rmse_log",
                                                                 "a1",      "a2",      "a3"};

struct EvalConfig {
  double min_depth = 1e-3;
  double max_depth = 80.0;
  /// Evaluation region; none means the whole image.
  std::optional<Rect> crop;
  bool median_scaling = false;

  void validate() const;
};

/// Garg crop: rows [0.40810811 H, 0.99189189 H), cols [0.03594771 W,
/// 0.96405229 W), bounds truncated to integers.
Rect garg_crop(int width, int height);

/// Metrics over pixels valid in both maps, inside the crop, with ground
/// truth in [min_depth, max_depth]. Predictions are optionally median scaled,
/// then clamped to the depth range.
DepthMetrics compute_metrics(const DepthMap& pred, const DepthMap& gt, const EvalConfig& cfg = {});

/// Blends a prediction with the un-flipped prediction made on the mirrored
/// input. The left `ramp` fraction of columns leans on the mirrored
/// prediction, the right one on the original, the rest is the plain average.
/// ramp <= 0 gives the plain average everywhere.
DisparityMap flip_postprocess(const DisparityMap& d, const DisparityMap& d_flipped, double ramp = 0.05);

}  // namespace depthhints::eval
