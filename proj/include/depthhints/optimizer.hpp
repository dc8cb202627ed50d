#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "depthhints/core.hpp"
#include "depthhints/losses.hpp"
#include "depthhints/photometric.hpp"

namespace depthhints::optimizer {

struct FlatInit {
  double value = 0.0;
};
struct MapInit {
  DisparityMap map;
};
/// Per-pixel uniform draw in [lo, hi], row-major from Rng(seed).
struct RandomInit {
  double lo = 0.0;
  double hi = 1.0;
  std::uint64_t seed = 0;
};
using Init = std::variant<FlatInit, MapInit, RandomInit>;

struct OptimizeConfig {
  int iterations = 500;
  /// Disparity pixels moved per unit gradient.
  double step_size = 0.05;
  bool use_hints = false;
  double alpha = kDefaultAlpha;
  int record_every = 10;
  Init init = FlatInit{};
  /// Upper clamp of the disparity; <= 0 means 0.3 * image width.
  double d_max = 0.0;
  /// Warp direction (-1: left reference sampled from the right image).
  int direction = -1;

  void validate() const;
};

struct Snapshot {
  int iteration = 0;
  DisparityMap disp;
  /// Mean of the optimised objective over finite pixels.
  double mean_loss = 0.0;
  /// Hint usage fraction; 0 without hints.
  double hint_fraction = 0.0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  DisparityMap final;
};

/// d l_r(d_i) / d d_i for every pixel, holding the other pixels' disparities
/// fixed. Out-of-bounds and invalid pixels get 0.
Grid<double> photometric_gradient(const Image& ref, const Image& other, const DisparityMap& disp,
                                  double alpha = kDefaultAlpha, int direction = -1);

/// Gradient of the hint-gated objective. The gate is recomputed at `disp`
/// unless `frozen_gate` is given.
Grid<double> gated_gradient(const Image& ref, const Image& other, const DisparityMap& disp, const DisparityMap& hint,
                            double alpha = kDefaultAlpha, int direction = -1, const Mask* frozen_gate = nullptr);

/// Fixed-step gradient descent on the per-pixel disparity field, clamped to
/// [0, d_max] after every step.
Trajectory optimize(const Image& ref, const Image& other, const OptimizeConfig& cfg,
                    const DisparityMap* hint = nullptr);

struct CurvePoint {
  double disparity;
  double loss;
};

/// DSSIM+L1 at one pixel for `steps` evenly spaced disparities in
/// [0, d_max], the whole 3x3 window shifted by the trial disparity.
std::vector<CurvePoint> cost_curve(const Image& ref, const Image& other, int x, int y, double d_max, int steps,
                                   double alpha = kDefaultAlpha, int direction = -1);

}  // namespace depthhints::optimizer
