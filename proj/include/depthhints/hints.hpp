#pragma once

#include <optional>
#include <vector>

#include "depthhints/core.hpp"
#include "depthhints/photometric.hpp"
#include "depthhints/sgm.hpp"

namespace depthhints::hints {

/// Block sizes and disparity counts spanning the hint hyperparameter grid.
struct GridAxes {
  std::vector<int> block_sizes{3, 5, 9};
  std::vector<int> disparity_counts{64, 96, 128, 160};
};

/// Cross product of the axes, block size major. 12 entries by default.
std::vector<sgm::SgmParams> param_grid(const GridAxes& axes = {});

/// Uniform draw from `grid` ("Random SGM").
sgm::SgmParams random_params(Rng& rng, const std::vector<sgm::SgmParams>& grid);
sgm::SgmParams random_params(Rng& rng);

struct HintCandidateSet {
  std::vector<DisparityMap> candidates;
  std::vector<sgm::SgmParams> params;

  void validate() const;
};

/// Runs one SGM match per configuration, optionally with the left-right
/// check ("Random SGM LR").
HintCandidateSet generate_candidates(const Image& left, const Image& right, const std::vector<sgm::SgmParams>& grid,
                                     bool with_lr);

struct FusedHint {
  DisparityMap disp;
  /// Index of the winning candidate; -1 for holes.
  Grid<int> source_index;
  /// Photometric loss of the winning candidate; +infinity for holes.
  LossField score;
};

/// Per pixel, keeps the candidate disparity with the lowest finite
/// DSSIM+L1 score (ties to the lowest index). Scores warp `right` into the
/// left view with the given direction.
FusedHint fuse(const HintCandidateSet& candidates, const Image& left, const Image& right,
               double alpha = kDefaultAlpha, int direction = -1);

/// Fusion from precomputed per-candidate loss fields.
FusedHint fuse_scored(const HintCandidateSet& candidates, const std::vector<LossField>& scores);

}  // namespace depthhints::hints
