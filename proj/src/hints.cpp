#include "depthhints/hints.hpp"

#include <cmath>
#include <limits>

#include "depthhints/parallel.hpp"

namespace depthhints::hints {

std::vector<sgm::SgmParams> param_grid(const GridAxes& axes) {
  std::vector<sgm::SgmParams> grid;
  grid.reserve(axes.block_sizes.size() * axes.disparity_counts.size());
  for (int block : axes.block_sizes)
    for (int disparities : axes.disparity_counts) grid.push_back(sgm::SgmParams::with_defaults(block, disparities));
  return grid;
}

sgm::SgmParams random_params(Rng& rng, const std::vector<sgm::SgmParams>& grid) {
  if (grid.empty()) throw ValueError("random_params: empty parameter grid");
  return grid[rng.uniform_index(grid.size())];
}

sgm::SgmParams random_params(Rng& rng) { return random_params(rng, param_grid()); }

void HintCandidateSet::validate() const {
  if (candidates.empty()) throw ValueError("hint candidate set is empty");
  if (candidates.size() != params.size()) throw ValueError("hint candidates and parameters differ in count");
  for (const DisparityMap& c : candidates)
    if (!c.disp.same_shape(candidates.front().disp)) throw ValueError("hint candidates differ in size");
}

HintCandidateSet generate_candidates(const Image& left, const Image& right, const std::vector<sgm::SgmParams>& grid,
                                     bool with_lr) {
  HintCandidateSet set;
  set.params = grid;
  set.candidates.resize(grid.size());
  parallel_for(static_cast<int>(grid.size()),
               [&](int i) { set.candidates[i] = sgm::sgm_match(left, right, grid[i], with_lr); });
  return set;
}

FusedHint fuse_scored(const HintCandidateSet& candidates, const std::vector<LossField>& scores) {
  candidates.validate();
  if (scores.size() != candidates.candidates.size()) throw ValueError("fuse: one score field per candidate needed");
  const int w = candidates.candidates.front().width();
  const int h = candidates.candidates.front().height();
  for (const LossField& s : scores)
    if (!s.same_shape(w, h)) throw ValueError("fuse: score field size mismatch");

  FusedHint out{DisparityMap(w, h, 0.0, false), Grid<int>(w, h, -1),
                LossField(w, h, std::numeric_limits<double>::infinity())};
  for (std::size_t i = 0; i < out.score.size(); ++i) {
    for (std::size_t k = 0; k < scores.size(); ++k) {
      const DisparityMap& cand = candidates.candidates[k];
      const double s = scores[k][i];
      if (!cand.valid[i] || !std::isfinite(s)) continue;
      if (s < out.score[i]) {
        out.score[i] = s;
        out.source_index[i] = static_cast<int>(k);
        out.disp.disp[i] = cand.disp[i];
        out.disp.valid[i] = 1;
      }
    }
  }
  return out;
}

FusedHint fuse(const HintCandidateSet& candidates, const Image& left, const Image& right, double alpha,
               int direction) {
  candidates.validate();
  std::vector<LossField> scores(candidates.candidates.size());
  parallel_for(static_cast<int>(scores.size()), [&](int k) {
    scores[k] = photometric_loss_of_disparity(left, right, candidates.candidates[k], direction, alpha);
  });
  return fuse_scored(candidates, scores);
}

}  // namespace depthhints::hints
