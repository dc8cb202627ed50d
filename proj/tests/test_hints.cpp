#include <doctest.h>

#include <set>

#include "depthhints/hints.hpp"
#include "support.hpp"

using namespace depthhints;
using namespace depthhints::hints;

TEST_CASE("param_grid") {
  const auto grid = param_grid();
  CHECK(grid.size() == 12);
  std::set<std::pair<int, int>> seen;
  for (const auto& p : grid) {
    CHECK_NOTHROW(p.validate());
    seen.insert({p.block_size, p.num_disparities});
  }
  CHECK(seen.size() == 12);
  CHECK(param_grid({{3}, {64}}).size() == 1);
  CHECK(grid.front().block_size == 3);
  CHECK(grid.back().block_size == 9);
  CHECK(grid.back().num_disparities == 160);
}

TEST_CASE("random_params") {
  const auto grid = param_grid();
  Rng a(17), b(17);
  for (int i = 0; i < 50; ++i) CHECK(random_params(a) == random_params(b));

  Rng rng(123);
  const int n = 10000;
  std::vector<int> counts(grid.size(), 0);
  for (int i = 0; i < n; ++i) {
    const auto p = random_params(rng);
    const auto it = std::find(grid.begin(), grid.end(), p);
    REQUIRE(it != grid.end());
    ++counts[it - grid.begin()];
  }
  const double p = 1.0 / 12.0, sigma = std::sqrt(p * (1 - p) / n);
  for (int c : counts) CHECK(std::abs(c / double(n) - p) <= 3 * sigma);

  CHECK_THROWS_AS(random_params(rng, {}), ValueError);
}

TEST_CASE("generate_candidates") {
  const auto pair = testing::render("stripes");
  const auto grid = param_grid();
  const HintCandidateSet set = generate_candidates(pair.left, pair.right, grid, false);
  CHECK(set.candidates.size() == 12);
  CHECK_NOTHROW(set.validate());

  SUBCASE("order of the grid does not matter") {
    auto reversed = grid;
    std::reverse(reversed.begin(), reversed.end());
    const HintCandidateSet rev = generate_candidates(pair.left, pair.right, reversed, false);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(rev.candidates[grid.size() - 1 - i] == set.candidates[i]);
  }
  SUBCASE("each candidate is a plain sgm_match run") {
    for (std::size_t i : {std::size_t{0}, std::size_t{7}, std::size_t{11}})
      CHECK(set.candidates[i] == sgm::sgm_match(pair.left, pair.right, grid[i]));
  }
}

TEST_CASE("fuse") {
  const auto pair = testing::render("textured");
  const int w = pair.left.width(), h = pair.left.height();

  SUBCASE("single candidate passes through on its support") {
    DisparityMap c = pair.gt_disparity;
    c.valid(10, 10) = 0;
    const FusedHint f = fuse({{c}, {sgm::SgmParams{}}}, pair.left, pair.right);
    const LossField l = photometric_loss_of_disparity(pair.left, pair.right, c);
    for (std::size_t i = 0; i < c.valid.size(); ++i) {
      const bool expect = c.valid[i] && std::isfinite(l[i]);
      CHECK(f.disp.valid[i] == expect);
      if (expect) {
        CHECK(f.disp.disp[i] == c.disp[i]);
        CHECK(f.source_index[i] == 0);
      } else {
        CHECK(f.source_index[i] == -1);
      }
    }
  }
  SUBCASE("exact candidate beats an offset one") {
    DisparityMap off = pair.gt_disparity;
    for (double& v : off.disp.data()) v += 5.0;
    const FusedHint f = fuse({{pair.gt_disparity, off}, {sgm::SgmParams{}, sgm::SgmParams{}}}, pair.left, pair.right);
    const LossField l0 = photometric_loss_of_disparity(pair.left, pair.right, pair.gt_disparity);
    const LossField l1 = photometric_loss_of_disparity(pair.left, pair.right, off);
    int textured = 0, picked = 0;
    for (std::size_t i = 0; i < l0.size(); ++i) {
      if (!pair.occlusion_mask[i] || !f.disp.valid[i]) continue;
      const int want = l1[i] < l0[i] ? 1 : 0;  // scalar argmin, ties to the lower index
      CHECK(f.source_index[i] == want);
      ++textured;
      picked += f.source_index[i] == 0;
    }
    CHECK(picked >= 0.99 * textured);
  }
  SUBCASE("pixel valid only in the second candidate") {
    DisparityMap a = pair.gt_disparity, b = pair.gt_disparity;
    a.valid(100, 60) = 0;
    const FusedHint f = fuse({{a, b}, {sgm::SgmParams{}, sgm::SgmParams{}}}, pair.left, pair.right);
    CHECK(f.source_index(100, 60) == 1);
  }
  SUBCASE("dominance and support over the full grid") {
    const HintCandidateSet set = generate_candidates(pair.left, pair.right, param_grid(), false);
    const FusedHint f = fuse(set, pair.left, pair.right);
    std::vector<LossField> losses;
    for (const auto& c : set.candidates) losses.push_back(photometric_loss_of_disparity(pair.left, pair.right, c));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        bool any = false;
        for (std::size_t k = 0; k < losses.size(); ++k) {
          const bool usable = set.candidates[k].valid(x, y) && std::isfinite(losses[k](x, y));
          any = any || usable;
          if (f.disp.valid(x, y) && usable) REQUIRE(f.score(x, y) <= losses[k](x, y));
        }
        CHECK(f.disp.valid(x, y) == any);
      }
  }
  SUBCASE("permutation changes the source index but not the fused values") {
    const HintCandidateSet set = generate_candidates(pair.left, pair.right, param_grid({{3, 5, 9}, {64}}), false);
    HintCandidateSet rev = set;
    std::reverse(rev.candidates.begin(), rev.candidates.end());
    std::reverse(rev.params.begin(), rev.params.end());
    const FusedHint a = fuse(set, pair.left, pair.right), b = fuse(rev, pair.left, pair.right);
    CHECK(a.score == b.score);
    for (std::size_t i = 0; i < a.score.size(); ++i) {
      if (!a.disp.valid[i]) continue;
      const int ia = a.source_index[i], ib = 2 - b.source_index[i];
      // Equal scores from different candidates resolve by index, in opposite
      // directions for the two orders.
      if (ia != ib) CHECK(a.score[i] == b.score[i]);
      else CHECK(a.disp.disp[i] == b.disp.disp[i]);
    }
  }
  SUBCASE("bad inputs") {
    CHECK_THROWS_AS(fuse({}, pair.left, pair.right), ValueError);
    CHECK_THROWS_AS(fuse({{DisparityMap(w, h), DisparityMap(w - 1, h)}, {{}, {}}}, pair.left, pair.right), ValueError);
  }
}
