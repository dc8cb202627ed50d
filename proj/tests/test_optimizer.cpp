#include <doctest.h>

#include "depthhints/hints.hpp"
#include "depthhints/optimizer.hpp"
#include "depthhints/parallel.hpp"
#include "support.hpp"

using namespace depthhints;
using namespace depthhints::optimizer;

namespace {

// Truth shifted by a fractional offset so every sample sits strictly inside
// a bilinear cell, away from the kinks at integer positions.
DisparityMap off_grid(const DisparityMap& truth, std::uint64_t seed) {
  Rng rng(seed);
  DisparityMap d = truth;
  for (double& v : d.disp.data()) v = std::floor(v + rng.uniform(-2.0, 2.0)) + rng.uniform(0.1, 0.9);
  return d;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("photometric_gradient") {
  SUBCASE("exact match on locally constant images is stationary") {
    const Image flat(12, 6, 1, 0.4);
    for (double g : testing::values(photometric_gradient(flat, flat, DisparityMap(12, 6, 1.5))))
      CHECK(std::abs(g) < 1e-12);
  }
  SUBCASE("out-of-bounds pixels get zero") {
    const Image a = testing::random_image(12, 6, 1), b = testing::random_image(12, 6, 2);
    const Grid<double> g = photometric_gradient(a, b, DisparityMap(12, 6, 3.5));
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 3; ++x) CHECK(g(x, y) == 0.0);
  }
  SUBCASE("finite differences on the ramp scene") {
    const auto pair = testing::render("ramp");
    const DisparityMap d = off_grid(pair.gt_disparity, 3);
    const Grid<double> g = photometric_gradient(pair.left, pair.right, d);
    std::vector<double> errs;
    for (int y = 0; y < d.height(); ++y)
      for (int x = 0; x < d.width(); ++x) {
        if (std::abs(g(x, y)) <= 1e-6) continue;
        const double fd = testing::oracle::fd_gradient(pair.left, pair.right, d, x, y, kDefaultAlpha, 1e-3);
        if (std::isfinite(fd)) errs.push_back(relative_error(g(x, y), fd));
      }
    REQUIRE(errs.size() > 1000);
    CHECK(testing::fraction(errs, [](double e) { return e < 1e-3; }) >= 0.99);
  }
  SUBCASE("size mismatch throws") {
    CHECK_THROWS_AS(photometric_gradient(Image(4, 4, 1), Image(4, 4, 1), DisparityMap(3, 4)), ValueError);
  }
}

TEST_CASE("gated_gradient") {
  const auto pair = testing::render("stripes");
  const int w = pair.left.width(), h = pair.left.height();
  const DisparityMap d = off_grid(pair.gt_disparity, 5);
  const Grid<double> plain = photometric_gradient(pair.left, pair.right, d);

  SUBCASE("closed gate leaves the photometric gradient") {
    const Mask closed(w, h, 0);
    CHECK(gated_gradient(pair.left, pair.right, d, pair.gt_disparity, kDefaultAlpha, -1, &closed) == plain);
    // A hint equal to the prediction can never open the gate.
    CHECK(gated_gradient(pair.left, pair.right, d, d) == plain);
  }
  SUBCASE("open gate adds the supervised derivative") {
    const Mask open(w, h, 1);
    DisparityMap hint = d;
    for (double& v : hint.disp.data()) v -= 2.0;
    const Grid<double> g = gated_gradient(pair.left, pair.right, d, hint, kDefaultAlpha, -1, &open);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == plain[i] + 1.0 / 3.0);
  }
  SUBCASE("frozen gate matches finite differences") {
    Rng rng(2);
    DisparityMap hint = pair.gt_disparity;
    Mask gate(w, h, 0);
    for (std::size_t i = 0; i < gate.size(); ++i) {
      gate[i] = rng.uniform() < 0.5;
      hint.disp[i] += rng.uniform(-6.0, 6.0);
    }
    const Grid<double> g = gated_gradient(pair.left, pair.right, d, hint, kDefaultAlpha, -1, &gate);
    std::vector<double> errs;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (std::abs(g(x, y)) <= 1e-6) continue;
        const double hv = hint.disp(x, y);
        const double fd = testing::oracle::fd_gradient(pair.left, pair.right, d, x, y, kDefaultAlpha, 1e-3,
                                                       gate(x, y) ? &hv : nullptr);
        // Gated pixels whose own sample leaves the image have no finite
        // loss to difference.
        if (std::isfinite(fd)) errs.push_back(relative_error(g(x, y), fd));
      }
    REQUIRE(errs.size() > 1000);
    CHECK(testing::fraction(errs, [](double e) { return e < 1e-3; }) >= 0.99);
  }
}

TEST_CASE("optimize") {
  const auto pair = testing::render("thin_structure");
  const int w = pair.left.width(), h = pair.left.height();

  SUBCASE("starting at the truth stays in the basin") {
    OptimizeConfig cfg;
    cfg.iterations = 100;
    cfg.init = MapInit{pair.gt_disparity};
    const Trajectory t = optimize(pair.left, pair.right, cfg);
    CHECK(t.snapshots.back().mean_loss <= t.snapshots.front().mean_loss);
    std::vector<double> err;
    for (std::size_t i = 0; i < t.final.disp.size(); ++i)
      err.push_back(std::abs(t.final.disp[i] - pair.gt_disparity.disp[i]));
    CHECK(median(err) < 0.5);
  }
  SUBCASE("snapshots") {
    OptimizeConfig cfg;
    cfg.iterations = 25;
    cfg.record_every = 10;
    cfg.init = FlatInit{3.0};
    const Trajectory t = optimize(pair.left, pair.right, cfg);
    std::vector<int> its;
    for (const auto& s : t.snapshots) its.push_back(s.iteration);
    CHECK(its == std::vector<int>{0, 10, 20, 25});
    CHECK(t.snapshots.back().disp == t.final);
    for (const auto& s : t.snapshots) CHECK((s.hint_fraction >= 0.0 && s.hint_fraction <= 1.0));
  }
  SUBCASE("zero iterations keep the initial field") {
    OptimizeConfig cfg;
    cfg.iterations = 0;
    cfg.init = FlatInit{4.0};
    const Trajectory t = optimize(pair.left, pair.right, cfg);
    REQUIRE(t.snapshots.size() == 1);
    CHECK(t.final == DisparityMap(w, h, 4.0));
  }
  SUBCASE("initialisations and clamping") {
    OptimizeConfig cfg;
    cfg.iterations = 0;
    cfg.init = RandomInit{-5.0, 100.0, 7};
    const Trajectory t = optimize(pair.left, pair.right, cfg);
    for (double v : t.final.disp.data()) CHECK((v >= 0.0 && v <= 0.3 * w));

    cfg.init = RandomInit{0.0, 10.0, 7};
    CHECK(optimize(pair.left, pair.right, cfg).final == optimize(pair.left, pair.right, cfg).final);
    cfg.init = RandomInit{0.0, 10.0, 8};
    CHECK_FALSE(optimize(pair.left, pair.right, cfg).final == t.final);

    cfg.init = MapInit{DisparityMap(w - 1, h)};
    CHECK_THROWS_AS(optimize(pair.left, pair.right, cfg), ValueError);
  }
  SUBCASE("configuration errors") {
    OptimizeConfig cfg;
    cfg.use_hints = true;
    CHECK_THROWS_AS(optimize(pair.left, pair.right, cfg), ValueError);
    cfg = OptimizeConfig{};
    cfg.step_size = 0.0;
    CHECK_THROWS_AS(optimize(pair.left, pair.right, cfg), ValueError);
  }
  SUBCASE("thin structure: hints escape, plain descent does not") {
    const auto set = hints::generate_candidates(pair.left, pair.right, hints::param_grid(), false);
    const auto fused = hints::fuse(set, pair.left, pair.right);
    OptimizeConfig cfg;
    cfg.iterations = 500;
    cfg.step_size = 0.2;
    cfg.record_every = 50;
    cfg.init = FlatInit{12.0};
    const Trajectory plain = optimize(pair.left, pair.right, cfg);
    cfg.use_hints = true;
    const Trajectory gated = optimize(pair.left, pair.right, cfg, &fused.disp);

    std::vector<double> ep, eg;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (pair.gt_disparity.disp(x, y) == 20.0 && pair.occlusion_mask(x, y)) {
          ep.push_back(std::abs(plain.final.disp(x, y) - 20.0));
          eg.push_back(std::abs(gated.final.disp(x, y) - 20.0));
        }
    CHECK(median(ep) > median(eg));
    CHECK(gated.snapshots.back().hint_fraction < gated.snapshots.front().hint_fraction);
  }
  SUBCASE("thread count does not change the result") {
    OptimizeConfig cfg;
    cfg.iterations = 30;
    cfg.init = RandomInit{0.0, 20.0, 1};
    set_max_threads(1);
    const Trajectory a = optimize(pair.left, pair.right, cfg);
    set_max_threads(4);
    const Trajectory b = optimize(pair.left, pair.right, cfg);
    set_max_threads(0);
    CHECK(a.final == b.final);
  }
}

TEST_CASE("cost_curve") {
  SUBCASE("identical views have their minimum at zero") {
    const Image img = testing::random_image(40, 10, 3);
    const auto curve = cost_curve(img, img, 30, 5, 20.0, 41);
    const auto best = std::min_element(curve.begin(), curve.end(),
                                       [](const CurvePoint& a, const CurvePoint& b) { return a.loss < b.loss; });
    CHECK(best->disparity == 0.0);
    CHECK(best->loss == 0.0);
  }
  SUBCASE("argmin lands on the true disparity") {
    const auto pair = testing::render("textured");
    for (auto [x, y] : std::vector<std::pair<int, int>>{{80, 60}, {200, 80}, {20, 10}}) {
      const auto curve = cost_curve(pair.left, pair.right, x, y, 60.0, 241);
      const auto best = std::min_element(curve.begin(), curve.end(),
                                         [](const CurvePoint& a, const CurvePoint& b) { return a.loss < b.loss; });
      CHECK(std::abs(best->disparity - pair.gt_disparity.disp(x, y)) <= 1.0);
    }
  }
  SUBCASE("repeating texture produces separated local minima") {
    const auto pair = testing::render("stripes");
    const int x = 100, y = 30;  // wall pixel, stripe period 9
    const auto curve = cost_curve(pair.left, pair.right, x, y, 38.0, 381);
    std::vector<double> minima;
    for (std::size_t i = 1; i + 1 < curve.size(); ++i)
      if (curve[i].loss < curve[i - 1].loss && curve[i].loss <= curve[i + 1].loss && curve[i].loss < 0.2)
        minima.push_back(curve[i].disparity);
    REQUIRE(minima.size() >= 2);
    CHECK(minima[1] - minima[0] >= 9.0 - 1.0);
  }
  SUBCASE("matches the full-image loss at the pixel") {
    const auto pair = testing::render("ramp");
    const auto curve = cost_curve(pair.left, pair.right, 40, 30, 20.0, 11);
    for (const auto& p : curve) {
      const DisparityMap d(pair.left.width(), pair.left.height(), p.disparity);
      CHECK(p.loss == doctest::Approx(photometric_loss_of_disparity(pair.left, pair.right, d)(40, 30)).epsilon(1e-12));
    }
    CHECK(std::isinf(cost_curve(pair.left, pair.right, 5, 30, 20.0, 3).back().loss));
  }
  CHECK_THROWS_AS(cost_curve(Image(4, 4, 1), Image(4, 4, 1), 4, 0, 2.0, 3), ValueError);
}
