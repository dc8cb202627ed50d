#include <doctest.h>

#include <algorithm>
#include <map>

#include "support.hpp"

using namespace depthhints;

TEST_CASE("grayscale") {
  SUBCASE("single channel is returned unchanged") {
    const Image g = testing::random_image(5, 4, 3);
    CHECK(to_grayscale(g) == g);
  }
  SUBCASE("neutral grey stays grey") {
    const Image g = to_grayscale(Image(3, 2, 3, 0.5));
    for (double v : g.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("pure red maps to the red weight") {
    Image rgb(1, 1, 3, 0.0);
    rgb(0, 0, 0) = 1.0;
    CHECK(to_grayscale(rgb)(0, 0) == 0.299);
  }
}

TEST_CASE("hflip") {
  const Image img = testing::random_image(7, 5, 11, 3);
  CHECK(hflip(hflip(img)) == img);

  Image row(2, 1, 1);
  row(0, 0) = 0.25;
  row(1, 0) = 0.75;
  const Image f = hflip(row);
  CHECK(f(0, 0) == 0.75);
  CHECK(f(1, 0) == 0.25);

  Image sym(4, 2, 1);
  for (int y = 0; y < 2; ++y) {
    sym(0, y) = sym(3, y) = 0.1 * (y + 1);
    sym(1, y) = sym(2, y) = 0.3 * (y + 1);
  }
  CHECK(hflip(sym) == sym);

  SUBCASE("sum and histogram are preserved exactly") {
    const Image flipped = hflip(img);
    std::map<double, int> ha, hb;
    for (double v : img.data()) ++ha[v];
    for (double v : flipped.data()) ++hb[v];
    CHECK(ha == hb);
  }

  SUBCASE("disparity maps flip values and masks together") {
    DisparityMap d(3, 1, 0.0, true);
    d.disp(0, 0) = 1.0;
    d.valid(2, 0) = 0;
    const DisparityMap f = hflip(d);
    CHECK(f.disp(2, 0) == 1.0);
    CHECK(f.valid(0, 0) == 0);
    CHECK(hflip(f) == d);
  }
}

TEST_CASE("disparity and depth conversion") {
  const auto calib = StereoCalibration::rectified(720.0, 300.0, 100.0, 0.54);

  SUBCASE("disparity f*B maps to unit depth") {
    const DisparityMap d(4, 3, 720.0 * 0.54);
    const DepthMap z = disparity_to_depth(d, calib);
    for (std::size_t i = 0; i < z.depth.size(); ++i) {
      CHECK(z.valid[i] == 1);
      CHECK(z.depth[i] == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  SUBCASE("zero and sub-threshold disparities become invalid") {
    DisparityMap d(3, 1, 10.0);
    d.disp(0, 0) = 0.0;
    d.disp(1, 0) = 0.5 * kEpsilonDisparity;
    const DepthMap z = disparity_to_depth(d, calib);
    CHECK(z.valid(0, 0) == 0);
    CHECK(z.valid(1, 0) == 0);
    CHECK(z.valid(2, 0) == 1);
  }
  SUBCASE("lidar-style disparity example") {
    const DepthMap z = disparity_to_depth(DisparityMap(1, 1, 64.63), calib);
    CHECK(z.depth(0, 0) == doctest::Approx(720.0 * 0.54 / 64.63));
    CHECK(z.depth(0, 0) == doctest::Approx(6.016).epsilon(1e-3));
  }
  SUBCASE("round trip on random disparities") {
    Rng rng(5);
    DisparityMap d(16, 8);
    for (double& v : d.disp.data()) v = rng.uniform(0.01, 200.0);
    const DisparityMap back = depth_to_disparity(disparity_to_depth(d, calib), calib);
    for (std::size_t i = 0; i < d.disp.size(); ++i) {
      REQUIRE(back.valid[i] == 1);
      CHECK(std::abs(back.disp[i] - d.disp[i]) <= 1e-9);
    }
  }
  SUBCASE("invalid calibration is rejected") {
    auto bad = calib;
    bad.R(0, 1) = 0.5;
    CHECK_THROWS_AS(disparity_to_depth(DisparityMap(1, 1, 1.0), bad), ValueError);
    auto neg = calib;
    neg.baseline = -1.0;
    CHECK_THROWS_AS(neg.validate(), ValueError);
  }
}

TEST_CASE("image invariants") {
  CHECK_THROWS_AS(Image(2, 2, 2), ValueError);
  Image img(2, 2, 1, 0.5);
  CHECK_NOTHROW(img.validate());
  img(1, 1) = 1.5;
  CHECK_THROWS_AS(img.validate(), ValueError);
}

TEST_CASE("rect") {
  const Rect r{1, 2, 4, 5};
  CHECK(r.contains(1, 2));
  CHECK_FALSE(r.contains(4, 2));
  CHECK(r.fits(4, 5));
  CHECK_FALSE(r.fits(3, 5));
  CHECK_FALSE(Rect{2, 0, 2, 1}.fits(5, 5));
}

TEST_CASE("rng") {
  Rng a(42), b(42), c(43);
  std::vector<std::uint64_t> sa, sb, sc;
  for (int i = 0; i < 100; ++i) {
    sa.push_back(a.next());
    sb.push_back(b.next());
    sc.push_back(c.next());
  }
  CHECK(sa == sb);
  CHECK(sa != sc);

  SUBCASE("first SplitMix64 output for seed 0") {
    // Reference value of the published SplitMix64 generator.
    Rng z(0);
    CHECK(z.next() == 0xe220a8397b1dcdafULL);
  }
  SUBCASE("uniform stays in [0,1)") {
    Rng r(1);
    for (int i = 0; i < 10000; ++i) {
      const double u = r.uniform();
      CHECK((u >= 0.0 && u < 1.0));
    }
  }
  SUBCASE("uniform_index covers its range without bias") {
    Rng r(9);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[r.uniform_index(7)];
    const double p = 1.0 / 7.0, sigma = std::sqrt(p * (1 - p) / n);
    for (int c : counts) CHECK(std::abs(c / double(n) - p) < 4 * sigma);
    CHECK_THROWS_AS(r.uniform_index(0), ValueError);
  }
}
