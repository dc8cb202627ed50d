#pragma once

// Test fixtures and independent reference implementations. The oracles here
// are written from the formulas, not by calling into the library kernels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "depthhints/core.hpp"
#include "depthhints/scene.hpp"
#include "depthhints/sgm.hpp"

namespace testing {

using namespace depthhints;

inline std::filesystem::path scene_path(const std::string& name) {
  return std::filesystem::path(DEPTHHINTS_SCENE_DIR) / (name + ".scene");
}

inline io::SyntheticPair render(const std::string& name) { return io::render_scene(io::read_scene(scene_path(name))); }

inline Image random_image(int w, int h, std::uint64_t seed, int channels = 1) {
  Rng rng(seed);
  Image img(w, h, channels);
  for (double& v : img.data()) v = rng.uniform();
  return img;
}

inline Image constant_image(int w, int h, double v, int channels = 1) { return Image(w, h, channels, v); }

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  auto dir = std::filesystem::temp_directory_path() / ("depthhints_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Copy of a grid's samples, safe to iterate when the grid is a temporary.
template <typename G>
auto values(const G& g) {
  return g.data();
}

/// Fraction of `xs` satisfying `pred`.
template <typename F>
double fraction(const std::vector<double>& xs, F pred) {
  if (xs.empty()) return 0.0;
  return static_cast<double>(std::count_if(xs.begin(), xs.end(), pred)) / static_cast<double>(xs.size());
}

namespace oracle {

inline constexpr double kC1 = 0.01 * 0.01;
inline constexpr double kC2 = 0.03 * 0.03;

// Disparity lookup used by the scalar loss: returns NaN for unusable pixels.
using DispFn = std::function<double(int, int)>;

inline DispFn lookup(const DisparityMap& d) {
  return [&d](int x, int y) {
    if (!d.valid(x, y) || !std::isfinite(d.disp(x, y))) return std::numeric_limits<double>::quiet_NaN();
    return d.disp(x, y);
  };
}

// Linear interpolation along row y at u, clamped to the row.
inline double row_lerp(const Image& img, int y, double u, int c) {
  const int w = img.width();
  if (u < 0.0) u = 0.0;
  if (u > w - 1) u = w - 1;
  const int i = static_cast<int>(std::floor(u));
  const int j = i + 1 < w ? i + 1 : w - 1;
  const double t = u - i;
  return (1.0 - t) * img(i, y, c) + t * img(j, y, c);
}

// Intensity of `other` seen at reference pixel (x,y) under disparity `d`.
inline double warped(const Image& other, const DispFn& d, int x, int y, int c, int direction) {
  const double v = d(x, y);
  const double u = std::isnan(v) ? x : x + direction * v;
  return row_lerp(other, y, u, c);
}

/// Scalar DSSIM+L1 at (x,y): 3x3 window with edge replication, SSIM clamped
/// to [-1,1] and averaged over channels. +inf when the pixel's own sample is
/// unusable or leaves the row.
inline double pixel_loss(const Image& ref, const Image& other, const DispFn& d, int x, int y, double alpha,
                         int direction = -1) {
  const int w = ref.width();
  const int h = ref.height();
  const double own = d(x, y);
  if (std::isnan(own)) return std::numeric_limits<double>::infinity();
  const double u = x + direction * own;
  if (!(u >= 0.0 && u <= w - 1)) return std::numeric_limits<double>::infinity();

  double ssim = 0.0, l1 = 0.0;
  for (int c = 0; c < ref.channels(); ++c) {
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int dy = -1; dy <= 1; ++dy) {
      const int yy = std::min(std::max(y + dy, 0), h - 1);
      for (int dx = -1; dx <= 1; ++dx) {
        const int xx = std::min(std::max(x + dx, 0), w - 1);
        const double a = ref(xx, yy, c);
        const double b = warped(other, d, xx, yy, c, direction);
        sa += a;
        sb += b;
        saa += a * a;
        sbb += b * b;
        sab += a * b;
      }
    }
    const double ma = sa / 9.0, mb = sb / 9.0;
    const double va = saa / 9.0 - ma * ma, vb = sbb / 9.0 - mb * mb, cov = sab / 9.0 - ma * mb;
    const double s = ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
    ssim += std::min(1.0, std::max(-1.0, s));
    l1 += std::abs(ref(x, y, c) - warped(other, d, x, y, c, direction));
  }
  ssim /= ref.channels();
  l1 /= ref.channels();
  return alpha * (1.0 - ssim) / 2.0 + (1.0 - alpha) * l1;
}

/// Loss at (x,y) with that pixel's own disparity replaced by `value`.
inline double pixel_loss_at(const Image& ref, const Image& other, const DisparityMap& disp, int x, int y, double value,
                            double alpha, int direction = -1) {
  const DispFn base = lookup(disp);
  const DispFn d = [&](int xx, int yy) { return xx == x && yy == y ? value : base(xx, yy); };
  return pixel_loss(ref, other, d, x, y, alpha, direction);
}

/// Central finite difference of the pixel's own loss in its own disparity.
/// With `hint` set, the supervised term log(1+|d-h|) is added (gate on).
inline double fd_gradient(const Image& ref, const Image& other, const DisparityMap& disp, int x, int y, double alpha,
                          double eps, const double* hint = nullptr) {
  auto f = [&](double v) {
    double l = pixel_loss_at(ref, other, disp, x, y, v, alpha);
    if (hint) l += std::log1p(std::abs(v - *hint));
    return l;
  };
  const double d0 = disp.disp(x, y);
  return (f(d0 + eps) - f(d0 - eps)) / (2.0 * eps);
}

/// Brute-force path aggregation: every path is walked pixel by pixel from its
/// image-border start, recomputing the recurrence in 64-bit integers.
inline std::vector<std::uint64_t> aggregate(const sgm::CostVolume& vol, std::uint64_t p1, std::uint64_t p2,
                                            int num_paths) {
  static const int dirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}};
  const int w = vol.width, h = vol.height, D = vol.num_disparities;
  std::vector<std::uint64_t> total(static_cast<std::size_t>(w) * h * D, 0);
  for (int p = 0; p < num_paths; ++p) {
    const int dx = dirs[p][0], dy = dirs[p][1];
    std::vector<std::uint64_t> L(total.size(), 0);
    std::vector<char> done(static_cast<std::size_t>(w) * h, 0);
    std::function<void(int, int)> solve = [&](int x, int y) {
      const std::size_t idx = static_cast<std::size_t>(y) * w + x;
      if (done[idx]) return;
      const int qx = x - dx, qy = y - dy;
      if (qx < 0 || qx >= w || qy < 0 || qy >= h) {
        for (int d = 0; d < D; ++d) L[idx * D + d] = vol.at(x, y, d);
      } else {
        solve(qx, qy);
        const std::size_t q = static_cast<std::size_t>(qy) * w + qx;
        std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
        for (int d = 0; d < D; ++d) m = std::min(m, L[q * D + d]);
        for (int d = 0; d < D; ++d) {
          std::uint64_t best = L[q * D + d];
          if (d > 0) best = std::min(best, L[q * D + d - 1] + p1);
          if (d + 1 < D) best = std::min(best, L[q * D + d + 1] + p1);
          best = std::min(best, m + p2);
          L[idx * D + d] = vol.at(x, y, d) + best - m;
        }
      }
      done[idx] = 1;
    };
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) solve(x, y);
    for (std::size_t i = 0; i < total.size(); ++i) total[i] += L[i];
  }
  return total;
}

inline sgm::CostVolume random_volume(int w, int h, int D, std::uint64_t seed, std::uint32_t max_cost = 200) {
  Rng rng(seed);
  sgm::CostVolume vol(w, h, D);
  for (auto& c : vol.cost) c = static_cast<std::uint32_t>(rng.uniform_index(max_cost + 1));
  return vol;
}

}  // namespace oracle
}  // namespace testing
