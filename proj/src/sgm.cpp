#include "depthhints/sgm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <sstream>

#include "depthhints/parallel.hpp"

namespace depthhints::sgm {

namespace {

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

struct Direction {
  int dx, dy;
};

constexpr Direction kDirections[8] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, 1}, {1, -1}, {-1, -1}};

int hamming(const std::uint64_t* a, const std::uint64_t* b, int words) {
  int n = 0;
  for (int k = 0; k < words; ++k) n += std::popcount(a[k] ^ b[k]);
  return n;
}

// One step of the path recurrence for all disparities of a pixel.
void path_step(const std::uint32_t* cost, const std::uint32_t* prev, std::uint32_t* out, int D, std::uint32_t p1,
               std::uint32_t p2) {
  std::uint32_t min_prev = prev[0];
  for (int d = 1; d < D; ++d) min_prev = std::min(min_prev, prev[d]);
  const std::uint32_t jump = min_prev + p2;
  for (int d = 0; d < D; ++d) {
    std::uint32_t best = prev[d];
    if (d > 0) best = std::min(best, prev[d - 1] + p1);
    if (d + 1 < D) best = std::min(best, prev[d + 1] + p1);
    best = std::min(best, jump);
    out[d] = cost[d] + best - min_prev;
  }
}

}  // namespace

SgmParams SgmParams::with_defaults(int block_size, int num_disparities) {
  SgmParams p;
  p.block_size = block_size;
  p.num_disparities = num_disparities;
  const auto area = static_cast<std::uint32_t>(block_size * block_size);
  p.p1 = 8 * area;
  p.p2 = 32 * area;
  return p;
}

void SgmParams::validate() const {
  std::ostringstream err;
  if (block_size < 1 || block_size % 2 == 0) err << "block_size must be odd and >= 1; ";
  if (num_disparities < 16 || num_disparities % 16 != 0) err << "num_disparities must be a positive multiple of 16; ";
  if (!(p2 > p1 && p1 > 0)) err << "penalties must satisfy p2 > p1 > 0; ";
  if (uniqueness_ratio < 0 || uniqueness_ratio >= 100) err << "uniqueness_ratio must lie in [0,100); ";
  if (num_paths != 4 && num_paths != 8) err << "num_paths must be 4 or 8; ";
  if (census_window < 3 || census_window % 2 == 0) err << "census_window must be odd and >= 3; ";
  if (!err.str().empty()) throw ValueError("invalid SGM parameters: " + err.str());
}

CensusImage census_transform(const Image& img, int window) {
  if (img.channels() != 1) throw ValueError("census_transform expects a grayscale image");
  if (window < 1 || window % 2 == 0) throw ValueError("census window must be odd");

  CensusImage out;
  out.width = img.width();
  out.height = img.height();
  out.bits = window * window - 1;
  out.words = std::max(1, (out.bits + 63) / 64);
  out.data.assign(static_cast<std::size_t>(out.width) * out.height * out.words, 0);

  const int r = window / 2;
  parallel_for(img.height(), [&](int y) {
    for (int x = 0; x < img.width(); ++x) {
      std::uint64_t* desc = out.data.data() + (static_cast<std::size_t>(y) * out.width + x) * out.words;
      const double centre = img(x, y);
      int bit = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (img(clamp_index(x + dx, img.width()), clamp_index(y + dy, img.height())) < centre)
            desc[bit / 64] |= std::uint64_t{1} << (bit % 64);
          ++bit;
        }
      }
    }
  });
  return out;
}

CostVolume build_cost_volume(const Image& left, const Image& right, const SgmParams& params) {
  if (left.width() != right.width() || left.height() != right.height())
    throw ValueError("build_cost_volume: left and right images differ in size");
  if (params.block_size < 1 || params.block_size % 2 == 0) throw ValueError("block_size must be odd");
  if (params.num_disparities < 1) throw ValueError("num_disparities must be positive");

  const CensusImage cl = census_transform(to_grayscale(left), params.census_window);
  const CensusImage cr = census_transform(to_grayscale(right), params.census_window);
  const int w = left.width();
  const int h = left.height();
  const int D = params.num_disparities;
  const int r = params.block_size / 2;
  const auto max_cost = static_cast<std::uint32_t>(cl.bits * params.block_size * params.block_size);

  CostVolume vol(w, h, D);
  parallel_for(D, [&](int d) {
    std::vector<std::uint32_t> ham(static_cast<std::size_t>(w) * h);
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        ham[static_cast<std::size_t>(y) * w + x] =
            x - d < 0 ? static_cast<std::uint32_t>(cl.bits) : hamming(cl.at(x, y), cr.at(x - d, y), cl.words);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::uint32_t s = 0;
        for (int k = -r; k <= r; ++k) s += ham[static_cast<std::size_t>(y) * w + clamp_index(x + k, w)];
        rows[static_cast<std::size_t>(y) * w + x] = s;
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        std::uint32_t s = 0;
        for (int k = -r; k <= r; ++k) s += rows[static_cast<std::size_t>(clamp_index(y + k, h)) * w + x];
        vol.at(x, y, d) = x - d < 0 ? max_cost : s;
      }
  });
  return vol;
}

CostVolume aggregate_paths(const CostVolume& vol, const SgmParams& params) {
  if (params.num_paths != 4 && params.num_paths != 8) throw ValueError("num_paths must be 4 or 8");
  const int w = vol.width;
  const int h = vol.height;
  const int D = vol.num_disparities;
  const std::size_t row_len = static_cast<std::size_t>(w) * D;
  CostVolume sum(w, h, D);

  for (int p = 0; p < params.num_paths; ++p) {
    const Direction dir = kDirections[p];
    if (dir.dy == 0) {
      // Scanlines are independent.
      parallel_for(h, [&](int y) {
        std::vector<std::uint32_t> run(row_len);
        const int x_begin = dir.dx > 0 ? 0 : w - 1;
        for (int i = 0, x = x_begin; i < w; ++i, x += dir.dx) {
          std::uint32_t* out = run.data() + static_cast<std::size_t>(x) * D;
          if (i == 0)
            std::copy_n(vol.profile(x, y), D, out);
          else
            path_step(vol.profile(x, y), run.data() + static_cast<std::size_t>(x - dir.dx) * D, out, D, params.p1,
                      params.p2);
          std::uint32_t* acc = &sum.at(x, y, 0);
          for (int d = 0; d < D; ++d) acc[d] += out[d];
        }
      });
      continue;
    }
    // Rows depend on the previous row only, so each row is parallel in x.
    std::vector<std::uint32_t> prev(row_len), cur(row_len);
    const int y_begin = dir.dy > 0 ? 0 : h - 1;
    for (int i = 0, y = y_begin; i < h; ++i, y += dir.dy) {
      parallel_for(w, [&](int x) {
        std::uint32_t* out = cur.data() + static_cast<std::size_t>(x) * D;
        const int px = x - dir.dx;
        if (i == 0 || px < 0 || px >= w)
          std::copy_n(vol.profile(x, y), D, out);
        else
          path_step(vol.profile(x, y), prev.data() + static_cast<std::size_t>(px) * D, out, D, params.p1, params.p2);
        std::uint32_t* acc = &sum.at(x, y, 0);
        for (int d = 0; d < D; ++d) acc[d] += out[d];
      });
      std::swap(prev, cur);
    }
  }
  return sum;
}

DisparityMap wta_disparity(const CostVolume& vol, const SgmParams& params) {
  const int D = vol.num_disparities;
  const auto uniqueness = static_cast<std::uint64_t>(params.uniqueness_ratio);
  DisparityMap out(vol.width, vol.height, 0.0, false);

  parallel_for(vol.height, [&](int y) {
    for (int x = 0; x < vol.width; ++x) {
      const std::uint32_t* c = vol.profile(x, y);
      int best = 0;
      for (int d = 1; d < D; ++d)
        if (c[d] < c[best]) best = d;

      std::uint64_t second = std::numeric_limits<std::uint64_t>::max();
      for (int d = 0; d < D; ++d)
        if (std::abs(d - best) > 1) second = std::min<std::uint64_t>(second, c[d]);
      if (second != std::numeric_limits<std::uint64_t>::max() &&
          !(std::uint64_t{c[best]} * 100 < second * (100 - uniqueness)))
        continue;

      double disp = best;
      if (best > 0 && best + 1 < D) {
        const double c0 = c[best - 1], c1 = c[best], c2 = c[best + 1];
        const double curvature = c0 - 2.0 * c1 + c2;
        if (curvature > 0.0) disp += std::clamp((c0 - c2) / (2.0 * curvature), -0.5, 0.5);
      }
      out.disp(x, y) = std::max(0.0, disp);
      out.valid(x, y) = 1;
    }
  });
  return out;
}

DisparityMap lr_consistency(const DisparityMap& left_disp, const DisparityMap& right_disp, double threshold) {
  if (!left_disp.disp.same_shape(right_disp.disp)) throw ValueError("lr_consistency: maps differ in size");
  const int w = left_disp.width();
  DisparityMap out = left_disp;
  for (int y = 0; y < left_disp.height(); ++y)
    for (int x = 0; x < w; ++x) {
      if (!left_disp.is_valid(x, y)) continue;
      const double dl = left_disp.disp(x, y);
      const long xr = x - std::lround(dl);
      const bool agree = xr >= 0 && xr < w && right_disp.is_valid(static_cast<int>(xr), y) &&
                         std::abs(dl - right_disp.disp(static_cast<int>(xr), y)) <= threshold;
      if (!agree) out.valid(x, y) = 0;
    }
  return out;
}

DisparityMap sgm_match(const Image& left, const Image& right, const SgmParams& params, bool with_lr_check,
                       double lr_threshold) {
  params.validate();
  if (left.width() != right.width() || left.height() != right.height())
    throw ValueError("sgm_match: left and right images differ in size");

  const Image gl = to_grayscale(left);
  const Image gr = to_grayscale(right);
  DisparityMap disp = wta_disparity(aggregate_paths(build_cost_volume(gl, gr, params), params), params);
  if (!with_lr_check) return disp;

  // Mirroring swaps the roles of the views: the flipped right image becomes
  // a left-reference image whose partner is the flipped left image.
  const DisparityMap right_disp =
      hflip(wta_disparity(aggregate_paths(build_cost_volume(hflip(gr), hflip(gl), params), params), params));
  return lr_consistency(disp, right_disp, lr_threshold);
}

}  // namespace depthhints::sgm
