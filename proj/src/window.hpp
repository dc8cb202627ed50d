#pragma once

// Shared 3x3-window and sampling kernels for the photometric loss and its
// gradient. Both must use the exact same arithmetic so that gate decisions
// computed from either agree bit for bit.

#include <algorithm>
#include <cmath>

#include "depthhints/core.hpp"
#include "depthhints/photometric.hpp"

namespace depthhints::detail {

inline int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

/// Bilinear sample along row y at horizontal position u (clamped to the row).
struct RowSample {
  double value;
  /// d value / d u; zero past the last column.
  double slope;
};

inline RowSample sample_row(const Image& img, int y, double u, int c) {
  const int w = img.width();
  const double uc = std::clamp(u, 0.0, static_cast<double>(w - 1));
  const int x0 = static_cast<int>(std::floor(uc));
  const int x1 = std::min(x0 + 1, w - 1);
  const double f = uc - x0;
  const double v0 = img(x0, y, c);
  const double v1 = img(x1, y, c);
  return {(1.0 - f) * v0 + f * v1, v1 - v0};
}

inline bool inside_row(double u, int w) { return u >= 0.0 && u <= static_cast<double>(w - 1); }

/// First and second moments of two images over the 3x3 window at (x,y).
struct Moments {
  double mu_a, mu_b, var_a, var_b, cov;
};

inline Moments window_moments(const Image& a, const Image& b, int x, int y, int c) {
  const int w = a.width();
  const int h = a.height();
  double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
  for (int dy = -1; dy <= 1; ++dy) {
    const int yy = clamp_index(y + dy, h);
    for (int dx = -1; dx <= 1; ++dx) {
      const int xx = clamp_index(x + dx, w);
      const double va = a(xx, yy, c);
      const double vb = b(xx, yy, c);
      sa += va;
      sb += vb;
      saa += va * va;
      sbb += vb * vb;
      sab += va * vb;
    }
  }
  Moments m;
  m.mu_a = sa / 9.0;
  m.mu_b = sb / 9.0;
  m.var_a = saa / 9.0 - m.mu_a * m.mu_a;
  m.var_b = sbb / 9.0 - m.mu_b * m.mu_b;
  m.cov = sab / 9.0 - m.mu_a * m.mu_b;
  return m;
}

/// SSIM factors: value = (lum_num * con_num) / (lum_den * con_den).
struct SsimTerms {
  double lum_num, con_num, lum_den, con_den;
  double value() const { return (lum_num * con_num) / (lum_den * con_den); }
};

inline SsimTerms ssim_terms(const Moments& m) {
  return {2.0 * m.mu_a * m.mu_b + kSsimC1, 2.0 * m.cov + kSsimC2,
          m.mu_a * m.mu_a + m.mu_b * m.mu_b + kSsimC1, m.var_a + m.var_b + kSsimC2};
}

inline double clamp_ssim(double s) { return std::clamp(s, -1.0, 1.0); }

/// Channel-averaged SSIM at one pixel.
inline double pixel_ssim(const Image& a, const Image& b, int x, int y) {
  double s = 0.0;
  for (int c = 0; c < a.channels(); ++c) s += clamp_ssim(ssim_terms(window_moments(a, b, x, y, c)).value());
  return s / a.channels();
}

/// DSSIM+L1 at one pixel.
inline double pixel_dssim_l1(const Image& ref, const Image& warped, int x, int y, double alpha) {
  const double s = pixel_ssim(ref, warped, x, y);
  double l1 = 0.0;
  for (int c = 0; c < ref.channels(); ++c) l1 += std::abs(ref(x, y, c) - warped(x, y, c));
  l1 /= ref.channels();
  return alpha * (1.0 - s) / 2.0 + (1.0 - alpha) * l1;
}

}  // namespace depthhints::detail
