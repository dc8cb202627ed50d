#include "depthhints/photometric.hpp"

#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "depthhints/parallel.hpp"
#include "window.hpp"

namespace depthhints {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tolerance on the bounds test of the pose warp, so that sample positions
// which are integral up to round-off are not rejected at the border.
constexpr double kPoseBoundsSlack = 1e-9;

}  // namespace

WarpResult warp_disparity(const Image& source, const DisparityMap& disp, int direction) {
  if (!disp.disp.same_shape(source.width(), source.height()))
    throw ValueError("warp_disparity: disparity map and source image differ in size");
  if (direction != 1 && direction != -1) throw ValueError("warp_disparity: direction must be +1 or -1");

  const int w = source.width();
  WarpResult out{Image(w, source.height(), source.channels()), Mask(w, source.height(), 0)};
  parallel_for(source.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      const bool valid = disp.is_valid(x, y) && std::isfinite(disp.disp(x, y));
      const double u = valid ? x + direction * disp.disp(x, y) : static_cast<double>(x);
      for (int c = 0; c < source.channels(); ++c) out.image(x, y, c) = detail::sample_row(source, y, u, c).value;
      out.in_bounds(x, y) = valid && detail::inside_row(u, w) ? 1 : 0;
    }
  });
  return out;
}

WarpResult warp_pose(const Image& source, const DepthMap& depth, const StereoCalibration& calib) {
  if (!depth.depth.same_shape(source.width(), source.height()))
    throw ValueError("warp_pose: depth map and source image differ in size");
  if (std::abs(calib.K.determinant()) < 1e-12) throw ValueError("warp_pose: singular intrinsic matrix K");

  const Eigen::Matrix3d K_inv = calib.K.inverse();
  const int w = source.width();
  const int h = source.height();
  WarpResult out{Image(w, h, source.channels()), Mask(w, h, 0)};

  parallel_for(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double u = x, v = y;
      bool ok = depth.is_valid(x, y) && std::isfinite(depth.depth(x, y)) && depth.depth(x, y) > 0.0;
      if (ok) {
        const Eigen::Vector3d ray = K_inv * Eigen::Vector3d(x, y, 1.0);
        const Eigen::Vector3d q = calib.R * (depth.depth(x, y) * ray) + calib.t;
        if (q.z() <= 0.0) {
          ok = false;
        } else {
          const Eigen::Vector3d p = calib.K_other * q;
          u = p.x() / p.z();
          v = p.y() / p.z();
          ok = u >= -kPoseBoundsSlack && u <= w - 1 + kPoseBoundsSlack && v >= -kPoseBoundsSlack &&
               v <= h - 1 + kPoseBoundsSlack;
        }
      }
      const double uc = std::clamp(u, 0.0, static_cast<double>(w - 1));
      const double vc = std::clamp(v, 0.0, static_cast<double>(h - 1));
      const int x0 = static_cast<int>(std::floor(uc));
      const int y0 = static_cast<int>(std::floor(vc));
      const int x1 = std::min(x0 + 1, w - 1);
      const int y1 = std::min(y0 + 1, h - 1);
      const double fx = uc - x0;
      const double fy = vc - y0;
      for (int c = 0; c < source.channels(); ++c) {
        const double top = (1.0 - fx) * source(x0, y0, c) + fx * source(x1, y0, c);
        const double bottom = (1.0 - fx) * source(x0, y1, c) + fx * source(x1, y1, c);
        out.image(x, y, c) = (1.0 - fy) * top + fy * bottom;
      }
      out.in_bounds(x, y) = ok ? 1 : 0;
    }
  });
  return out;
}

Grid<double> ssim_map(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw ValueError("ssim_map: images differ in size or channel count");
  Grid<double> out(a.width(), a.height());
  parallel_for(a.height(), [&](int y) {
    for (int x = 0; x < a.width(); ++x) out(x, y) = detail::pixel_ssim(a, b, x, y);
  });
  return out;
}

LossField dssim_l1(const Image& reference, const WarpResult& reprojected, double alpha) {
  if (!reference.same_shape(reprojected.image) || !reprojected.in_bounds.same_shape(reference.width(), reference.height()))
    throw ValueError("dssim_l1: reference and reprojection differ in size");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValueError("dssim_l1: alpha must lie in [0,1]");

  LossField out(reference.width(), reference.height());
  parallel_for(reference.height(), [&](int y) {
    for (int x = 0; x < reference.width(); ++x)
      out(x, y) = reprojected.in_bounds(x, y) ? detail::pixel_dssim_l1(reference, reprojected.image, x, y, alpha)
                                              : kInf;
  });
  return out;
}

LossField min_over_views(std::span<const LossField> fields) {
  if (fields.empty()) throw ValueError("min_over_views: no loss fields given");
  LossField out = fields.front();
  for (const LossField& f : fields.subspan(1)) {
    if (!f.same_shape(out)) throw ValueError("min_over_views: loss fields differ in size");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(out[i], f[i]);
  }
  return out;
}

LossField photometric_loss_of_disparity(const Image& ref, const Image& other, const DisparityMap& disp,
                                        int direction, double alpha) {
  if (!ref.same_shape(other)) throw ValueError("photometric loss: reference and other image differ in size");
  return dssim_l1(ref, warp_disparity(other, disp, direction), alpha);
}

}  // namespace depthhints
