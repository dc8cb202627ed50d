#include "depthhints/core.hpp"

#include <cmath>
#include <sstream>

namespace depthhints {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels),
      data_(static_cast<std::size_t>(width) * height * channels, fill) {
  if (width < 0 || height < 0) throw ValueError("image dimensions must be non-negative");
  if (channels != 1 && channels != 3) throw ValueError("image must have 1 or 3 channels");
}

void Image::validate() const {
  if (data_.size() != static_cast<std::size_t>(width_) * height_ * channels_)
    throw ValueError("image data length does not match its dimensions");
  for (double v : data_) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      std::ostringstream os;
      os << "image intensity " << v << " outside [0,1]";
      throw ValueError(os.str());
    }
  }
}

StereoCalibration StereoCalibration::rectified(double focal, double cx, double cy, double baseline) {
  StereoCalibration c;
  c.focal = focal;
  c.cx = cx;
  c.cy = cy;
  c.baseline = baseline;
  c.K << focal, 0.0, cx, 0.0, focal, cy, 0.0, 0.0, 1.0;
  c.K_other = c.K;
  c.R.setIdentity();
  c.t = Eigen::Vector3d(-baseline, 0.0, 0.0);
  return c;
}

namespace {

void check_intrinsics(const Eigen::Matrix3d& K, const char* name) {
  const bool upper = K(1, 0) == 0.0 && K(2, 0) == 0.0 && K(2, 1) == 0.0;
  const bool positive = K(0, 0) > 0.0 && K(1, 1) > 0.0 && K(2, 2) > 0.0;
  if (!upper || !positive)
    throw ValueError(std::string(name) + " must be upper-triangular with a positive diagonal");
}

}  // namespace

void StereoCalibration::validate() const {
  if (!(focal > 0.0)) throw ValueError("focal length must be positive");
  if (!(baseline > 0.0)) throw ValueError("baseline must be positive");
  check_intrinsics(K, "K");
  check_intrinsics(K_other, "K_other");
  const double err = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!(err <= 1e-9)) throw ValueError("rotation matrix is not orthonormal");
}

std::uint64_t Rng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix(state_);
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw ValueError("uniform_index needs a positive range");
  // Values below `threshold` would over-represent the low residues.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return r % n;
  }
}

Image to_grayscale(const Image& img) {
  if (img.channels() == 1) return img;
  Image out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out(x, y) = 0.299 * img(x, y, 0) + 0.587 * img(x, y, 1) + 0.114 * img(x, y, 2);
  return out;
}

Image hflip(const Image& img) {
  Image out(img.width(), img.height(), img.channels());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < img.channels(); ++c) out(w - 1 - x, y, c) = img(x, y, c);
  return out;
}

DisparityMap hflip(const DisparityMap& d) {
  DisparityMap out(d.width(), d.height());
  const int w = d.width();
  for (int y = 0; y < d.height(); ++y)
    for (int x = 0; x < w; ++x) {
      out.disp(w - 1 - x, y) = d.disp(x, y);
      out.valid(w - 1 - x, y) = d.valid(x, y);
    }
  return out;
}

DepthMap disparity_to_depth(const DisparityMap& d, const StereoCalibration& calib) {
  calib.validate();
  const double fb = calib.focal * calib.baseline;
  DepthMap out(d.width(), d.height(), 0.0, false);
  for (std::size_t i = 0; i < d.disp.size(); ++i) {
    const double v = d.disp[i];
    if (d.valid[i] && std::isfinite(v) && v > kEpsilonDisparity) {
      out.depth[i] = fb / v;
      out.valid[i] = 1;
    }
  }
  return out;
}

DisparityMap depth_to_disparity(const DepthMap& depth, const StereoCalibration& calib) {
  calib.validate();
  const double fb = calib.focal * calib.baseline;
  DisparityMap out(depth.width(), depth.height(), 0.0, false);
  for (std::size_t i = 0; i < depth.depth.size(); ++i) {
    const double z = depth.depth[i];
    if (depth.valid[i] && std::isfinite(z) && z > 0.0) {
      out.disp[i] = fb / z;
      out.valid[i] = 1;
    }
  }
  return out;
}

}  // namespace depthhints
