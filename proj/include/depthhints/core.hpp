#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "depthhints/error.hpp"

namespace depthhints {

/// Dense row-major 2-D array. Indexing outside the grid is a programming
/// error and is caught by assert only.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {
    assert(width >= 0 && height >= 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int x, int y) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(int w, int h) const { return width_ == w && height_ == h; }
  template <typename U>
  bool same_shape(const Grid<U>& o) const { return same_shape(o.width(), o.height()); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

/// Per-pixel boolean mask; bytes instead of vector<bool> so pixels can be
/// written from parallel rows.
using Mask = Grid<std::uint8_t>;

/// Rectified raster with intensities in [0,1], channels interleaved.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double& operator()(int x, int y, int c = 0) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  double operator()(int x, int y, int c = 0) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_ && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }

  /// Throws ValueError unless every intensity is finite and in [0,1].
  void validate() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<double> data_;
};

/// Horizontal disparity in pixels plus validity mask.
struct DisparityMap {
  Grid<double> disp;
  Mask valid;

  DisparityMap() = default;
  DisparityMap(int width, int height, double fill = 0.0, bool valid_fill = true)
      : disp(width, height, fill), valid(width, height, valid_fill ? 1 : 0) {}

  int width() const { return disp.width(); }
  int height() const { return disp.height(); }
  bool is_valid(int x, int y) const { return valid(x, y) != 0; }

  friend bool operator==(const DisparityMap&, const DisparityMap&) = default;
};

/// Depth in meters plus validity mask.
struct DepthMap {
  Grid<double> depth;
  Mask valid;

  DepthMap() = default;
  DepthMap(int width, int height, double fill = 0.0, bool valid_fill = true)
      : depth(width, height, fill), valid(width, height, valid_fill ? 1 : 0) {}

  int width() const { return depth.width(); }
  int height() const { return depth.height(); }
  bool is_valid(int x, int y) const { return valid(x, y) != 0; }
};

/// Camera pair description. `rectified()` covers the common stereo case; the
/// matrices describe the general pose warp: a point X in the reference camera
/// maps to R*X + t in the other camera.
struct StereoCalibration {
  double focal = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double baseline = 0.0;
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d K_other = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  /// Left-reference rectified pair; the other camera sits `baseline` meters
  /// to the right, so t = (-baseline, 0, 0).
  static StereoCalibration rectified(double focal, double cx, double cy, double baseline);

  void validate() const;
};

/// Half-open pixel rectangle [x0,x1) x [y0,y1).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
  bool fits(int w, int h) const { return 0 <= x0 && x0 < x1 && x1 <= w && 0 <= y0 && y0 < y1 && y1 <= h; }

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter advanced by the
/// golden-ratio increment, passed through a fixed avalanche mix. The stream
/// depends only on the seed, on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next();
  /// Uniform double in [0,1) built from the top 53 bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0,n), unbiased (rejection of the short tail).
  std::uint64_t uniform_index(std::uint64_t n);

  /// Stateless mix used for hashing lattice coordinates.
  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t state_;
};

/// Depth-validity threshold used by disparity_to_depth.
inline constexpr double kEpsilonDisparity = 1e-3;

Image to_grayscale(const Image& img);
Image hflip(const Image& img);
DisparityMap hflip(const DisparityMap& d);

DepthMap disparity_to_depth(const DisparityMap& d, const StereoCalibration& calib);
DisparityMap depth_to_disparity(const DepthMap& depth, const StereoCalibration& calib);

}  // namespace depthhints
