#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "depthhints/core.hpp"

namespace depthhints::io {

namespace fs = std::filesystem;

/// Reads an 8- or 16-bit PNG (gray, gray+alpha, RGB, RGBA; alpha dropped) or
/// a binary PGM (P5). Intensities are divided by 255 or 65535.
Image read_image(const fs::path& path);
/// 8-bit PNG; intensities rounded to the nearest of 256 levels.
void write_image_png(const fs::path& path, const Image& img);
/// Binary PGM (P5, maxval 255) of a grayscale image.
void write_image_pgm(const fs::path& path, const Image& img);

/// Raw single-channel 16-bit PNG access.
Grid<std::uint16_t> read_png16(const fs::path& path);
void write_png16(const fs::path& path, const Grid<std::uint16_t>& values);

/// 0/255 8-bit PNG of a mask.
void write_mask_png(const fs::path& path, const Mask& mask);
Mask read_mask_png(const fs::path& path);

/// Disparity as 16-bit PNG storing round(disp * 256); 0 means invalid.
/// Throws ValueError for valid disparities >= 256 or negative.
void write_disparity_png16(const fs::path& path, const DisparityMap& d);
DisparityMap read_disparity_png16(const fs::path& path);

/// Single-channel PFM (`Pf`, little-endian, rows bottom-up). Values are
/// stored as 32-bit floats; invalid pixels, when a mask is given, are
/// written as NaN.
void write_pfm(const fs::path& path, const Grid<double>& values, const Mask* valid = nullptr);
struct PfmData {
  Grid<double> values;
  /// 0 where the stored value is NaN.
  Mask valid;
};
/// Honors either byte order via the sign of the scale field.
PfmData read_pfm(const fs::path& path);

/// Key/value calibration text (see README). Explicit focal_px / cx / cy /
/// baseline_m take precedence over values derived from P_left / P_right
/// projection matrices; each conflict is reported in `warnings`.
StereoCalibration read_calibration(const fs::path& path, std::vector<std::string>* warnings = nullptr);

}  // namespace depthhints::io
