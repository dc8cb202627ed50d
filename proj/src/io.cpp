#include "depthhints/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <png.h>

namespace depthhints::io {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const fs::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  return f;
}

// Decoded PNG samples, 8 or 16 bit, channels 1 or 3, host order.
struct RawPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;
};

RawPng read_png_raw(const fs::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw IoError(path.string() + " is not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }

  RawPng raw;
  std::vector<png_byte> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("malformed PNG file " + path.string());
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  const std::size_t row_bytes = png_get_rowbytes(png, info);
  buffer.resize(row_bytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = buffer.data() + row_bytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (raw.channels != 1 && raw.channels != 3) throw IoError("unsupported PNG channel layout in " + path.string());
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height * raw.channels;
  raw.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    raw.samples[i] = raw.bit_depth == 16 ? static_cast<std::uint16_t>(buffer[2 * i] << 8 | buffer[2 * i + 1])
                                         : buffer[i];
  return raw;
}

void write_png_raw(const fs::path& path, int width, int height, int channels, int bit_depth,
                   const std::vector<std::uint16_t>& samples) {
  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }

  const std::size_t bytes = bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * bytes;
  std::vector<png_byte> buffer(row_bytes * height);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bytes == 2) {
      buffer[2 * i] = static_cast<png_byte>(samples[i] >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(samples[i]);
    }
  }
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = buffer.data() + row_bytes * y;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing PNG file " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("failed writing PNG file " + path.string());
}

std::uint16_t quantize8(double v) { return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }

// Skips whitespace and '#' comments in a PNM header.
void skip_pnm_space(std::istream& in) {
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

Image read_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError(path.string() + " is not a binary PGM (P5) file");
  int w = 0, h = 0, maxval = 0;
  skip_pnm_space(in);
  in >> w;
  skip_pnm_space(in);
  in >> h;
  skip_pnm_space(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) throw IoError("malformed PGM header in " + path.string());
  in.get();
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> buf(static_cast<std::size_t>(w) * h * bytes);
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError("truncated PGM data in " + path.string());
  Image img(w, h, 1);
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    const int v = bytes == 2 ? (buf[2 * i] << 8 | buf[2 * i + 1]) : buf[i];
    img.data()[i] = std::min(1.0, static_cast<double>(v) / maxval);
  }
  return img;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

Image read_image(const fs::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw IoError("cannot open " + path.string());
  char head[2] = {0, 0};
  probe.read(head, 2);
  probe.close();
  if (head[0] == 'P' && head[1] == '5') return read_pgm(path);

  const RawPng raw = read_png_raw(path);
  const double scale = raw.bit_depth == 16 ? 65535.0 : 255.0;
  Image img(raw.width, raw.height, raw.channels);
  for (std::size_t i = 0; i < raw.samples.size(); ++i) img.data()[i] = raw.samples[i] / scale;
  return img;
}

void write_image_png(const fs::path& path, const Image& img) {
  std::vector<std::uint16_t> samples(img.data().size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = quantize8(img.data()[i]);
  write_png_raw(path, img.width(), img.height(), img.channels(), 8, samples);
}

void write_image_pgm(const fs::path& path, const Image& img) {
  if (img.channels() != 1) throw ValueError("write_image_pgm: grayscale image required");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  for (double v : img.data()) out.put(static_cast<char>(quantize8(v)));
  if (!out) throw IoError("failed writing " + path.string());
}

Grid<std::uint16_t> read_png16(const fs::path& path) {
  const RawPng raw = read_png_raw(path);
  if (raw.channels != 1) throw IoError(path.string() + ": expected a single-channel PNG");
  Grid<std::uint16_t> out(raw.width, raw.height);
  out.data() = raw.samples;
  return out;
}

void write_png16(const fs::path& path, const Grid<std::uint16_t>& values) {
  write_png_raw(path, values.width(), values.height(), 1, 16, values.data());
}

void write_mask_png(const fs::path& path, const Mask& mask) {
  std::vector<std::uint16_t> samples(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) samples[i] = mask[i] ? 255 : 0;
  write_png_raw(path, mask.width(), mask.height(), 1, 8, samples);
}

Mask read_mask_png(const fs::path& path) {
  const RawPng raw = read_png_raw(path);
  if (raw.channels != 1) throw IoError(path.string() + ": expected a single-channel mask");
  Mask out(raw.width, raw.height);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = raw.samples[i] != 0;
  return out;
}

void write_disparity_png16(const fs::path& path, const DisparityMap& d) {
  Grid<std::uint16_t> stored(d.width(), d.height(), 0);
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (!d.valid[i]) continue;
    const double v = d.disp[i];
    if (!std::isfinite(v) || v < 0.0 || v >= 256.0) {
      std::ostringstream os;
      os << "disparity " << v << " cannot be stored in a 16-bit PNG (range [0,256))";
      throw ValueError(os.str());
    }
    // A valid disparity below 1/512 would round to the invalid code.
    stored[i] = static_cast<std::uint16_t>(std::clamp<long>(std::lround(v * 256.0), 1, 65535));
  }
  write_png16(path, stored);
}

DisparityMap read_disparity_png16(const fs::path& path) {
  const Grid<std::uint16_t> stored = read_png16(path);
  DisparityMap d(stored.width(), stored.height(), 0.0, false);
  for (std::size_t i = 0; i < stored.size(); ++i) {
    if (stored[i] == 0) continue;
    d.disp[i] = stored[i] / 256.0;
    d.valid[i] = 1;
  }
  return d;
}

void write_pfm(const fs::path& path, const Grid<double>& values, const Mask* valid) {
  if (valid && !valid->same_shape(values)) throw ValueError("write_pfm: mask and values differ in size");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "Pf\n" << values.width() << ' ' << values.height() << "\n-1.0\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(values.width()) * 4);
  for (int y = values.height() - 1; y >= 0; --y) {
    for (int x = 0; x < values.width(); ++x) {
      float f = static_cast<float>(values(x, y));
      if (valid && !(*valid)(x, y)) f = std::numeric_limits<float>::quiet_NaN();
      const auto bits = std::bit_cast<std::uint32_t>(f);
      for (int b = 0; b < 4; ++b) row[4 * x + b] = static_cast<unsigned char>(bits >> (8 * b));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("failed writing " + path.string());
}

PfmData read_pfm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (!in || magic != "Pf" || w <= 0 || h <= 0 || scale == 0.0 || !std::isfinite(scale))
    throw IoError("malformed PFM header in " + path.string() + " (only single-channel Pf is supported)");
  in.get();
  const bool little = scale < 0.0;

  PfmData data{Grid<double>(w, h), Mask(w, h, 1)};
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 4);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size())) throw IoError("truncated PFM data in " + path.string());
    for (int x = 0; x < w; ++x) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        const int shift = little ? 8 * b : 8 * (3 - b);
        bits |= static_cast<std::uint32_t>(row[4 * x + b]) << shift;
      }
      const float f = std::bit_cast<float>(bits);
      data.values(x, y) = f;
      if (std::isnan(f)) data.valid(x, y) = 0;
    }
  }
  return data;
}

StereoCalibration read_calibration(const fs::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration file " + path.string());

  std::map<std::string, std::vector<double>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of(":=");
    if (sep == std::string::npos)
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'key: values'");
    const std::string key = trim(line.substr(0, sep));
    std::istringstream vs(line.substr(sep + 1));
    std::vector<double> values;
    for (double v; vs >> v;) values.push_back(v);
    if (!vs.eof() || values.empty())
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad numeric value for '" + key + "'");
    entries[key] = std::move(values);
  }

  auto scalar = [&](const std::string& key) -> std::optional<double> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    if (it->second.size() != 1) throw IoError("calibration key '" + key + "' expects one value");
    return it->second.front();
  };
  auto matrix = [&](const std::string& key) -> std::optional<std::vector<double>> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    if (it->second.size() != 12) throw IoError("calibration key '" + key + "' expects 12 values (3x4, row-major)");
    return it->second;
  };

  std::optional<double> focal = scalar("focal_px"), cx = scalar("cx"), cy = scalar("cy"),
                        baseline = scalar("baseline_m");
  const auto p_left = matrix("P_left");
  const auto p_right = matrix("P_right");

  auto reconcile = [&](std::optional<double>& explicit_value, std::optional<double> derived, const char* key) {
    if (!derived) return;
    if (!explicit_value) {
      explicit_value = derived;
    } else if (std::abs(*explicit_value - *derived) > 1e-9 * std::max(1.0, std::abs(*derived))) {
      std::ostringstream os;
      os << "calibration: explicit " << key << " = " << *explicit_value << " overrides projection-derived value "
         << *derived;
      if (warnings)
        warnings->push_back(os.str());
      else
        std::cerr << "warning: " << os.str() << '\n';
    }
  };

  if (p_left) {
    const std::vector<double>& P = *p_left;
    reconcile(focal, P[0], "focal_px");
    reconcile(cx, P[2], "cx");
    reconcile(cy, P[6], "cy");
    if (p_right && P[0] != 0.0) reconcile(baseline, -((*p_right)[3] - P[3]) / P[0], "baseline_m");
  }

  std::vector<std::string> missing;
  if (!focal) missing.push_back("focal_px");
  if (!cx) missing.push_back("cx");
  if (!cy) missing.push_back("cy");
  if (!baseline) missing.push_back("baseline_m");
  if (!missing.empty()) {
    std::string msg = "calibration file " + path.string() + " is missing:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }

  StereoCalibration calib = StereoCalibration::rectified(*focal, *cx, *cy, *baseline);
  calib.validate();
  return calib;
}

}  // namespace depthhints::io
