// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#include "tsmlab/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace tsmlab {

namespace {

void check_dims(int width, int height, std::size_t have, int channels,
                const char* who) {
  require(width >= 1 && height >= 1, ErrorCode::Parameter,
          std::string(who) + ": dimensions must be >= 1");
  require(have == static_cast<std::size_t>(width) * height * channels,
          ErrorCode::Parameter, std::string(who) + ": buffer size mismatch");
}

}  // namespace

void write_png_rgb(const std::filesystem::path& path, int width, int height,
                   const std::vector<double>& rgb) {
  check_dims(width, height, rgb.size(), 3, "write_png_rgb");
  std::vector<png_byte> bytes(rgb.size());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    double v = std::clamp(rgb[i], 0.0, 1.0);
    bytes[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }
  png_image img = {};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.string().c_str(), 0, bytes.data(),
                               0, nullptr)) {
    raise(ErrorCode::Io, "png write failed: " + std::string(img.message));
  }
}

ImageRgb read_png_rgb(const std::filesystem::path& path) {
  png_image img = {};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
    raise(ErrorCode::Io, "png read failed: " + std::string(img.message));
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<png_byte> bytes(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr)) {
    raise(ErrorCode::Io, "png read failed: " + std::string(img.message));
  }
  ImageRgb out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.rgb.resize(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) out.rgb[i] = bytes[i] / 255.0;
  return out;
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<double>& values) {
  check_dims(width, height, values.size(), 1, "write_pgm16");
  auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  double lo = *lo_it, hi = *hi_it;
  require(std::isfinite(lo) && std::isfinite(hi), ErrorCode::Parameter,
          "write_pgm16: non-finite values");
  double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;

  std::ofstream f(path, std::ios::binary);
  require(f.good(), ErrorCode::Io, "cannot open " + path.string());
  f << "P5\n" << width << " " << height << "\n65535\n";
  for (double v : values) {
    auto q = static_cast<unsigned>(std::lround((v - lo) * scale));
    char hi_byte = static_cast<char>((q >> 8) & 0xff);
    char lo_byte = static_cast<char>(q & 0xff);
    f.put(hi_byte);
    f.put(lo_byte);
  }
  require(f.good(), ErrorCode::Io, "failed writing " + path.string());

  std::ofstream side(path.string() + ".minmax.txt");
  require(side.good(), ErrorCode::Io, "cannot open minmax sidecar");
  char buf[80];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g\n", lo, hi);
  side << buf;
  require(side.good(), ErrorCode::Io, "failed writing minmax sidecar");
}

}  // namespace tsmlab
