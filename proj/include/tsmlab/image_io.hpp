// Copyright (c) 2026 The tsmlab Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <vector>

#include "tsmlab/error.hpp"

namespace tsmlab {

struct ImageRgb {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;  // h*w*3 in [0, 1]
};

// 8-bit RGB PNG. Values are clamped to [0, 1] and rounded.
void write_png_rgb(const std::filesystem::path& path, int width, int height,
                   const std::vector<double>& rgb);
ImageRgb read_png_rgb(const std::filesystem::path& path);

// 16-bit binary PGM, linearly rescaled to the full range. The original
// min/max land in a "<path>.minmax.txt" sidecar ("min max\n") so values
// can be reconstructed.
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const std::vector<double>& values);

}  // namespace tsmlab
