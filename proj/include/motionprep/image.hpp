#pragma once

#include <cstdint>
#include <vector>

#include "motionprep/errors.hpp"

namespace motionprep {

// Row-major float image, values in [0, 1], 1 (luminance) or 3 (RGB)
// channels, interleaved. Integer coordinates address pixel centers.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, int c, float fill = 0.0f)
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  float& at(int x, int y, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int x, int y, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool empty() const { return data.empty(); }

  bool operator==(const Image&) const = default;
};

using GrayImage = Image;  // channels == 1

// ITU-R BT.601 luminance.
Image to_gray(const Image& img);

// Bilinear sample of channel c at (x, y); caller guarantees
// 0 <= x <= width-1 and 0 <= y <= height-1.
float sample_bilinear(const Image& img, double x, double y, int c = 0);

inline bool in_bounds(const Image& img, double x, double y) {
  return x >= 0.0 && y >= 0.0 && x <= img.width - 1.0 && y <= img.height - 1.0;
}

// 8-bit conversions used at the I/O boundary.
std::vector<std::uint8_t> to_bytes(const Image& img);
Image from_bytes(const std::uint8_t* bytes, int width, int height, int channels);

}  // namespace motionprep
