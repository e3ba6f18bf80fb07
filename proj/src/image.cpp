#include "motionprep/image.hpp"

#include <algorithm>
#include <cmath>

namespace motionprep {

Image to_gray(const Image& img) {
  if (img.channels == 1) return img;
  if (img.channels != 3) throw Error("to_gray: expected 1 or 3 channels");
  Image out(img.width, img.height, 1);
  const float* src = img.data.data();
  for (std::size_t i = 0, n = static_cast<std::size_t>(img.width) * img.height; i < n; ++i) {
    out.data[i] = 0.299f * src[3 * i] + 0.587f * src[3 * i + 1] + 0.114f * src[3 * i + 2];
  }
  return out;
}

float sample_bilinear(const Image& img, double x, double y, int c) {
  const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v0 = img.at(x0, y0, c) * (1.0 - fx) + img.at(x1, y0, c) * fx;
  const double v1 = img.at(x0, y1, c) * (1.0 - fx) + img.at(x1, y1, c) * fx;
  return static_cast<float>(v0 * (1.0 - fy) + v1 * fy);
}

std::vector<std::uint8_t> to_bytes(const Image& img) {
  std::vector<std::uint8_t> out(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const float v = std::clamp(img.data[i], 0.0f, 1.0f);
    out[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return out;
}

Image from_bytes(const std::uint8_t* bytes, int width, int height, int channels) {
  Image img(width, height, channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    img.data[i] = static_cast<float>(bytes[i]) / 255.0f;
  }
  return img;
}

}  // namespace motionprep
