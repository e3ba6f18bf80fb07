#pragma once

#include <string>
#include <vector>

#include "motionprep/image.hpp"

namespace motionprep {

// Reads an 8-bit PNG or JPEG (by file magic) as gray or RGB.
// Throws IoError on unreadable or unsupported files.
Image load_image(const std::string& path);

// Writes an 8-bit PNG (gray or RGB). Output bytes are deterministic.
void save_png(const std::string& path, const Image& img);

// 1-bit PNG validity mask; true = valid pixel.
void save_mask_png(const std::string& path, const std::vector<std::uint8_t>& mask, int width,
                   int height);
std::vector<std::uint8_t> load_mask_png(const std::string& path, int* width, int* height);

// Dense float map (depth) as a little-endian PFM.
void save_pfm(const std::string& path, const std::vector<float>& values, int width, int height);
std::vector<float> load_pfm(const std::string& path, int* width, int* height);

}  // namespace motionprep
